"""Block-level chapter parsing.

Every source line lands in exactly one top-level block span: blank lines
are absorbed into the block before them (or, at the top of the file, the
first block), so spans tile ``[1, line_count]`` without gaps.
"""

from __future__ import annotations

import re

from .inline import SourceText, parse_inlines
from .nodes import (
    BlockNode, ChapterDoc, Heading, ImageRef, Inline, LinkRef, QuizRef, SlideEmbed,
    plain_text, walk_blocks, walk_inlines,
)

SLIDE_SCHEME = "slides://"

_BLANK = re.compile(r"^[ \t]*$")
_FENCE = re.compile(r"^( {0,3})(`{3,}|~{3,})(.*)$")
_ATX = re.compile(r"^ {0,3}(#{1,6})(?:[ \t]+(.*?))?(?:[ \t]+#+)?[ \t]*$")
_SETEXT = re.compile(r"^ {0,3}(=+|-+)[ \t]*$")
_HR = re.compile(r"^ {0,3}(?:(?:\*[ \t]*){3,}|(?:-[ \t]*){3,}|(?:_[ \t]*){3,})$")
_QUOTE = re.compile(r"^( {0,3}> ?)")
_LIST = re.compile(r"^( {0,3})([-*+]|\d{1,9}[.)])([ \t]+|$)")
_HTML_START = re.compile(r"^ {0,3}<(?:[A-Za-z][A-Za-z0-9-]*(?:[\s/>]|$)|/[A-Za-z]|!--)")
_QUIZ_REF = re.compile(r"^\s*<!--\s*quiz:\s*([A-Za-z0-9_.-]+)\s*-->\s*$")
_SLIDE_URI = re.compile(r"^slides://([^/\s]+)/([^/\s]+?)/?$")

# (content, line number, column offset of content)
_Line = tuple[str, int, int]


def _strip_cols(line: _Line, n: int) -> _Line:
    """Drop up to ``n`` leading columns of whitespace (tabs count as 4)."""
    text, no, col = line
    i = width = 0
    while i < len(text) and width < n and text[i] in " \t":
        width += 4 - (width % 4) if text[i] == "\t" else 1
        i += 1
    return text[i:], no, col + i


def _indent(text: str) -> int:
    width = 0
    for ch in text:
        if ch == " ":
            width += 1
        elif ch == "\t":
            width += 4 - (width % 4)
        else:
            break
    return width


def _starts_block(text: str, in_paragraph: bool = True) -> bool:
    if _BLANK.match(text):
        return True
    if _FENCE.match(text) or _ATX.match(text) or _HR.match(text) or _QUOTE.match(text) or _HTML_START.match(text):
        return True
    m = _LIST.match(text)
    if m:
        if not in_paragraph:
            return True
        # only unordered or "1." lists with content may interrupt a paragraph
        rest = text[m.end():]
        return bool(rest.strip()) and (m.group(2) in "-*+" or m.group(2)[:-1] == "1")
    return False


class _BlockParser:
    def __init__(self, warnings: list[str]):
        self.warnings = warnings

    def parse(self, lines: list[_Line]) -> list[BlockNode]:
        blocks: list[BlockNode] = []
        i = 0
        n = len(lines)
        pending_blank_start = None
        while i < n:
            text, no, _ = lines[i]
            if _BLANK.match(text):
                if blocks:
                    blocks[-1].end_line = no
                elif pending_blank_start is None:
                    pending_blank_start = no
                i += 1
                continue
            block, i = self._block(lines, i)
            if pending_blank_start is not None:
                block.start_line = pending_blank_start
                pending_blank_start = None
            blocks.append(block)
        if pending_blank_start is not None:
            # input was all blank
            blocks.append(BlockNode("paragraph", pending_blank_start, lines[-1][1]))
        return blocks

    def _block(self, lines: list[_Line], i: int) -> tuple[BlockNode, int]:
        text, no, col = lines[i]
        if _indent(text) >= 4:
            return self._indented_code(lines, i)
        m = _FENCE.match(text)
        if m and not (m.group(2)[0] == "`" and "`" in m.group(3)):
            return self._fenced(lines, i, m)
        m = _ATX.match(text)
        if m:
            src_lines = []
            content = m.group(2) or ""
            if content:
                start = text.index(content, len(m.group(1)))
                src_lines = [(content, no, col + start)]
            node = BlockNode("heading", no, no, level=len(m.group(1)))
            node.inlines = parse_inlines(SourceText.from_lines(src_lines)) if src_lines else []
            return node, i + 1
        if _HR.match(text):
            return BlockNode("thematic_break", no, no), i + 1
        if _QUOTE.match(text):
            return self._blockquote(lines, i)
        m = _LIST.match(text)
        if m:
            return self._list(lines, i)
        if _HTML_START.match(text):
            return self._html(lines, i)
        return self._paragraph(lines, i)

    def _indented_code(self, lines, i):
        body = []
        start = lines[i][1]
        j = i
        last_content = i
        while j < len(lines):
            text = lines[j][0]
            if _BLANK.match(text):
                j += 1
                continue
            if _indent(text) < 4:
                break
            last_content = j
            j += 1
        for k in range(i, last_content + 1):
            body.append(_strip_cols(lines[k], 4)[0])
        node = BlockNode("fenced_code", start, lines[last_content][1], text="\n".join(body) + "\n")
        return node, last_content + 1

    def _fenced(self, lines, i, m):
        indent = len(m.group(1))
        fence = m.group(2)
        info = m.group(3).strip()
        start = lines[i][1]
        body = []
        j = i + 1
        closer = re.compile(r"^ {0,3}" + re.escape(fence[0]) + "{" + str(len(fence)) + r",}[ \t]*$")
        while j < len(lines):
            text = lines[j][0]
            if closer.match(text):
                node = BlockNode("fenced_code", start, lines[j][1], language=info.split()[0] if info else "",
                                 text="".join(_strip_cols(ln, indent)[0] + "\n" for ln in lines[i + 1:j]))
                return node, j + 1
            body.append(lines[j])
            j += 1
        self.warnings.append(f"line {start}: unterminated code fence closed at end of file")
        end = lines[-1][1]
        node = BlockNode("fenced_code", start, end, language=info.split()[0] if info else "",
                         text="".join(_strip_cols(ln, indent)[0] + "\n" for ln in body))
        return node, len(lines)

    def _blockquote(self, lines, i):
        inner: list[_Line] = []
        j = i
        prev_blank = False
        while j < len(lines):
            text, no, col = lines[j]
            m = _QUOTE.match(text)
            if m:
                content = text[m.end():]
                inner.append((content, no, col + m.end()))
                prev_blank = bool(_BLANK.match(content))
            elif not prev_blank and not _starts_block(text) and inner:
                inner.append(lines[j])  # lazy continuation
            else:
                break
            j += 1
        node = BlockNode("blockquote", lines[i][1], lines[j - 1][1])
        node.children = _BlockParser(self.warnings).parse(inner)
        return node, j

    def _list(self, lines, i):
        first = _LIST.match(lines[i][0])
        bullet = first.group(2)
        ordered = bullet[-1] in ".)"
        kind = bullet[-1] if ordered else bullet
        node = BlockNode("list", lines[i][1], lines[i][1], ordered=ordered,
                         start=int(bullet[:-1]) if ordered else 1)
        j = i
        while j < len(lines):
            m = _LIST.match(lines[j][0])
            if not m:
                break
            b = m.group(2)
            if (b[-1] if b[-1] in ".)" else b) != kind:
                break
            marker_width = len(m.group(1)) + len(b)
            spaces = _indent(lines[j][0][marker_width:]) if m.group(3) else 0
            if spaces == 0 or spaces > 4 or not lines[j][0][m.end():].strip():
                content_indent = marker_width + 1
            else:
                content_indent = marker_width + spaces
            first_content = lines[j][0][m.end():] if m.group(3) else ""
            if spaces > 4:
                first_content = lines[j][0][marker_width + 1:]
            start_col = len(lines[j][0]) - len(first_content)
            item: list[_Line] = [(first_content, lines[j][1], lines[j][2] + start_col)]
            k = j + 1
            prev_blank = _BLANK.match(first_content) is not None
            while k < len(lines):
                text = lines[k][0]
                if _BLANK.match(text):
                    item.append(("", lines[k][1], lines[k][2] + len(text)))
                    prev_blank = True
                    k += 1
                    continue
                if _indent(text) >= content_indent:
                    item.append(_strip_cols(lines[k], content_indent))
                    prev_blank = False
                    k += 1
                    continue
                if not prev_blank and not _starts_block(text) and not _LIST.match(text):
                    item.append(_strip_cols(lines[k], content_indent))  # lazy continuation
                    k += 1
                    continue
                break
            t = k
            while t > j + 1 and _BLANK.match(lines[t - 1][0]):
                t -= 1
            node.items.append(_BlockParser(self.warnings).parse(item[: t - j]))
            nxt = _LIST.match(lines[k][0]) if k < len(lines) else None
            if nxt and (nxt.group(2)[-1] if ordered else nxt.group(2)) == kind:
                # blank lines between items stay inside the list span
                node.end_line = lines[k - 1][1]
                j = k
                continue
            node.end_line = lines[t - 1][1]
            j = t
            break
        return node, j

    def _html(self, lines, i):
        text = lines[i][0]
        j = i
        if text.lstrip().startswith("<!--"):
            while j < len(lines) and "-->" not in lines[j][0]:
                j += 1
            j = min(j, len(lines) - 1)
        else:
            while j + 1 < len(lines) and not _BLANK.match(lines[j + 1][0]):
                j += 1
        raw = "\n".join(ln[0] for ln in lines[i:j + 1])
        node = BlockNode("html_passthrough", lines[i][1], lines[j][1], text=raw)
        m = _QUIZ_REF.match(raw)
        if m:
            node.quiz_id = m.group(1)
        return node, j + 1

    def _paragraph(self, lines, i):
        j = i + 1
        while j < len(lines):
            text = lines[j][0]
            if _SETEXT.match(text):
                level = 1 if text.strip()[0] == "=" else 2
                node = BlockNode("heading", lines[i][1], lines[j][1], level=level)
                node.inlines = parse_inlines(SourceText.from_lines([_strip_cols(ln, 3) for ln in lines[i:j]]))
                return node, j + 1
            if _starts_block(text):
                break
            j += 1
        src = [_strip_cols(ln, 3) for ln in lines[i:j]]
        src[-1] = (src[-1][0].rstrip(), src[-1][1], src[-1][2])
        node = BlockNode("paragraph", lines[i][1], lines[j - 1][1])
        node.inlines = parse_inlines(SourceText.from_lines(src))
        meaningful = [n for n in node.inlines if not (n.kind == "text" and not n.text.strip())]
        if len(meaningful) == 1 and meaningful[0].kind == "image":
            node.kind = "image"
        return node, j


def slugify(heading_text: str, used: set[str] | None = None) -> str:
    """Anchor id for a heading; pass ``used`` to apply collision suffixes."""
    out = []
    for ch in heading_text.lower():
        if ch.isalnum():
            out.append(ch)
        elif ch.isspace() or ch == "-":
            out.append("-") if ch.isspace() else None
    slug = re.sub(r"-{2,}", "-", "".join(out)).strip("-") or "section"
    if used is None:
        return slug
    candidate = slug
    n = 0
    while candidate in used:
        n += 1
        candidate = f"{slug}-{n}"
    used.add(candidate)
    return candidate


def parse_slide_uri(target: str) -> tuple[str, str] | None:
    m = _SLIDE_URI.match(target)
    return (m.group(1), m.group(2)) if m else None


def parse_chapter(raw: str, source_path: str, title_override: str | None = None) -> ChapterDoc:
    """Parse chapter markdown into a ChapterDoc.

    Malformed constructs never raise; an unterminated code fence is closed at
    end of file and noted in ``doc.warnings``.
    """
    text = raw.replace("\r\n", "\n").replace("\r", "\n")
    if text.startswith("﻿"):
        text = text[1:]
    raw_lines = text.split("\n")
    if raw_lines and raw_lines[-1] == "":
        raw_lines.pop()
    lines = [(ln, i + 1, 0) for i, ln in enumerate(raw_lines)]
    warnings: list[str] = []
    blocks = _BlockParser(warnings).parse(lines)
    doc = ChapterDoc(source_path=source_path, title="", blocks=blocks, warnings=warnings, line_count=len(lines))
    _collect(doc)
    if title_override:
        doc.title = title_override
    elif not doc.title:
        doc.title = doc.name
    return doc


def _collect(doc: ChapterDoc) -> None:
    used: set[str] = set()
    for block in walk_blocks(doc.blocks):
        if block.kind == "heading":
            text = plain_text(block.inlines).strip()
            block.anchor = slugify(text, used)
            doc.headings.append(Heading(block.level, text, block.anchor, block.start_line))
            if block.level == 1 and not doc.title:
                doc.title = text
        if block.kind == "html_passthrough" and block.quiz_id:
            doc.quiz_refs.append(QuizRef(block.quiz_id, block.start_line))
        for node in walk_inlines(block.inlines):
            _record_inline(doc, node)


def _record_inline(doc: ChapterDoc, node: Inline) -> None:
    if node.kind == "link":
        doc.links.append(LinkRef(node.target, node.line, node.column))
    elif node.kind == "image":
        slide = parse_slide_uri(node.target) if node.target.startswith(SLIDE_SCHEME) else None
        if slide:
            doc.slide_embeds.append(SlideEmbed(slide[0], slide[1], node.text, node.line, node.column))
        else:
            doc.images.append(ImageRef(node.target, node.text, node.line, node.column))
