"""Inline markdown parsing with source positions.

The parser works on the joined text of a block's lines and keeps an offset
map back to (line, column) so every emitted node can point at its source.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import Inline

_ESCAPABLE = set("!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~")
_BARE_URL = re.compile(r"https?://[^\s<>\[\]]+")
_AUTOLINK = re.compile(r"<([A-Za-z][A-Za-z0-9+.-]{1,31}:[^\s<>]*)>")
_EMAIL_AUTOLINK = re.compile(r"<([A-Za-z0-9.!#$%&'*+/=?^_`{|}~-]+@[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?(?:\.[A-Za-z0-9-]+)*)>")
_HTML_TAG = re.compile(
    r"<(?:[A-Za-z][A-Za-z0-9-]*(?:\s+[A-Za-z_:][\w.:-]*(?:\s*=\s*(?:\"[^\"]*\"|'[^']*'|[^\s\"'=<>`]+))?)*\s*/?"
    r"|/[A-Za-z][A-Za-z0-9-]*\s*|!--.*?--)>",
    re.S,
)


@dataclass
class SourceText:
    """Joined block text plus the source position of each character."""

    text: str
    positions: list[tuple[int, int]]

    @classmethod
    def from_lines(cls, lines: list[tuple[str, int, int]]) -> SourceText:
        """``lines`` holds (content, line number, column of content start - 1)."""
        parts: list[str] = []
        positions: list[tuple[int, int]] = []
        for i, (content, line_no, col) in enumerate(lines):
            for j in range(len(content)):
                positions.append((line_no, col + j + 1))
            parts.append(content)
            if i < len(lines) - 1:
                positions.append((line_no, col + len(content) + 1))
                parts.append("\n")
        # sentinel so end-of-text lookups never fail
        last = lines[-1] if lines else ("", 1, 0)
        positions.append((last[1], last[2] + len(last[0]) + 1))
        return cls("\n".join(c for c, _, _ in lines), positions)

    def pos(self, i: int) -> tuple[int, int]:
        return self.positions[min(i, len(self.positions) - 1)]


def parse_inlines(src: SourceText) -> list[Inline]:
    return _Parser(src).parse(0, len(src.text))


class _Parser:
    def __init__(self, src: SourceText):
        self.src = src
        self.s = src.text

    def parse(self, start: int, end: int) -> list[Inline]:
        s = self.s
        out: list[Inline] = []
        buf: list[str] = []
        buf_start = start
        i = start

        def flush():
            if buf:
                line, col = self.src.pos(buf_start)
                text = "".join(buf)
                if out and out[-1].kind == "text":
                    out[-1].text += text
                else:
                    out.append(Inline("text", text=text, line=line, column=col))
                buf.clear()

        while i < end:
            c = s[i]
            node, nxt = None, i
            if c == "\\" and i + 1 < end and s[i + 1] in _ESCAPABLE:
                if not buf:
                    buf_start = i
                buf.append(s[i + 1])
                i += 2
                continue
            if c == "\\" and i + 1 < end and s[i + 1] == "\n":
                node, nxt = Inline("hardbreak"), i + 2
            elif c == "`":
                node, nxt = self._code_span(i, end)
            elif c == "!" and i + 1 < end and s[i + 1] == "[":
                node, nxt = self._link(i + 1, end, image=True)
                if node is not None:
                    node.line, node.column = self.src.pos(i)
            elif c == "[":
                node, nxt = self._link(i, end, image=False)
            elif c == "<":
                node, nxt = self._angle(i, end)
            elif c in "*_":
                node, nxt = self._emphasis(i, end)
            elif c == "\n":
                hard = len(buf) >= 2 and buf[-1] == " " and buf[-2] == " "
                while buf and buf[-1] in " \t":
                    buf.pop()
                node, nxt = Inline("hardbreak" if hard else "softbreak"), i + 1
                while nxt < end and s[nxt] in " \t":
                    nxt += 1
            elif c == "h" and s.startswith(("http://", "https://"), i) and (i == start or not s[i - 1].isalnum()):
                node, nxt = self._bare_url(i, end)
            if node is None:
                if not buf:
                    buf_start = i
                buf.append(c)
                i += 1
                continue
            flush()
            if not node.line:
                node.line, node.column = self.src.pos(i)
            out.append(node)
            i = nxt
        flush()
        return out

    def _code_span(self, i: int, end: int):
        s = self.s
        j = i
        while j < end and s[j] == "`":
            j += 1
        run = s[i:j]
        k = j
        while True:
            k = s.find(run, k, end)
            if k < 0:
                return None, i
            after = k + len(run)
            if (after < end and s[after] == "`") or s[k - 1] == "`":
                k = after
                while k < end and s[k] == "`":
                    k += 1
                continue
            body = s[j:k].replace("\n", " ")
            if len(body) >= 2 and body[0] == " " and body[-1] == " " and body.strip():
                body = body[1:-1]
            return Inline("code", text=body), after

    def _match_bracket(self, i: int, end: int) -> int:
        """Index of the ``]`` closing the ``[`` at ``i``, or -1."""
        s = self.s
        depth = 0
        j = i
        while j < end:
            c = s[j]
            if c == "\\":
                j += 2
                continue
            if c == "`":
                _, nxt = self._code_span(j, end)
                if nxt > j:
                    j = nxt
                    continue
            if c == "[":
                depth += 1
            elif c == "]":
                depth -= 1
                if depth == 0:
                    return j
            j += 1
        return -1

    def _destination(self, j: int, end: int):
        """Parse ``(dest "title")`` starting at ``(``; returns (dest, title, next) or None."""
        s = self.s
        if j >= end or s[j] != "(":
            return None
        k = j + 1
        while k < end and s[k] in " \t\n":
            k += 1
        if k < end and s[k] == "<":
            close = s.find(">", k, end)
            if close < 0:
                return None
            dest = s[k + 1:close]
            k = close + 1
        else:
            depth = 0
            d0 = k
            while k < end:
                c = s[k]
                if c == "\\" and k + 1 < end:
                    k += 2
                    continue
                if c in " \t\n":
                    break
                if c == "(":
                    depth += 1
                elif c == ")":
                    if depth == 0:
                        break
                    depth -= 1
                k += 1
            dest = s[d0:k]
        while k < end and s[k] in " \t\n":
            k += 1
        title = ""
        if k < end and s[k] in "\"'":
            q = s[k]
            close = s.find(q, k + 1, end)
            if close < 0:
                return None
            title = s[k + 1:close]
            k = close + 1
            while k < end and s[k] in " \t\n":
                k += 1
        if k >= end or s[k] != ")":
            return None
        dest = re.sub(r"\\([!-/:-@\[-`{-~])", r"\1", dest)
        return dest, title, k + 1

    def _link(self, i: int, end: int, image: bool):
        close = self._match_bracket(i, end)
        if close < 0:
            return None, i
        parsed = self._destination(close + 1, end)
        if parsed is None:
            return None, i
        dest, title, nxt = parsed
        children = self.parse(i + 1, close)
        if image:
            from .nodes import plain_text

            return Inline("image", text=plain_text(children), target=dest, title=title), nxt
        if any(n.kind == "link" and not n.bare for n in children):
            return None, i
        return Inline("link", target=dest, title=title, children=children), nxt

    def _angle(self, i: int, end: int):
        s = self.s
        m = _AUTOLINK.match(s, i, end)
        if m:
            url = m.group(1)
            return Inline("link", target=url, children=[Inline("text", text=url)], bare=True), m.end()
        m = _EMAIL_AUTOLINK.match(s, i, end)
        if m:
            addr = m.group(1)
            return Inline("link", target="mailto:" + addr, children=[Inline("text", text=addr)], bare=True), m.end()
        m = _HTML_TAG.match(s, i, end)
        if m:
            return Inline("html", text=m.group(0)), m.end()
        return None, i

    def _bare_url(self, i: int, end: int):
        m = _BARE_URL.match(self.s, i, end)
        if not m:
            return None, i
        url = m.group(0)
        while url and url[-1] in ".,;:!?'\"*_":
            url = url[:-1]
        while url.endswith(")") and url.count(")") > url.count("("):
            url = url[:-1]
        if len(url) <= len("https://"):
            return None, i
        return Inline("link", target=url, children=[Inline("text", text=url)], bare=True), i + len(url)

    def _emphasis(self, i: int, end: int):
        s = self.s
        c = s[i]
        j = i
        while j < end and s[j] == c:
            j += 1
        n = j - i
        if n > 3 or j >= end or s[j].isspace():
            return None, i
        if c == "_" and i > 0 and s[i - 1].isalnum():
            return None, i
        run = c * n
        k = j
        while True:
            k = s.find(run, k, end)
            if k < 0:
                return None, i
            after = k + n
            if s[k - 1].isspace() or (after < end and s[after] == c):
                k = after
                while k < end and s[k] == c:
                    k += 1
                continue
            if c == "_" and after < end and s[after].isalnum():
                k = after
                continue
            break
        inner = self.parse(j, k)
        if n == 1:
            node = Inline("emph", children=inner)
        elif n == 2:
            node = Inline("strong", children=inner)
        else:
            node = Inline("emph", children=[Inline("strong", children=inner)])
        return node, k + n
