"""Serialize chapter ASTs to HTML fragments or Markua text.

Both renderers take the same hooks so each publishing target can rewrite
link and image targets and expand quiz references its own way.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from html import escape
from typing import Callable

from .nodes import BlockNode, Inline


def _same(target: str) -> str:
    return target


def _no_quiz(quiz_id: str) -> str | None:
    return None


@dataclass
class Hooks:
    link: Callable[[str], str] = _same
    image: Callable[[str], str] = _same
    quiz: Callable[[str], str | None] = _no_quiz


# -- HTML ---------------------------------------------------------------------

def inline_html(nodes: list[Inline], hooks: Hooks) -> str:
    out = []
    for n in nodes:
        k = n.kind
        if k == "text":
            out.append(escape(n.text, quote=False))
        elif k == "code":
            out.append(f"<code>{escape(n.text, quote=False)}</code>")
        elif k == "emph":
            out.append(f"<em>{inline_html(n.children, hooks)}</em>")
        elif k == "strong":
            out.append(f"<strong>{inline_html(n.children, hooks)}</strong>")
        elif k == "link":
            title = f' title="{escape(n.title)}"' if n.title else ""
            out.append(f'<a href="{escape(hooks.link(n.target))}"{title}>{inline_html(n.children, hooks)}</a>')
        elif k == "image":
            title = f' title="{escape(n.title)}"' if n.title else ""
            out.append(f'<img src="{escape(hooks.image(n.target))}" alt="{escape(n.text)}"{title} />')
        elif k == "html":
            out.append(n.text)
        elif k == "softbreak":
            out.append("\n")
        elif k == "hardbreak":
            out.append("<br />\n")
    return "".join(out)


def blocks_html(blocks: list[BlockNode], hooks: Hooks, tight: bool = False) -> str:
    parts = []
    for b in blocks:
        k = b.kind
        if k == "heading":
            parts.append(f'<h{b.level} id="{b.anchor}">{inline_html(b.inlines, hooks)}</h{b.level}>')
        elif k == "paragraph":
            if b.inlines:
                body = inline_html(b.inlines, hooks)
                parts.append(body if tight else f"<p>{body}</p>")
        elif k == "image":
            parts.append(f'<p class="figure">{inline_html(b.inlines, hooks)}</p>')
        elif k == "fenced_code":
            cls = f' class="language-{escape(b.language)}"' if b.language else ""
            parts.append(f"<pre><code{cls}>{escape(b.text, quote=False)}</code></pre>")
        elif k == "list":
            tag = "ol" if b.ordered else "ul"
            start = f' start="{b.start}"' if b.ordered and b.start != 1 else ""
            items = []
            for item in b.items:
                item_tight = len(item) <= 1 or all(c.kind != "paragraph" for c in item[1:])
                items.append(f"<li>{blocks_html(item, hooks, tight=item_tight)}</li>")
            parts.append(f"<{tag}{start}>\n" + "\n".join(items) + f"\n</{tag}>")
        elif k == "blockquote":
            parts.append(f"<blockquote>\n{blocks_html(b.children, hooks)}\n</blockquote>")
        elif k == "html_passthrough":
            if b.quiz_id is not None:
                rendered = hooks.quiz(b.quiz_id)
                if rendered is not None:
                    parts.append(rendered)
                    continue
            parts.append(b.text)
        elif k == "thematic_break":
            parts.append("<hr />")
    return "\n".join(parts)


# -- Markua ---------------------------------------------------------------------

_TEXT_ESCAPE = re.compile(r"([\\`*_\[\]<])")
_LINE_START_ESCAPE = re.compile(r"^([#>+=-]|\d+[.)]|\{)")


def _fence_for(body: str) -> str:
    longest = max((len(m) for m in re.findall(r"`+", body)), default=0)
    return "`" * max(3, longest + 1)


def inline_markua(nodes: list[Inline], hooks: Hooks) -> str:
    out = []
    for n in nodes:
        k = n.kind
        if k == "text":
            out.append(_TEXT_ESCAPE.sub(r"\\\1", n.text))
        elif k == "code":
            ticks = "`" * (max((len(m) for m in re.findall(r"`+", n.text)), default=0) + 1)
            pad = " " if n.text.startswith("`") or n.text.endswith("`") else ""
            out.append(f"{ticks}{pad}{n.text}{pad}{ticks}")
        elif k == "emph":
            out.append(f"*{inline_markua(n.children, hooks)}*")
        elif k == "strong":
            out.append(f"**{inline_markua(n.children, hooks)}**")
        elif k == "link":
            target = hooks.link(n.target)
            if n.bare and target == n.target:
                out.append(f"<{target}>" if not target.startswith("mailto:") else f"<{target[7:]}>")
            else:
                title = f' "{n.title}"' if n.title else ""
                out.append(f"[{inline_markua(n.children, hooks)}]({_dest(target)}{title})")
        elif k == "image":
            title = f' "{n.title}"' if n.title else ""
            alt = _TEXT_ESCAPE.sub(r"\\\1", n.text)
            out.append(f"![{alt}]({_dest(hooks.image(n.target))}{title})")
        elif k == "html":
            out.append(n.text)
        elif k == "softbreak":
            out.append("\n")
        elif k == "hardbreak":
            out.append("\\\n")
    return "".join(out)


def _dest(target: str) -> str:
    return f"<{target}>" if re.search(r"[\s()]", target) else target


def _paragraph_markua(inlines: list[Inline], hooks: Hooks) -> str:
    text = inline_markua(inlines, hooks)
    return "\n".join(_LINE_START_ESCAPE.sub(r"\\\1", ln) for ln in text.split("\n"))


def blocks_markua(blocks: list[BlockNode], hooks: Hooks) -> str:
    parts = []
    for b in blocks:
        k = b.kind
        if k == "heading":
            parts.append("#" * b.level + " " + inline_markua(b.inlines, hooks).replace("\n", " "))
        elif k in ("paragraph", "image"):
            if b.inlines:
                parts.append(_paragraph_markua(b.inlines, hooks))
        elif k == "fenced_code":
            fence = _fence_for(b.text)
            parts.append(f"{fence}{b.language}\n{b.text}{fence}")
        elif k == "list":
            items = []
            for n, item in enumerate(b.items):
                marker = f"{b.start + n}. " if b.ordered else "- "
                body = blocks_markua(item, hooks)
                pad = " " * len(marker)
                lines = body.split("\n")
                items.append(marker + lines[0] + "".join("\n" + (pad + ln if ln else "") for ln in lines[1:]))
            parts.append("\n".join(items))
        elif k == "blockquote":
            body = blocks_markua(b.children, hooks)
            parts.append("\n".join(("> " + ln) if ln else ">" for ln in body.split("\n")))
        elif k == "html_passthrough":
            if b.quiz_id is not None:
                rendered = hooks.quiz(b.quiz_id)
                if rendered is not None:
                    parts.append(rendered.rstrip("\n"))
                    continue
            parts.append(b.text)
        elif k == "thematic_break":
            parts.append("* * *")
    return "\n\n".join(parts)
