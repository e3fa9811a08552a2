"""AST node types for parsed chapters."""

from __future__ import annotations

from dataclasses import dataclass, field

BLOCK_KINDS = (
    "heading", "paragraph", "fenced_code", "list", "blockquote", "image",
    "html_passthrough", "thematic_break",
)


@dataclass
class Inline:
    """One inline element.

    ``kind`` is text, code, emph, strong, link, image, html, softbreak or
    hardbreak. Links and images keep their ``target``; emphasis and link text
    carry ``children``. ``line``/``column`` (1-based) locate the element's
    first character in the source file.
    """

    kind: str
    text: str = ""
    target: str = ""
    title: str = ""
    children: list[Inline] = field(default_factory=list)
    line: int = 0
    column: int = 0
    bare: bool = False  # autolink or bare URL rather than [text](url)


@dataclass
class BlockNode:
    kind: str
    start_line: int
    end_line: int
    inlines: list[Inline] = field(default_factory=list)
    level: int = 0  # heading level
    anchor: str = ""  # heading anchor id
    language: str = ""  # fenced_code info string (first word)
    text: str = ""  # fenced_code body / raw html
    ordered: bool = False
    start: int = 1  # first number of an ordered list
    items: list[list[BlockNode]] = field(default_factory=list)  # list items
    children: list[BlockNode] = field(default_factory=list)  # blockquote body
    quiz_id: str | None = None  # html_passthrough that references a quiz


@dataclass(frozen=True)
class Heading:
    level: int
    text: str
    anchor_id: str
    line: int


@dataclass(frozen=True)
class LinkRef:
    target: str
    line: int
    column: int


@dataclass(frozen=True)
class ImageRef:
    target: str
    alt_text: str
    line: int
    column: int = 0


@dataclass(frozen=True)
class SlideEmbed:
    deck_id: str
    slide_id: str
    alt_text: str
    line: int
    column: int = 0


@dataclass(frozen=True)
class QuizRef:
    quiz_id: str
    line: int


@dataclass(frozen=True)
class ResolverFailure:
    deck_id: str
    slide_id: str
    line: int
    reason: str


@dataclass
class ChapterDoc:
    source_path: str
    title: str
    blocks: list[BlockNode]
    headings: list[Heading] = field(default_factory=list)
    links: list[LinkRef] = field(default_factory=list)
    images: list[ImageRef] = field(default_factory=list)
    slide_embeds: list[SlideEmbed] = field(default_factory=list)
    quiz_refs: list[QuizRef] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    resolver_failures: list[ResolverFailure] = field(default_factory=list)
    line_count: int = 0

    @property
    def name(self) -> str:
        base = self.source_path.replace("\\", "/").rsplit("/", 1)[-1]
        return base.rsplit(".", 1)[0] if "." in base else base


def walk_inlines(inlines):
    """Yield every inline node depth-first, parents before children."""
    for node in inlines:
        yield node
        if node.children:
            yield from walk_inlines(node.children)


def walk_blocks(blocks):
    """Yield every block depth-first, including list items and quote bodies."""
    for b in blocks:
        yield b
        for item in b.items:
            yield from walk_blocks(item)
        if b.children:
            yield from walk_blocks(b.children)


def plain_text(inlines) -> str:
    out = []
    for node in inlines:
        if node.kind in ("text", "code"):
            out.append(node.text)
        elif node.kind in ("softbreak", "hardbreak"):
            out.append(" ")
        elif node.kind == "image":
            out.append(node.text)
        elif node.kind == "link" and node.bare:
            out.append(node.target)
        elif node.children:
            out.append(plain_text(node.children))
    return "".join(out)
