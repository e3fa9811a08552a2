"""Prose spell check against a bundled base list plus the course word list."""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator

from ..errors import MissingWordlist
from ..markdown import ChapterDoc, Inline, walk_blocks
from .findings import CheckFinding

TOKEN = re.compile(r"[^\W\d_]+(?:['’-][^\W\d_]+)*")
# URL- and address-like runs inside plain text that never became links
_NOT_PROSE = re.compile(r"(?:https?://|ftp://|www\.)\S+|\S+@\S+\.\S+|\b[\w-]+(?:\.[\w-]+)+/\S*")

_PROSE_BLOCKS = ("heading", "paragraph", "image")


def parse_wordlist(text: str) -> set[str]:
    words = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            words.add(line.lower().replace("’", "'"))
    return words


def load_wordlist(path: str | Path) -> set[str]:
    path = Path(path)
    if not path.is_file():
        raise MissingWordlist(path)
    return parse_wordlist(path.read_text(encoding="utf-8"))


@lru_cache(maxsize=1)
def base_dictionary() -> frozenset[str]:
    text = resources.files("ottr.checks").joinpath("data/words.txt").read_text(encoding="utf-8")
    return frozenset(parse_wordlist(text))


def known(token: str, words) -> bool:
    """Dictionary lookup; hyphenated compounds and possessives fall back to their parts."""
    t = token.lower().replace("’", "'")
    if t in words:
        return True
    if t.endswith("'s") and t[:-2] in words:
        return True
    if "-" in t:
        return all(known(part, words) for part in t.split("-"))
    return False


def _prose_nodes(inlines: list[Inline]) -> Iterator[tuple[str, int, int]]:
    for n in inlines:
        if n.kind == "text":
            yield n.text, n.line, n.column
        elif n.kind == "image":
            if n.text:
                yield n.text, n.line, n.column + 2
        elif n.kind == "link":
            if not n.bare:
                yield from _prose_nodes(n.children)
        elif n.kind in ("emph", "strong"):
            yield from _prose_nodes(n.children)
        # code spans and inline html are not prose


def prose_tokens(doc: ChapterDoc) -> Iterator[tuple[str, int, int]]:
    """Yield (token, line, column) for every checkable word in a chapter."""
    for block in walk_blocks(doc.blocks):
        if block.kind not in _PROSE_BLOCKS:
            continue
        for text, line, col in _prose_nodes(block.inlines):
            masked = _NOT_PROSE.sub(lambda m: " " * len(m.group(0)), text)
            for m in TOKEN.finditer(masked):
                yield m.group(0), line, col + m.start()


def spell_check(docs: Iterable[ChapterDoc], dictionary, project_wordlist=frozenset()) -> list[CheckFinding]:
    words = _Union(dictionary, project_wordlist)
    findings = []
    for doc in docs:
        for token, line, _col in prose_tokens(doc):
            if not known(token, words):
                findings.append(CheckFinding("spelling", "warning", doc.source_path, line, f"unknown word '{token}'"))
    return findings


class _Union:
    """Membership over two sets without copying the large base list."""

    def __init__(self, a, b):
        self.a, self.b = a, b

    def __contains__(self, item) -> bool:
        return item in self.a or item in self.b
