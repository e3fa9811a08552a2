"""Slide-deck image embeds: ``![alt](slides://<deck_id>/<slide_id>)``.

A resolver maps (deck_id, slide_id) to an ordinary image location. Both
resolvers here are stateless and safe to call from several threads.
"""

from __future__ import annotations

import copy
import re
from pathlib import Path
from typing import Protocol
from urllib.parse import quote

from .nodes import ChapterDoc, ImageRef, ResolverFailure, walk_blocks, walk_inlines
from .parser import SLIDE_SCHEME, parse_slide_uri

_SAFE_ID = re.compile(r"^[A-Za-z0-9_-]+$")


class SlideResolver(Protocol):
    def resolve(self, deck_id: str, slide_id: str) -> str:
        """Return the image target; raise ``LookupError`` if it cannot be resolved."""


class GoogleSlidesResolver:
    """Points at the hosted PNG export of each slide; no network access needed."""

    pattern = "https://docs.google.com/presentation/d/{deck}/export/png?id={deck}&pageid={slide}"

    def resolve(self, deck_id: str, slide_id: str) -> str:
        if not (_SAFE_ID.match(deck_id) and _SAFE_ID.match(slide_id)):
            raise LookupError(f"invalid slide identifier {deck_id!r}/{slide_id!r}")
        return self.pattern.format(deck=quote(deck_id), slide=quote(slide_id))


class OfflineSlideResolver:
    """Resolves to ``<root>/<deck_id>/<slide_id>.png``.

    When ``base_dir`` is given, the image must exist under it.
    """

    def __init__(self, root: str, base_dir: str | Path | None = None, suffix: str = ".png"):
        self.root = root.rstrip("/")
        self.base_dir = Path(base_dir) if base_dir is not None else None
        self.suffix = suffix

    def resolve(self, deck_id: str, slide_id: str) -> str:
        if "/" in deck_id or "/" in slide_id or deck_id in ("", ".", "..") or slide_id in ("", ".", ".."):
            raise LookupError(f"invalid slide identifier {deck_id!r}/{slide_id!r}")
        target = f"{self.root}/{deck_id}/{slide_id}{self.suffix}"
        if self.base_dir is not None and not (self.base_dir / target).is_file():
            raise LookupError(f"no exported slide image at {target}")
        return target


def resolve_slide_embeds(doc: ChapterDoc, resolver: SlideResolver) -> ChapterDoc:
    """Rewrite slide embeds into plain images.

    Returns ``doc`` itself when it has no embeds. Embeds the resolver rejects
    stay in place and are listed in ``resolver_failures``.
    """
    if not doc.slide_embeds:
        return doc
    out = copy.deepcopy(doc)
    resolved: dict[tuple[int, int], str] = {}
    failures: list[ResolverFailure] = []
    remaining = []
    for embed in doc.slide_embeds:
        try:
            resolved[(embed.line, embed.column)] = resolver.resolve(embed.deck_id, embed.slide_id)
        except LookupError as exc:
            failures.append(ResolverFailure(embed.deck_id, embed.slide_id, embed.line, str(exc)))
            remaining.append(embed)
    for block in walk_blocks(out.blocks):
        for node in walk_inlines(block.inlines):
            if node.kind == "image" and node.target.startswith(SLIDE_SCHEME) and parse_slide_uri(node.target):
                target = resolved.get((node.line, node.column))
                if target is not None:
                    node.target = target
    images = list(doc.images)
    for embed in doc.slide_embeds:
        target = resolved.get((embed.line, embed.column))
        if target is not None:
            images.append(ImageRef(target, embed.alt_text, embed.line, embed.column))
    out.images = sorted(images, key=lambda r: (r.line, r.column))
    out.slide_embeds = remaining
    out.resolver_failures = failures
    return out
