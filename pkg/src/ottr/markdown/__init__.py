from .nodes import (
    BlockNode, ChapterDoc, Heading, ImageRef, Inline, LinkRef, QuizRef, ResolverFailure, SlideEmbed,
    plain_text, walk_blocks, walk_inlines,
)
from .parser import parse_chapter, parse_slide_uri, slugify
from .render import Hooks, blocks_html, blocks_markua
from .slides import GoogleSlidesResolver, OfflineSlideResolver, SlideResolver, resolve_slide_embeds

__all__ = [
    "BlockNode", "ChapterDoc", "GoogleSlidesResolver", "Heading", "Hooks", "ImageRef", "Inline", "LinkRef",
    "OfflineSlideResolver", "QuizRef", "ResolverFailure", "SlideEmbed", "SlideResolver", "blocks_html",
    "blocks_markua", "parse_chapter", "parse_slide_uri", "plain_text", "resolve_slide_embeds", "slugify",
    "walk_blocks", "walk_inlines",
]
