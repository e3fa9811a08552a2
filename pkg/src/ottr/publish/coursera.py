"""Coursera bundle: one iframe embed page per chapter plus the quiz bank."""

from __future__ import annotations

from html import escape

from ..course import Course
from ..errors import MissingBaseUrl
from ..markdown import Hooks, blocks_html
from ..quiz import quiz_bank_json
from .bundle import AssetCollector, RenderPlan, TargetBundle, chapter_link

QUIZ_BANK = "quiz_bank.json"

_EMBED_CSS = "html,body{margin:0;height:100%}iframe{display:block;border:0;width:100%;height:100vh}"


def embed_url(base_url: str, chapter_name: str) -> str:
    return f"{base_url.rstrip('/')}/{chapter_name}.html"


def render_coursera(course: Course, plan: RenderPlan, timestamp: int) -> TargetBundle:
    base_url = plan.base_url or course.manifest.base_url
    if not base_url:
        raise MissingBaseUrl()
    base_url = base_url.rstrip("/")
    bundle = TargetBundle("coursera", entrypoint="index.html")
    # only used to reproduce the site's resource names in fallback content
    assets = AssetCollector("resources")
    feedback = course.manifest.feedback_url
    index = []

    def link_for(name: str, fragment: str) -> str:
        return embed_url(base_url, name) + (f"#{fragment}" if fragment else "")

    for chapter in course.chapters:
        src = embed_url(base_url, chapter.name)
        hooks = Hooks(
            link=lambda t, ch=chapter: chapter_link(t, ch, course, link_for),
            image=lambda t, ch=chapter: _absolute(base_url, assets.rewrite(ch, t, course)),
        )
        # iframe children are shown only by agents without frame support
        fallback = blocks_html(chapter.doc.blocks, hooks)
        footer = (
            f'\n<p class="feedback"><a href="{escape(feedback)}" target="_blank">Give feedback on this course</a></p>'
            if feedback else ""
        )
        page = (
            "<!DOCTYPE html>\n"
            '<html lang="en">\n<head>\n<meta charset="utf-8">\n'
            f"<title>{escape(chapter.doc.title)}</title>\n"
            f"<style>{_EMBED_CSS}</style>\n"
            "</head>\n<body>\n"
            f'<iframe src="{escape(src)}" title="{escape(chapter.doc.title)}" loading="lazy">\n'
            f"{fallback}\n</iframe>{footer}\n"
            "</body>\n</html>\n"
        )
        bundle.add(f"{chapter.name}.html", page)
        index.append(f'<li><a href="{chapter.name}.html">{escape(chapter.doc.title)}</a></li>')

    bundle.add("index.html", (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n<head>\n<meta charset="utf-8">\n'
        f"<title>{escape(course.manifest.title)}: embed pages</title>\n"
        "</head>\n<body>\n"
        f"<h1>{escape(course.manifest.title)}</h1>\n<ol>\n" + "\n".join(index) + "\n</ol>\n"
        "</body>\n</html>\n"
    ))
    bundle.add(QUIZ_BANK, quiz_bank_json(course.quizzes))
    return bundle


def _absolute(base_url: str, target: str) -> str:
    if target.startswith("resources/"):
        return f"{base_url}/{target}"
    return target
