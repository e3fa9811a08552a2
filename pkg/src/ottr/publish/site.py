"""The HTML book site: one page per chapter plus an index page."""

from __future__ import annotations

from datetime import datetime, timezone
from html import escape

from ..course import Course
from ..markdown import Hooks, blocks_html
from ..quiz import MULTIPLE_CHOICE, Quiz
from .bundle import AssetCollector, RenderPlan, TargetBundle, chapter_link

STYLE_FILE = "style.css"

_BASE_CSS = """\
body{margin:0;font-family:system-ui,sans-serif;line-height:1.5;display:flex}
nav.sidebar{width:16rem;flex:none;padding:1rem;border-right:1px solid #ddd}
nav.sidebar li.current{font-weight:bold}
main{max-width:48rem;padding:1rem 2rem;flex:1}
nav.pager{display:flex;justify-content:space-between;margin:2rem 0}
pre{background:#f6f8fa;padding:.75rem;overflow:auto}
table.credits{border-collapse:collapse}
table.credits td,table.credits th{border:1px solid #ccc;padding:.25rem .5rem}
section.quiz{border:1px solid #ccc;padding:.5rem 1rem;margin:1rem 0}
footer{margin-top:2rem;font-size:.9em;color:#555}
"""


def build_date(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%d")


def quiz_review_html(q: Quiz) -> str:
    """Ungraded, self-check rendering of a quiz for the site."""
    parts = [f'<section class="quiz" id="quiz-{escape(q.id)}">', "<h4>Review questions</h4>", "<ol>"]
    for question in q.questions:
        parts.append(f"<li><p>{escape(question.prompt)}</p>")
        if question.kind == MULTIPLE_CHOICE:
            parts.append('<ol type="a">')
            parts += [f"<li>{escape(c.text)}</li>" for c in question.choices]
            parts.append("</ol>")
            answer = ", ".join(f"{c.label}) {c.text}" for c in question.choices if c.correct)
        else:
            answer = question.accepted_answers[0]
        parts.append(f"<details><summary>Show answer</summary><p>{escape(answer)}</p></details></li>")
    parts += ["</ol>", "</section>"]
    return "\n".join(parts)


def credits_html(course: Course) -> str:
    if not course.manifest.credits:
        return ""
    rows = "\n".join(
        f"<tr><td>{escape(p.name)}</td><td>{escape(', '.join(p.roles))}</td></tr>"
        for p in course.manifest.credits
    )
    return (
        '<section class="credits">\n<h2 id="credits">Credits</h2>\n'
        '<table class="credits">\n<thead><tr><th>Name</th><th>Roles</th></tr></thead>\n'
        f"<tbody>\n{rows}\n</tbody>\n</table>\n</section>"
    )


def _page(course: Course, title: str, current: str | None, body: str, prev, nxt, ts: int, has_style: bool) -> str:
    m = course.manifest
    current_cls = ' class="current"'
    sidebar = "\n".join(
        f'<li{current_cls if c.name == current else ""}>'
        f'<a href="{c.name}.html">{escape(c.doc.title)}</a></li>'
        for c in course.chapters
    )
    pager = []
    if prev is not None:
        pager.append(f'<a rel="prev" href="{prev[0]}">Previous: {escape(prev[1])}</a>')
    if nxt is not None:
        pager.append(f'<a rel="next" href="{nxt[0]}">Next: {escape(nxt[1])}</a>')
    feedback = (
        f'<p class="feedback"><a href="{escape(m.feedback_url)}">Give feedback on this course</a></p>\n'
        if m.feedback_url else ""
    )
    style = f'<link rel="stylesheet" href="{STYLE_FILE}">\n' if has_style else ""
    return (
        "<!DOCTYPE html>\n"
        '<html lang="en">\n<head>\n<meta charset="utf-8">\n'
        '<meta name="viewport" content="width=device-width, initial-scale=1">\n'
        f'<meta name="dcterms.modified" content="{build_date(ts)}">\n'
        f"<title>{escape(title)} | {escape(m.title)}</title>\n"
        f"<style>\n{_BASE_CSS}</style>\n{style}"
        "</head>\n<body>\n"
        f'<nav class="sidebar">\n<p class="course-title"><a href="index.html">{escape(m.title)}</a></p>\n'
        f"<ol>\n{sidebar}\n</ol>\n</nav>\n"
        f"<main>\n{body}\n"
        f'<nav class="pager">\n' + "\n".join(pager) + "\n</nav>\n"
        f"<footer>\n{feedback}<p>Last built {build_date(ts)}.</p>\n</footer>\n"
        "</main>\n</body>\n</html>\n"
    )


def render_site(course: Course, plan: RenderPlan, timestamp: int) -> TargetBundle:
    bundle = TargetBundle("site", entrypoint="index.html")
    assets = AssetCollector("resources")
    quizzes = course.quiz_by_id()
    style = course.root / STYLE_FILE
    has_style = style.is_file()
    chapters = course.chapters

    def link_for(name: str, fragment: str) -> str:
        return f"{name}.html" + (f"#{fragment}" if fragment else "")

    first = (f"{chapters[0].name}.html", chapters[0].doc.title)
    index_body = (
        f"<h1>{escape(course.manifest.title)}</h1>\n<ol class=\"toc\">\n"
        + "\n".join(f'<li><a href="{c.name}.html">{escape(c.doc.title)}</a></li>' for c in chapters)
        + f'\n</ol>\n<p><a class="start" href="{first[0]}">Start with {escape(first[1])}</a></p>'
    )
    bundle.add("index.html", _page(course, course.manifest.title, None, index_body, None, first, timestamp, has_style))

    for i, chapter in enumerate(chapters):
        hooks = Hooks(
            link=lambda t, ch=chapter: chapter_link(t, ch, course, link_for),
            image=lambda t, ch=chapter: assets.rewrite(ch, t, course),
            quiz=lambda qid: quiz_review_html(quizzes[qid]) if qid in quizzes else None,
        )
        body = blocks_html(chapter.doc.blocks, hooks)
        if chapter.entry.title_override and not any(h.level == 1 for h in chapter.doc.headings):
            body = f"<h1>{escape(chapter.entry.title_override)}</h1>\n{body}"
        if i == len(chapters) - 1:
            credits = credits_html(course)
            if credits:
                body += "\n" + credits
        prev = (f"{chapters[i - 1].name}.html", chapters[i - 1].doc.title) if i > 0 else ("index.html", "Contents")
        nxt = (f"{chapters[i + 1].name}.html", chapters[i + 1].doc.title) if i + 1 < len(chapters) else None
        bundle.add(f"{chapter.name}.html", _page(course, chapter.doc.title, chapter.name, body, prev, nxt, timestamp, has_style))

    for rel, data in sorted(assets.files.items()):
        bundle.add(rel, data)
    if has_style:
        bundle.add(STYLE_FILE, style.read_bytes())
    return bundle
