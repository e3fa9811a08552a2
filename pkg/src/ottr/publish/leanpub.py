"""Leanpub manuscript: Markua chapter files, quiz blocks and ``Book.txt``."""

from __future__ import annotations

from ..course import Course
from ..markdown import Hooks, blocks_markua
from ..quiz import render_leanpub_quiz
from .bundle import AssetCollector, RenderPlan, TargetBundle, chapter_link

MANUSCRIPT = "manuscript"


def render_leanpub(course: Course, plan: RenderPlan, timestamp: int) -> TargetBundle:
    bundle = TargetBundle("leanpub", entrypoint=f"{MANUSCRIPT}/Book.txt")
    assets = AssetCollector("resources")
    quizzes = course.quiz_by_id()
    base_url = (plan.base_url or course.manifest.base_url or "").rstrip("/")
    feedback = course.manifest.feedback_url

    def link_for(name: str, fragment: str) -> str:
        if base_url:
            return f"{base_url}/{name}.html" + (f"#{fragment}" if fragment else "")
        return f"#{fragment}" if fragment else f"{name}.md"

    book = []
    for chapter in course.chapters:
        hooks = Hooks(
            link=lambda t, ch=chapter: chapter_link(t, ch, course, link_for),
            image=lambda t, ch=chapter: assets.rewrite(ch, t, course),
            quiz=lambda qid: render_leanpub_quiz(quizzes[qid]) if qid in quizzes else None,
        )
        text = blocks_markua(chapter.doc.blocks, hooks)
        if chapter.entry.title_override and not any(h.level == 1 for h in chapter.doc.headings):
            text = f"# {chapter.entry.title_override}\n\n{text}"
        if feedback:
            text += f"\n\n[Give feedback on this course]({feedback})"
        name = f"{chapter.name}.md"
        bundle.add(f"{MANUSCRIPT}/{name}", text.rstrip("\n") + "\n")
        book.append(name)
    bundle.add(f"{MANUSCRIPT}/Book.txt", "\n".join(book) + "\n")
    for rel, data in sorted(assets.files.items()):
        bundle.add(f"{MANUSCRIPT}/{rel}", data)
    return bundle
