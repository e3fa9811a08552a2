from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable

from ..course import Course
from ..manifest import CHECKS, CourseManifest
from ..markdown import ChapterDoc
from ..quiz import QuizContext, validate_quiz
from .findings import CheckFinding, CheckReport
from .spelling import base_dictionary, load_wordlist, spell_check
from .urls import ProbePolicy, UrlProber, url_check


def alt_text_check(docs: Iterable[ChapterDoc]) -> list[CheckFinding]:
    findings = []
    for doc in docs:
        for img in doc.images:
            if not img.alt_text.strip():
                findings.append(CheckFinding("alt_text", "warning", doc.source_path, img.line,
                                             f"image '{img.target}' has no alternative text"))
        for embed in doc.slide_embeds:
            if not embed.alt_text.strip():
                findings.append(CheckFinding("alt_text", "warning", doc.source_path, embed.line,
                                             f"slide {embed.deck_id}/{embed.slide_id} has no alternative text"))
    return findings


def quiz_check(course: Course) -> list[CheckFinding]:
    findings = [
        CheckFinding("quizzes", d.severity, d.path, d.line, f"{d.code}: {d.message}")
        for d in course.quiz_diagnostics
    ]
    referenced = {ref.quiz_id for doc in course.docs for ref in doc.quiz_refs}
    context = QuizContext(course.quizzes, referenced)
    for q in course.quizzes:
        for d in validate_quiz(q, context):
            findings.append(CheckFinding("quizzes", d.severity, d.path, d.line, f"{d.code}: {d.message}"))
    known = {q.id for q in course.quizzes}
    for doc in course.docs:
        for ref in doc.quiz_refs:
            if ref.quiz_id not in known:
                findings.append(CheckFinding("quizzes", "error", doc.source_path, ref.line,
                                             f"MissingQuiz: no quiz with id {ref.quiz_id!r}"))
    return findings


def run_checks(
    course: Course,
    manifest: CourseManifest | None = None,
    prober: UrlProber | None = None,
    *,
    only: Iterable[str] | None = None,
    policy: ProbePolicy = ProbePolicy(),
    clock: Callable[[], float] = time.time,
) -> CheckReport:
    """Run the enabled checks; the findings order depends only on their content."""
    manifest = manifest or course.manifest
    enabled = set(manifest.checks.enabled())
    if only is not None:
        enabled &= set(only)
    docs = course.docs
    jobs: dict[str, Callable[[], list[CheckFinding]]] = {
        "spelling": lambda: spell_check(docs, base_dictionary(), load_wordlist(course.root / manifest.wordlist)),
        "urls": lambda: url_check(docs, manifest.url_exclusions, prober, root=course.root, policy=policy),
        "quizzes": lambda: quiz_check(course),
        "alt_text": lambda: alt_text_check(docs),
    }
    run = tuple(c for c in CHECKS if c in enabled)
    started = clock()
    with ThreadPoolExecutor(max_workers=len(run) or 1) as pool:
        results = list(pool.map(lambda c: jobs[c](), run))
    findings = sorted((f for group in results for f in group), key=CheckFinding.sort_key)
    return CheckReport(findings, started, clock(), run)
