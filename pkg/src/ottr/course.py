"""A course tree loaded into memory: manifest, parsed chapters and quizzes."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BuildError, OttrError
from .lockfile import Lockfile
from .manifest import LOCKFILE_NAME, MANIFEST_NAME, ChapterEntry, CourseManifest, load_manifest
from .markdown import ChapterDoc, GoogleSlidesResolver, SlideResolver, parse_chapter, resolve_slide_embeds
from .quiz import Quiz, QuizDiagnostic, parse_quiz
from .sync.borrow import borrowed_location, fetch_borrowed_chapter, is_url


@dataclass
class Chapter:
    entry: ChapterEntry
    doc: ChapterDoc
    # directory (or URL prefix) that relative image paths resolve against
    asset_base: Path | str

    @property
    def name(self) -> str:
        return self.entry.output_name


@dataclass
class Course:
    root: Path
    manifest: CourseManifest
    chapters: list[Chapter]
    quizzes: list[Quiz] = field(default_factory=list)
    quiz_diagnostics: list[QuizDiagnostic] = field(default_factory=list)
    lockfile: Lockfile | None = None

    @property
    def docs(self) -> list[ChapterDoc]:
        return [c.doc for c in self.chapters]

    def quiz_by_id(self) -> dict[str, Quiz]:
        out: dict[str, Quiz] = {}
        for q in self.quizzes:
            out.setdefault(q.id, q)
        return out

    def content_files(self) -> list[Path]:
        """Local files whose bytes feed a build (for the default build clock)."""
        files = [self.root / MANIFEST_NAME]
        files += [self.root / c.entry.source for c in self.chapters if not c.entry.is_borrowed]
        quiz_dir = self.root / self.manifest.quiz_dir
        if quiz_dir.is_dir():
            files += sorted(quiz_dir.glob("*.md"))
        return [f for f in files if f.is_file()]


def _load_chapter(root: Path, entry: ChapterEntry, lockfile: Lockfile, resolver: SlideResolver) -> Chapter:
    if entry.is_borrowed:
        data, _ = fetch_borrowed_chapter(entry.borrow_origin, entry.borrow_file, lockfile, root)
        loc = borrowed_location(entry.borrow_origin, entry.borrow_file, root)
        base = loc.rsplit("/", 1)[0] if isinstance(loc, str) else loc.parent
    else:
        path = root / entry.source
        data = path.read_bytes()
        base = path.parent
    doc = parse_chapter(data.decode("utf-8"), entry.path, entry.title_override)
    return Chapter(entry, resolve_slide_embeds(doc, resolver), base)


def load_quizzes(quiz_dir: Path, root: Path) -> tuple[list[Quiz], list[QuizDiagnostic]]:
    quizzes, diags = [], []
    if not quiz_dir.is_dir():
        return quizzes, diags
    for path in sorted(quiz_dir.glob("*.md")):
        rel = path.relative_to(root).as_posix()
        quiz, d = parse_quiz(path.read_text(encoding="utf-8"), rel)
        quizzes.append(quiz)
        diags.extend(d)
    return quizzes, diags


def load_course(
    root: str | Path,
    manifest: CourseManifest | None = None,
    resolver: SlideResolver | None = None,
) -> Course:
    """Parse everything a build needs; chapters are parsed concurrently."""
    root = Path(root)
    try:
        manifest = manifest or load_manifest(root / MANIFEST_NAME)
    except FileNotFoundError as exc:
        raise BuildError("manifest", OttrError(f"no {MANIFEST_NAME} in {root}")) from exc
    except OttrError as exc:
        raise BuildError("manifest", exc) from exc
    resolver = resolver or GoogleSlidesResolver()
    lockfile = Lockfile.load(root / LOCKFILE_NAME)
    workers = min(8, os.cpu_count() or 1, len(manifest.chapters)) or 1
    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chapters = list(pool.map(lambda e: _load_chapter(root, e, lockfile, resolver), manifest.chapters))
        quizzes, diags = load_quizzes(root / manifest.quiz_dir, root)
    except (OttrError, OSError, UnicodeDecodeError) as exc:
        raise BuildError("parse", exc) from exc
    return Course(root, manifest, chapters, quizzes, diags, lockfile)


__all__ = ["Chapter", "Course", "is_url", "load_course", "load_quizzes"]
