"""In-memory target bundles and the helpers every renderer shares."""

from __future__ import annotations

import hashlib
import os
import posixpath
import re
import shutil
import tempfile
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

from ..course import Chapter, Course
from ..errors import RenderError

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:|^//")
_CHAPTER_EXT = (".md", ".rmd", ".markdown")


@dataclass(frozen=True)
class RenderPlan:
    targets: tuple[str, ...]
    output_root: Path
    fixed_timestamp: int | None = None
    base_url: str | None = None
    force: bool = False


@dataclass
class TargetBundle:
    target: str
    files: dict[str, bytes] = field(default_factory=dict)
    entrypoint: str = "index.html"

    def add(self, path: str, data: bytes | str) -> None:
        if path in self.files:
            raise RenderError(f"{self.target}: duplicate output file {path}")
        self.files[path] = data.encode("utf-8") if isinstance(data, str) else data

    def tree_hash(self) -> str:
        h = hashlib.sha256()
        for path in sorted(self.files):
            h.update(path.encode() + b"\0" + hashlib.sha256(self.files[path]).digest())
        return h.hexdigest()

    def write(self, dest: Path, mtime: int | None = None) -> Path:
        """Replace ``dest`` with this bundle; a failure leaves the old tree intact."""
        if self.entrypoint not in self.files:
            raise RenderError(f"{self.target}: entrypoint {self.entrypoint} missing from bundle")
        dest.parent.mkdir(parents=True, exist_ok=True)
        tmp = Path(tempfile.mkdtemp(prefix=f".{dest.name}.tmp-", dir=dest.parent))
        try:
            for rel in sorted(self.files):
                path = tmp / rel
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_bytes(self.files[rel])
                if mtime is not None:
                    os.utime(path, (mtime, mtime))
            os.chmod(tmp, 0o755)
            old = None
            if dest.exists():
                old = dest.with_name(f".{dest.name}.old-{os.getpid()}")
                dest.rename(old)
            tmp.rename(dest)
            if old is not None:
                shutil.rmtree(old, ignore_errors=True)
        except BaseException:
            shutil.rmtree(tmp, ignore_errors=True)
            raise
        return dest


def is_external(target: str) -> bool:
    return bool(_SCHEME.match(target)) or target.startswith("#")


def chapter_link(target: str, chapter: Chapter, course: Course, make: callable) -> str:
    """Rewrite a relative link to another chapter with ``make(output_name, fragment)``."""
    if is_external(target):
        return target
    path, hash_, fragment = target.partition("#")
    rel = posixpath.normpath(posixpath.join(posixpath.dirname(chapter.entry.path), path))
    if not rel.lower().endswith(_CHAPTER_EXT):
        return target
    for other in course.chapters:
        if posixpath.normpath(other.entry.path) == rel:
            return make(other.name, fragment if hash_ else "")
    return target


class AssetCollector:
    """Copies local images into one ``resources/`` directory with stable names."""

    def __init__(self, prefix: str = "resources"):
        self.prefix = prefix
        self.files: dict[str, bytes] = {}
        self._by_source: dict[str, str] = {}

    def _load(self, chapter: Chapter, target: str, course: Course) -> tuple[str, bytes] | None:
        path = target.split("#", 1)[0].split("?", 1)[0]
        base = chapter.asset_base
        try:
            if isinstance(base, str):
                url = base.rstrip("/") + "/" + path
                with urllib.request.urlopen(url, timeout=10) as resp:
                    return url, resp.read()
            src = (base / path).resolve()
            if not src.is_file():
                src = (course.root / path).resolve()
            if not src.is_file():
                return None
            return str(src), src.read_bytes()
        except OSError:
            return None

    def rewrite(self, chapter: Chapter, target: str, course: Course) -> str:
        if is_external(target) or not target:
            return target
        loaded = self._load(chapter, target, course)
        if loaded is None:
            return target
        key, data = loaded
        if key in self._by_source:
            return self._by_source[key]
        name = posixpath.basename(target.split("#", 1)[0].split("?", 1)[0]) or "image"
        rel = f"{self.prefix}/{name}"
        if rel in self.files and self.files[rel] != data:
            stem, ext = posixpath.splitext(name)
            rel = f"{self.prefix}/{stem}-{hashlib.sha256(data).hexdigest()[:8]}{ext}"
        self.files[rel] = data
        self._by_source[key] = rel
        return rel
