"""Loading and validation of the ``_ottr.yml`` course manifest."""

from __future__ import annotations

import fnmatch
import posixpath
import re
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ManifestError

MANIFEST_NAME = "_ottr.yml"
LOCKFILE_NAME = "_ottr.lock"

TARGETS = ("site", "leanpub", "coursera")
CHECKS = ("spelling", "urls", "quizzes", "alt_text")

_TOP_KEYS = {
    "title", "targets", "chapters", "checks", "quiz_dir", "wordlist", "url_exclusions",
    "feedback_url", "base_url", "credits", "sync",
}


@dataclass(frozen=True)
class ChapterEntry:
    source: str | None = None
    borrow_origin: str | None = None
    borrow_file: str | None = None
    title_override: str | None = None

    @property
    def is_borrowed(self) -> bool:
        return self.borrow_origin is not None

    @property
    def path(self) -> str:
        return self.borrow_file if self.is_borrowed else self.source

    @property
    def output_name(self) -> str:
        return posixpath.splitext(posixpath.basename(self.path))[0]


@dataclass(frozen=True)
class Contributor:
    name: str
    roles: tuple[str, ...]


@dataclass(frozen=True)
class CheckToggles:
    spelling: bool = True
    urls: bool = True
    quizzes: bool = True
    alt_text: bool = True

    def enabled(self) -> tuple[str, ...]:
        return tuple(c for c in CHECKS if getattr(self, c))


@dataclass(frozen=True)
class SyncConfig:
    upstream: str | None = None
    exclusions: tuple[str, ...] = ()
    opt_in: bool = False
    # Globs naming the files a template owns; empty means "everything but course content".
    template_files: tuple[str, ...] = ()


@dataclass(frozen=True)
class CourseManifest:
    title: str
    chapters: tuple[ChapterEntry, ...]
    targets: tuple[str, ...] = TARGETS
    checks: CheckToggles = field(default_factory=CheckToggles)
    quiz_dir: str = "quizzes"
    wordlist: str = "dictionary.txt"
    url_exclusions: tuple[str, ...] = ()
    feedback_url: str | None = None
    credits: tuple[Contributor, ...] = ()
    sync: SyncConfig | None = None
    base_url: str | None = None
    warnings: tuple[str, ...] = field(default=(), compare=False)


class _Located:
    """Line lookup over a composed YAML node tree."""

    def __init__(self, node):
        self.node = node

    @property
    def line(self) -> int | None:
        return self.node.start_mark.line + 1 if self.node is not None else None

    def child(self, key):
        node = self.node
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                if k.value == key:
                    return _Located(v)
        elif isinstance(node, yaml.SequenceNode) and isinstance(key, int) and key < len(node.value):
            return _Located(node.value[key])
        return _Located(None) if node is None else _Located(node)

    def key_line(self, key) -> int | None:
        if isinstance(self.node, yaml.MappingNode):
            for k, _ in self.node.value:
                if k.value == key:
                    return k.start_mark.line + 1
        return self.line


def _check_glob(pattern, key: str, line: int | None) -> str:
    if not isinstance(pattern, str) or not pattern.strip():
        raise ManifestError("BadGlob", key, line, f"not a usable glob pattern: {pattern!r}")
    # fnmatch treats these leniently; in a manifest they are almost always typos
    i = 0
    while i < len(pattern):
        if pattern[i] == "[":
            j = i + 1
            if j < len(pattern) and pattern[j] == "!":
                j += 1
            if j < len(pattern) and pattern[j] == "]":
                j += 1
            close = pattern.find("]", j)
            if close < 0:
                raise ManifestError("BadGlob", key, line, f"{pattern!r}: unterminated '[' character class")
            i = close
        i += 1
    if "(?!)" in fnmatch.translate(pattern):
        raise ManifestError("BadGlob", key, line, f"{pattern!r}: character range can never match")
    return pattern


def check_relative(path, key: str, line: int | None) -> str:
    """Reject paths that are absolute or climb out of their root."""
    if not isinstance(path, str) or not path:
        raise ManifestError("InvalidValue", key, line, "expected a relative path")
    norm = posixpath.normpath(path.replace("\\", "/"))
    if posixpath.isabs(norm) or re.match(r"^[A-Za-z]:", norm) or norm == ".." or norm.startswith("../"):
        raise ManifestError("PathEscape", key, line, f"{path!r} resolves outside the course root")
    return norm


def _expect(value, kind, key: str, line: int | None, what: str):
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ManifestError("InvalidValue", key, line, f"expected {what}, got {type(value).__name__}")
    return value


def _text(value, key, line, required=False):
    if value is None:
        if required:
            raise ManifestError("MissingField", key, line, "required")
        return None
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = str(value)
    value = _expect(value, str, key, line, "text")
    if required and not value.strip():
        raise ManifestError("MissingField", key, line, "must not be empty")
    return value


def _bool(value, key, line, default):
    if value is None:
        return default
    return _expect(value, bool, key, line, "true or false")


def _parse_chapters(raw, loc: _Located) -> tuple[ChapterEntry, ...]:
    if raw is None:
        raise ManifestError("MissingField", "chapters", loc.line, "at least one chapter is required")
    _expect(raw, list, "chapters", loc.line, "a list")
    if not raw:
        raise ManifestError("MissingField", "chapters", loc.line, "at least one chapter is required")
    entries = []
    seen: dict[str, str] = {}
    for i, item in enumerate(raw):
        iloc = loc.child(i)
        key = f"chapters[{i}]"
        if isinstance(item, str):
            item = {"source": item}
        _expect(item, dict, key, iloc.line, "a mapping with 'source' or 'borrow'")
        has_source, has_borrow = "source" in item, "borrow" in item
        if has_source == has_borrow:
            raise ManifestError("InvalidValue", key, iloc.line, "exactly one of 'source' or 'borrow' is required")
        title = _text(item.get("title"), f"{key}.title", iloc.child("title").line)
        if has_source:
            src = check_relative(item["source"], f"{key}.source", iloc.child("source").line)
            entry = ChapterEntry(source=src, title_override=title)
        else:
            bloc = iloc.child("borrow")
            borrow = _expect(item["borrow"], dict, f"{key}.borrow", bloc.line, "a mapping")
            origin = _text(borrow.get("origin"), f"{key}.borrow.origin", bloc.line, required=True)
            bfile = _text(borrow.get("file"), f"{key}.borrow.file", bloc.line, required=True)
            bfile = check_relative(bfile, f"{key}.borrow.file", bloc.child("file").line)
            entry = ChapterEntry(borrow_origin=origin, borrow_file=bfile, title_override=title)
        name = entry.output_name
        if name in seen:
            raise ManifestError(
                "DuplicateChapter", key, iloc.line,
                f"{entry.path!r} duplicates output name {name!r} of {seen[name]!r}",
            )
        seen[name] = entry.path
        entries.append(entry)
    return tuple(entries)


def _parse_targets(raw, loc: _Located, warnings: list) -> tuple[str, ...]:
    if raw is None:
        return TARGETS
    if isinstance(raw, str):
        raw = [raw]
    _expect(raw, list, "targets", loc.line, "a list")
    if not raw:
        raise ManifestError("EmptyTargets", "targets", loc.line, "at least one target is required")
    chosen = set()
    for i, t in enumerate(raw):
        if t not in TARGETS:
            raise ManifestError("InvalidValue", "targets", loc.child(i).line, f"unknown target {t!r}")
        if t in chosen:
            warnings.append(f"targets: {t!r} listed more than once")
        chosen.add(t)
    return tuple(t for t in TARGETS if t in chosen)


def _parse_checks(raw, loc: _Located, warnings: list) -> CheckToggles:
    if raw is None:
        return CheckToggles()
    _expect(raw, dict, "checks", loc.line, "a mapping")
    for k in raw:
        if k not in CHECKS:
            warnings.append(f"line {loc.key_line(k)}: unknown check {k!r} ignored")
    return CheckToggles(**{c: _bool(raw.get(c), f"checks.{c}", loc.child(c).line, True) for c in CHECKS})


def _parse_globs(raw, key, loc: _Located) -> tuple[str, ...]:
    if raw is None:
        return ()
    if isinstance(raw, str):
        raw = [raw]
    _expect(raw, list, key, loc.line, "a list of globs")
    return tuple(_check_glob(g, key, loc.child(i).line) for i, g in enumerate(raw))


def _parse_credits(raw, loc: _Located) -> tuple[Contributor, ...]:
    if raw is None:
        return ()
    _expect(raw, list, "credits", loc.line, "a list")
    out = []
    for i, item in enumerate(raw):
        iloc = loc.child(i)
        key = f"credits[{i}]"
        _expect(item, dict, key, iloc.line, "a mapping with 'name' and 'roles'")
        name = _text(item.get("name"), f"{key}.name", iloc.line, required=True)
        roles = item.get("roles")
        if isinstance(roles, str):
            roles = [roles]
        if not roles:
            raise ManifestError("MissingField", f"{key}.roles", iloc.line, "at least one role is required")
        _expect(roles, list, f"{key}.roles", iloc.child("roles").line, "a list")
        out.append(Contributor(name, tuple(_text(r, f"{key}.roles", iloc.line, required=True) for r in roles)))
    return tuple(out)


def _parse_sync(raw, loc: _Located, warnings: list) -> SyncConfig | None:
    if raw is None:
        return None
    _expect(raw, dict, "sync", loc.line, "a mapping")
    for k in raw:
        if k not in ("upstream", "exclusions", "opt_in", "template_files"):
            warnings.append(f"line {loc.key_line(k)}: unknown key 'sync.{k}' ignored")
    return SyncConfig(
        upstream=_text(raw.get("upstream"), "sync.upstream", loc.child("upstream").line),
        exclusions=_parse_globs(raw.get("exclusions"), "sync.exclusions", loc.child("exclusions")),
        opt_in=_bool(raw.get("opt_in"), "sync.opt_in", loc.child("opt_in").line, False),
        template_files=_parse_globs(raw.get("template_files"), "sync.template_files", loc.child("template_files")),
    )


def parse_manifest(raw: str) -> CourseManifest:
    """Parse manifest text, applying defaults for absent optional keys.

    Unknown keys do not fail the parse; they are reported in
    ``CourseManifest.warnings``.
    """
    loader = yaml.SafeLoader(raw)
    try:
        node = loader.get_single_node()
        data = loader.construct_document(node) if node is not None else None
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ManifestError("SyntaxError", "<document>", mark.line + 1 if mark else None, str(exc)) from None
    finally:
        loader.dispose()
    root = _Located(node)
    if data is None:
        raise ManifestError("MissingField", "title", 1, "manifest is empty")
    _expect(data, dict, "<document>", root.line, "a mapping at the top level")

    warnings: list[str] = []
    for k in data:
        if k not in _TOP_KEYS:
            warnings.append(f"line {root.key_line(k)}: unknown key {k!r} ignored")

    title = _text(data.get("title"), "title", root.key_line("title") if "title" in data else 1, required=True)
    chapters = _parse_chapters(data.get("chapters"), root.child("chapters") if "chapters" in data else _Located(node))
    return CourseManifest(
        title=title,
        chapters=chapters,
        targets=_parse_targets(data.get("targets"), root.child("targets"), warnings),
        checks=_parse_checks(data.get("checks"), root.child("checks"), warnings),
        quiz_dir=check_relative(
            _text(data.get("quiz_dir"), "quiz_dir", root.key_line("quiz_dir")) or "quizzes",
            "quiz_dir", root.key_line("quiz_dir"),
        ),
        wordlist=check_relative(
            _text(data.get("wordlist"), "wordlist", root.key_line("wordlist")) or "dictionary.txt",
            "wordlist", root.key_line("wordlist"),
        ),
        url_exclusions=_parse_globs(data.get("url_exclusions"), "url_exclusions", root.child("url_exclusions")),
        feedback_url=_text(data.get("feedback_url"), "feedback_url", root.key_line("feedback_url")),
        credits=_parse_credits(data.get("credits"), root.child("credits")),
        sync=_parse_sync(data.get("sync"), root.child("sync"), warnings),
        base_url=_text(data.get("base_url"), "base_url", root.key_line("base_url")),
        warnings=tuple(warnings),
    )


def manifest_to_dict(m: CourseManifest) -> dict:
    """Fully-defaulted plain-data form of a manifest, in schema key order."""
    chapters = []
    for c in m.chapters:
        item = {"source": c.source} if not c.is_borrowed else {"borrow": {"origin": c.borrow_origin, "file": c.borrow_file}}
        if c.title_override is not None:
            item["title"] = c.title_override
        chapters.append(item)
    out = {
        "title": m.title,
        "targets": list(m.targets),
        "chapters": chapters,
        "checks": {c: getattr(m.checks, c) for c in CHECKS},
        "quiz_dir": m.quiz_dir,
        "wordlist": m.wordlist,
        "url_exclusions": list(m.url_exclusions),
        "feedback_url": m.feedback_url,
        "base_url": m.base_url,
        "credits": [{"name": p.name, "roles": list(p.roles)} for p in m.credits],
    }
    if m.sync is not None:
        out["sync"] = {
            "upstream": m.sync.upstream,
            "exclusions": list(m.sync.exclusions),
            "opt_in": m.sync.opt_in,
            "template_files": list(m.sync.template_files),
        }
    return out


def render_manifest(m: CourseManifest) -> str:
    return yaml.safe_dump(manifest_to_dict(m), sort_keys=False, allow_unicode=True, default_flow_style=False)


def load_manifest(path: str | Path) -> CourseManifest:
    return parse_manifest(Path(path).read_text(encoding="utf-8"))
