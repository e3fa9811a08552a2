"""Template-to-course file sync as reviewable, atomically applied patchsets."""

from __future__ import annotations

import base64
import fnmatch
import hashlib
import json
import os
import shutil
import tarfile
import tempfile
import time
import urllib.request
import zipfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..errors import ManifestError, OptInDisabled, StaleDownstream, UpstreamUnreachable
from ..lockfile import TEMPLATE_ORIGIN, UPSTREAM_ORIGIN, Lockfile, sha256_hex
from ..manifest import LOCKFILE_NAME, MANIFEST_NAME, CourseManifest, load_manifest
from .borrow import CACHE_DIR, is_url
from .diff import PatchError, apply_unified_diff, unified_diff

# never synced in either direction
RESERVED_DIRS = (".git", "_output", "reports", CACHE_DIR)
RESERVED_FILES = (MANIFEST_NAME, LOCKFILE_NAME)


@dataclass(frozen=True)
class PatchEntry:
    path: str
    action: str  # "add" | "update" | "delete"
    old_hash: str | None
    new_hash: str | None
    diff: str
    binary_content: bytes | None = None  # replacement bytes when the file is not UTF-8 text


@dataclass
class PatchSet:
    upstream: str
    upstream_hash: str
    entries: list[PatchEntry] = field(default_factory=list)
    created_at: float = 0.0

    @property
    def upstream_ref(self) -> str:
        return f"{self.upstream}@sha256:{self.upstream_hash}"

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> str:
        entries = []
        for e in self.entries:
            item = {"path": e.path, "action": e.action, "old_hash": e.old_hash, "new_hash": e.new_hash, "diff": e.diff}
            if e.binary_content is not None:
                item["content_base64"] = base64.b64encode(e.binary_content).decode("ascii")
            entries.append(item)
        doc = {
            "upstream_ref": self.upstream_ref,
            "upstream": self.upstream,
            "upstream_hash": self.upstream_hash,
            "created_at": datetime.fromtimestamp(self.created_at, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            "entries": entries,
        }
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"

    def to_diff(self) -> str:
        return "".join(e.diff for e in self.entries)

    @classmethod
    def from_json(cls, text: str) -> PatchSet:
        doc = json.loads(text)
        created = datetime.strptime(doc["created_at"], "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)
        entries = [
            PatchEntry(
                e["path"], e["action"], e["old_hash"], e["new_hash"], e["diff"],
                base64.b64decode(e["content_base64"]) if "content_base64" in e else None,
            )
            for e in doc["entries"]
        ]
        return cls(doc["upstream"], doc["upstream_hash"], entries, created.timestamp())

    def write(self, dest: str | Path) -> tuple[Path, Path]:
        dest = Path(dest)
        dest.mkdir(parents=True, exist_ok=True)
        js, df = dest / "patchset.json", dest / "patchset.diff"
        js.write_text(self.to_json(), encoding="utf-8")
        df.write_text(self.to_diff(), encoding="utf-8")
        return js, df


@dataclass
class ApplyReport:
    mode: str
    changes: list[tuple[str, str]]
    written: int = 0


def _matches(path: str, globs) -> bool:
    return any(fnmatch.fnmatchcase(path, g) for g in globs)


def _try_manifest(root: Path) -> CourseManifest | None:
    path = root / MANIFEST_NAME
    if not path.is_file():
        return None
    try:
        return load_manifest(path)
    except ManifestError:
        return None


def synced_files(root: Path, manifest: CourseManifest | None = None) -> dict[str, bytes]:
    """Files a tree contributes to sync: template-declared globs, else everything but course content."""
    globs = manifest.sync.template_files if manifest is not None and manifest.sync is not None else ()
    chapters = {c.source for c in manifest.chapters if c.source} if manifest is not None else set()
    out = {}
    for dirpath, dirnames, filenames in os.walk(root):
        rel_dir = Path(dirpath).relative_to(root).as_posix()
        if rel_dir == ".":
            dirnames[:] = [d for d in dirnames if d not in RESERVED_DIRS]
        dirnames.sort()
        for name in sorted(filenames):
            rel = name if rel_dir == "." else f"{rel_dir}/{name}"
            if rel in RESERVED_FILES or rel in chapters or name.endswith(".tmp"):
                continue
            if globs and not _matches(rel, globs):
                continue
            out[rel] = (Path(dirpath) / name).read_bytes()
    return out


def tree_hash(files: dict[str, bytes]) -> str:
    h = hashlib.sha256()
    for path in sorted(files):
        h.update(path.encode() + b"\0" + hashlib.sha256(files[path]).digest())
    return h.hexdigest()


def _decode(data: bytes | None) -> str | None:
    if data is None:
        return None
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError:
        return None


def _fetch_archive(url: str, dest: Path) -> Path:
    try:
        with urllib.request.urlopen(url, timeout=30) as resp:
            data = resp.read()
    except OSError as exc:
        raise UpstreamUnreachable(f"cannot fetch upstream {url}: {exc}") from exc
    archive = dest / "upstream.archive"
    archive.write_bytes(data)
    out = dest / "tree"
    if zipfile.is_zipfile(archive):
        with zipfile.ZipFile(archive) as zf:
            zf.extractall(out)
    elif tarfile.is_tarfile(archive):
        with tarfile.open(archive) as tf:
            tf.extractall(out, filter="data") if hasattr(tarfile, "data_filter") else tf.extractall(out)
    else:
        raise UpstreamUnreachable(f"upstream {url} is not a zip or tar archive")
    children = [p for p in out.iterdir()]
    return children[0] if len(children) == 1 and children[0].is_dir() else out


def compute_patchset(
    upstream: str | Path,
    downstream_root: str | Path,
    exclusions=None,
    *,
    clock=time.time,
) -> PatchSet:
    """Entries for every synced file that differs between upstream and downstream.

    Refuses unless the downstream manifest opts in. ``exclusions`` defaults
    to the downstream manifest's ``sync.exclusions``.
    """
    downstream_root = Path(downstream_root)
    manifest = load_manifest(downstream_root / MANIFEST_NAME)
    if manifest.sync is None or not manifest.sync.opt_in:
        raise OptInDisabled()
    if exclusions is None:
        exclusions = manifest.sync.exclusions
    location = str(upstream)
    with tempfile.TemporaryDirectory(prefix="ottr-upstream-") as tmp:
        if is_url(location):
            up_root = _fetch_archive(location, Path(tmp))
        else:
            up_root = Path(upstream)
            if not up_root.is_dir():
                raise UpstreamUnreachable(f"upstream template not found: {location}")
        up_files = synced_files(up_root, _try_manifest(up_root))

    down_chapters = {c.source for c in manifest.chapters if c.source}
    lock = Lockfile.load(downstream_root / LOCKFILE_NAME)
    entries = []
    for path, new in up_files.items():
        if path in down_chapters or _matches(path, exclusions):
            continue
        target = downstream_root / path
        old = target.read_bytes() if target.is_file() else None
        if old == new:
            continue
        entries.append(_entry(path, old, new))
    for path, owned_hash in lock.files_for(TEMPLATE_ORIGIN).items():
        if path in up_files or path in down_chapters or _matches(path, exclusions):
            continue
        target = downstream_root / path
        if target.is_file():
            old = target.read_bytes()
            if sha256_hex(old) == owned_hash:  # untouched since the template wrote it
                entries.append(_entry(path, old, None))
    entries.sort(key=lambda e: e.path)
    return PatchSet(location, tree_hash(up_files), entries, clock())


def _entry(path: str, old: bytes | None, new: bytes | None) -> PatchEntry:
    action = "add" if old is None else ("delete" if new is None else "update")
    old_text, new_text = _decode(old), _decode(new)
    binary = (old is not None and old_text is None) or (new is not None and new_text is None)
    if binary:
        diff = f"Binary files {'a/' + path if old is not None else '/dev/null'} and " \
               f"{'b/' + path if new is not None else '/dev/null'} differ\n"
        return PatchEntry(path, action, _hash(old), _hash(new), diff, new)
    return PatchEntry(path, action, _hash(old), _hash(new), unified_diff(old_text, new_text, path))


def _hash(data: bytes | None) -> str | None:
    return sha256_hex(data) if data is not None else None


def _new_content(entry: PatchEntry, current: bytes | None) -> bytes | None:
    if entry.action == "delete":
        return None
    if entry.binary_content is not None:
        data = entry.binary_content
    else:
        try:
            data = apply_unified_diff(_decode(current) or "", entry.diff).encode("utf-8")
        except PatchError as exc:
            raise StaleDownstream(entry.path, entry.old_hash, _hash(current)) from exc
    if sha256_hex(data) != entry.new_hash:
        raise StaleDownstream(entry.path, entry.new_hash, sha256_hex(data))
    return data


def apply_patchset(p: PatchSet, downstream_root: str | Path, mode: str = "apply") -> ApplyReport:
    """Dry-run or apply a patchset all-or-nothing.

    Every entry's base hash is verified before anything is written; on any
    failure while writing, files already replaced are restored.
    """
    if mode not in ("dry_run", "apply"):
        raise ValueError(f"mode must be 'dry_run' or 'apply', not {mode!r}")
    root = Path(downstream_root)
    staged: list[tuple[Path, bytes | None]] = []
    for e in p.entries:
        target = root / e.path
        current = target.read_bytes() if target.is_file() else None
        if _hash(current) != e.old_hash:
            raise StaleDownstream(e.path, e.old_hash, _hash(current))
        staged.append((target, _new_content(e, current)))
    changes = [(e.path, e.action) for e in p.entries]
    if mode == "dry_run":
        return ApplyReport(mode, changes)

    lock = Lockfile.load(root / LOCKFILE_NAME)
    for e in p.entries:
        if e.action == "delete":
            lock.remove(TEMPLATE_ORIGIN, e.path)
        else:
            lock.set(TEMPLATE_ORIGIN, e.path, e.new_hash)
    for (origin, file) in list(lock.entries):
        if origin == UPSTREAM_ORIGIN:
            lock.remove(origin, file)
    lock.set(UPSTREAM_ORIGIN, p.upstream, p.upstream_hash)
    lock_path = root / LOCKFILE_NAME
    staged.append((lock_path, lock.render().encode("utf-8")))
    _commit(staged)
    return ApplyReport(mode, changes, written=len(p.entries))


def _commit(staged: list[tuple[Path, bytes | None]]) -> None:
    backups: list[tuple[Path, bytes | None]] = []
    created_dirs: list[Path] = []
    temps: list[tuple[Path, Path]] = []
    try:
        for target, data in staged:
            if data is None:
                continue
            missing = []
            parent = target.parent
            while not parent.exists():
                missing.append(parent)
                parent = parent.parent
            target.parent.mkdir(parents=True, exist_ok=True)
            created_dirs.extend(reversed(missing))
            fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            if target.exists():
                shutil.copymode(target, tmp)
            temps.append((Path(tmp), target))
        for target, data in staged:
            backups.append((target, target.read_bytes() if target.is_file() else None))
        for tmp, target in temps:
            os.replace(tmp, target)
        for target, data in staged:
            if data is None and target.exists():
                target.unlink()
    except BaseException:
        for tmp, _ in temps:
            tmp.unlink(missing_ok=True)
        for target, data in backups:
            if data is None:
                target.unlink(missing_ok=True)
            else:
                target.write_bytes(data)
        for d in reversed(created_dirs):
            try:
                d.rmdir()
            except OSError:
                pass
        raise
