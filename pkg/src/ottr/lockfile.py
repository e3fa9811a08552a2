"""``_ottr.lock``: pinned content hashes, one ``sha256 <hex> <origin> <file>`` per line.

Origins and files are percent-encoded so they never contain spaces. Two
reserved origins record template-sync state: ``@template`` marks a file the
upstream template owns, ``@upstream`` records the last applied upstream
(its file field is the upstream location, its hash the upstream tree hash).
"""

from __future__ import annotations

import hashlib
from pathlib import Path
from urllib.parse import quote, unquote

TEMPLATE_ORIGIN = "@template"
UPSTREAM_ORIGIN = "@upstream"


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class Lockfile:
    def __init__(self, path: Path | None = None):
        self.path = path
        self.entries: dict[tuple[str, str], str] = {}
        self.dirty = False

    @classmethod
    def load(cls, path: str | Path) -> Lockfile:
        lock = cls(Path(path))
        if lock.path.is_file():
            lock.entries = parse_lockfile(lock.path.read_text(encoding="utf-8"))
        return lock

    def get(self, origin: str, file: str) -> str | None:
        return self.entries.get((origin, file))

    def set(self, origin: str, file: str, digest: str) -> None:
        if self.entries.get((origin, file)) != digest:
            self.entries[(origin, file)] = digest
            self.dirty = True

    def remove(self, origin: str, file: str) -> None:
        if self.entries.pop((origin, file), None) is not None:
            self.dirty = True

    def files_for(self, origin: str) -> dict[str, str]:
        return {f: h for (o, f), h in self.entries.items() if o == origin}

    def render(self) -> str:
        return "".join(
            f"sha256 {digest} {quote(origin, safe=':/@.-_~')} {quote(file, safe='/.-_~')}\n"
            for (origin, file), digest in sorted(self.entries.items())
        )

    def save(self) -> None:
        if self.path is None:
            raise ValueError("lockfile has no path")
        text = self.render()
        if not text and not self.path.exists():
            return
        tmp = self.path.with_name(self.path.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        tmp.replace(self.path)
        self.dirty = False


def parse_lockfile(text: str) -> dict[tuple[str, str], str]:
    entries = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4 or parts[0] != "sha256":
            raise ValueError(f"_ottr.lock line {n}: expected 'sha256 <hex> <origin> <file>'")
        entries[(unquote(parts[2]), unquote(parts[3]))] = parts[1]
    return entries
