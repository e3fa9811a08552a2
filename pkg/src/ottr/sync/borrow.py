"""Fetching chapters borrowed from another course, pinned by content hash."""

from __future__ import annotations

import posixpath
import urllib.error
import urllib.request
from pathlib import Path

from ..errors import HashMismatch, OriginUnreachable
from ..lockfile import Lockfile, sha256_hex

CACHE_DIR = ".ottr_cache"


def is_url(origin: str) -> bool:
    return origin.startswith(("http://", "https://"))


def borrowed_location(origin: str, file: str, root: Path | None = None) -> str | Path:
    if is_url(origin):
        return origin.rstrip("/") + "/" + posixpath.normpath(file)
    base = Path(origin)
    if root is not None and not base.is_absolute():
        base = root / base
    return base / file


def _read(origin: str, file: str, root: Path | None, timeout: float) -> bytes:
    loc = borrowed_location(origin, file, root)
    if isinstance(loc, str):
        try:
            with urllib.request.urlopen(loc, timeout=timeout) as resp:
                return resp.read()
        except (urllib.error.URLError, OSError) as exc:
            raise OriginUnreachable(f"cannot fetch {loc}: {exc}") from exc
    try:
        return loc.read_bytes()
    except OSError as exc:
        raise OriginUnreachable(f"cannot read {loc}: {exc.strerror or exc}") from exc


def fetch_borrowed_chapter(
    origin: str,
    file: str,
    lockfile: Lockfile,
    root: str | Path | None = None,
    *,
    timeout: float = 10.0,
    use_cache: bool = True,
) -> tuple[bytes, str]:
    """Fetch a borrowed chapter and check it against its pinned hash.

    The first fetch pins the hash in ``lockfile`` (the caller saves it). A
    cached copy under ``.ottr_cache/`` is used only when the origin is
    unreachable and the cache matches the pin.
    """
    root = Path(root) if root is not None else None
    pinned = lockfile.get(origin, file)
    cache = root / CACHE_DIR / pinned if (root is not None and pinned) else None
    try:
        data = _read(origin, file, root, timeout)
    except OriginUnreachable:
        if use_cache and cache is not None and cache.is_file():
            data = cache.read_bytes()
            if sha256_hex(data) == pinned:
                return data, pinned
        raise
    digest = sha256_hex(data)
    if pinned is None:
        lockfile.set(origin, file, digest)
    elif pinned != digest:
        raise HashMismatch(origin, file, pinned, digest)
    if use_cache and root is not None:
        target = root / CACHE_DIR / digest
        if not target.is_file():
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
    return data, digest
