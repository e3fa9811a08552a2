"""Link checking: internal targets against the course, external URLs via a prober."""

from __future__ import annotations

import fnmatch
import posixpath
import re
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Protocol

from ..markdown import ChapterDoc
from .findings import CheckFinding

_SCHEME = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:")
_CHAPTER_EXT = (".md", ".rmd", ".markdown")


class UrlProber(Protocol):
    def probe(self, url: str, timeout: float) -> int:
        """Return the HTTP status for ``url``; raise on transport failure."""


class HttpUrlProber:
    """Real network prober: HEAD first, GET when the server rejects HEAD."""

    user_agent = "ottr-link-check/0.1"

    def probe(self, url: str, timeout: float) -> int:
        status = self._request(url, "HEAD", timeout)
        if status in (403, 405, 501):
            status = self._request(url, "GET", timeout)
        return status

    def _request(self, url: str, method: str, timeout: float) -> int:
        req = urllib.request.Request(url, method=method, headers={"User-Agent": self.user_agent})
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                return resp.status
        except urllib.error.HTTPError as exc:
            return exc.code


class FixtureUrlProber:
    """Offline prober backed by a ``url -> status`` map; an Exception value is raised."""

    def __init__(self, statuses: Mapping[str, int | BaseException], default: int | None = None):
        self.statuses = dict(statuses)
        self.default = default
        self.calls: list[str] = []

    def probe(self, url: str, timeout: float) -> int:
        self.calls.append(url)
        if url in self.statuses:
            value = self.statuses[url]
        elif self.default is not None:
            value = self.default
        else:
            raise LookupError(f"no fixture for {url}")
        if isinstance(value, BaseException):
            raise value
        return value


@dataclass(frozen=True)
class ProbePolicy:
    timeout: float = 10.0
    retries: int = 1
    parallelism: int = 8


def _excluded(target: str, exclusions: Iterable[str]) -> bool:
    return any(fnmatch.fnmatchcase(target, g) for g in exclusions)


def _probe(net: UrlProber, url: str, policy: ProbePolicy) -> str | None:
    """None when the URL passes, else the finding detail."""
    detail = None
    for _ in range(policy.retries + 1):
        try:
            status = net.probe(url, policy.timeout)
        except Exception as exc:  # noqa: BLE001 - any prober failure becomes a finding
            detail = f"probe failed: {exc}"
            continue
        if 200 <= status <= 399:
            return None
        detail = str(status)
    return detail


def url_check(
    docs: Iterable[ChapterDoc],
    exclusions: Iterable[str] = (),
    net: UrlProber | None = None,
    *,
    root: str | Path | None = None,
    policy: ProbePolicy = ProbePolicy(),
) -> list[CheckFinding]:
    """Check every link in ``docs``.

    Relative ``.md``/``.html`` links must name a chapter in ``docs`` (and an
    existing heading anchor when a fragment is given); other relative files
    are checked on disk only when ``root`` is given.
    """
    docs = list(docs)
    exclusions = tuple(exclusions)
    by_path = {posixpath.normpath(d.source_path): d for d in docs}
    by_name = {d.name: d for d in docs}
    findings: list[CheckFinding] = []
    external: dict[str, list[tuple[ChapterDoc, int]]] = {}

    for doc in docs:
        anchors = {h.anchor_id for h in doc.headings}
        for link in doc.links:
            target = link.target.strip()
            if not target or _excluded(target, exclusions):
                continue
            if target.startswith("//"):
                target = "https:" + target
            if target.startswith("#"):
                if target[1:] not in anchors:
                    findings.append(CheckFinding("urls", "error", doc.source_path, link.line,
                                                 f"no heading with anchor '{target}' in this chapter"))
                continue
            if _SCHEME.match(target):
                if target.lower().startswith(("http://", "https://")):
                    external.setdefault(target, []).append((doc, link.line))
                continue
            path, _, fragment = target.partition("#")
            path = path.split("?", 1)[0]
            rel = posixpath.normpath(posixpath.join(posixpath.dirname(doc.source_path), path))
            lower = rel.lower()
            if lower.endswith(_CHAPTER_EXT) or lower.endswith(".html"):
                if lower.endswith(".html"):
                    chapter = by_name.get(posixpath.splitext(posixpath.basename(rel))[0])
                else:
                    chapter = by_path.get(rel)
                if chapter is None:
                    findings.append(CheckFinding("urls", "error", doc.source_path, link.line,
                                                 f"link target '{path}' is not a chapter of this course"))
                elif fragment and fragment not in {h.anchor_id for h in chapter.headings}:
                    findings.append(CheckFinding("urls", "error", doc.source_path, link.line,
                                                 f"no heading with anchor '#{fragment}' in {chapter.source_path}"))
            elif root is not None and not (Path(root) / rel).exists():
                findings.append(CheckFinding("urls", "error", doc.source_path, link.line,
                                             f"linked file '{path}' does not exist"))

        for failure in doc.resolver_failures:
            findings.append(CheckFinding("urls", "error", doc.source_path, failure.line,
                                         f"slide {failure.deck_id}/{failure.slide_id} could not be resolved: {failure.reason}"))

    if external:
        net = net or HttpUrlProber()
        urls = sorted(external)
        with ThreadPoolExecutor(max_workers=max(1, policy.parallelism)) as pool:
            results = dict(zip(urls, pool.map(lambda u: _probe(net, u, policy), urls)))
        for url in urls:
            detail = results[url]
            if detail is None:
                continue
            for doc, line in external[url]:
                findings.append(CheckFinding("urls", "error", doc.source_path, line, f"{detail} {url}"))
    return findings
