"""End-to-end build: manifest, chapters, checks, then every enabled target."""

from __future__ import annotations

import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from ..checks import CheckReport, ProbePolicy, UrlProber, render_report, run_checks
from ..course import Course, load_course
from ..errors import BuildError, MissingBaseUrl, OttrError, UsageError
from ..manifest import MANIFEST_NAME, TARGETS, load_manifest
from ..markdown import SlideResolver
from .bundle import RenderPlan, TargetBundle
from .coursera import render_coursera
from .leanpub import render_leanpub
from .site import render_site

log = logging.getLogger(__name__)

EPOCH_ENV = "OTTR_BUILD_EPOCH"
OUTPUT_DIR = "_output"
REPORT_DIR = "reports"

RENDERERS = {"site": render_site, "leanpub": render_leanpub, "coursera": render_coursera}


@dataclass
class BuildResult:
    report: CheckReport
    bundles: dict[str, TargetBundle] = field(default_factory=dict)
    written: dict[str, Path] = field(default_factory=dict)
    timestamp: int = 0


def resolve_timestamp(explicit: int | None, course: Course | None = None) -> int | None:
    """Explicit value, else ``OTTR_BUILD_EPOCH``, else latest content mtime (None if unknown)."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get(EPOCH_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{EPOCH_ENV} must be integer epoch seconds, got {env!r}") from None
    if course is not None:
        files = course.content_files()
        if files:
            return int(max(f.stat().st_mtime for f in files))
    return None


def make_plan(course_root: str | Path, target: str = "all", out: str | Path | None = None,
              timestamp: int | None = None, force: bool = False, base_url: str | None = None) -> RenderPlan:
    root = Path(course_root)
    try:
        manifest = load_manifest(root / MANIFEST_NAME)
    except FileNotFoundError:
        raise BuildError("manifest", UsageError(f"no {MANIFEST_NAME} in {root}")) from None
    except OttrError as exc:
        raise BuildError("manifest", exc) from exc
    if target == "all":
        targets = manifest.targets
    elif target in TARGETS:
        if target not in manifest.targets:
            raise UsageError(f"target {target!r} is disabled in the manifest 'targets' list")
        targets = (target,)
    else:
        raise UsageError(f"unknown target {target!r}; expected one of site, leanpub, coursera, all")
    return RenderPlan(targets, Path(out) if out is not None else root / OUTPUT_DIR, timestamp, base_url, force)


def write_reports(report: CheckReport, root: Path) -> tuple[Path, Path]:
    dest = root / REPORT_DIR
    dest.mkdir(parents=True, exist_ok=True)
    md, js = dest / "check_report.md", dest / "check_report.json"
    md.write_text(render_report(report), encoding="utf-8")
    js.write_text(report.to_json(), encoding="utf-8")
    return md, js


def build(
    course_root: str | Path,
    plan: RenderPlan,
    *,
    prober: UrlProber | None = None,
    resolver: SlideResolver | None = None,
    policy: ProbePolicy = ProbePolicy(),
    write: bool = True,
) -> BuildResult:
    """Run the full pipeline.

    Nothing is rendered when the check report fails, unless ``plan.force``.
    Each target directory under ``plan.output_root`` is replaced atomically.
    """
    root = Path(course_root)
    course = load_course(root, resolver=resolver)
    manifest = course.manifest
    extra = [t for t in plan.targets if t not in manifest.targets]
    if extra:
        raise BuildError("plan", UsageError(f"targets {extra} are not enabled in the manifest"))
    if "coursera" in plan.targets and not (plan.base_url or manifest.base_url):
        raise BuildError("plan", MissingBaseUrl())

    fixed = resolve_timestamp(plan.fixed_timestamp)
    timestamp = fixed if fixed is not None else (resolve_timestamp(None, course) or 0)
    clock = (lambda: float(fixed)) if fixed is not None else time.time
    try:
        report = run_checks(course, manifest, prober, policy=policy, clock=clock)
    except OttrError as exc:
        raise BuildError("checks", exc) from exc
    if write:
        write_reports(report, root)
        if course.lockfile is not None and course.lockfile.dirty:
            course.lockfile.save()
    result = BuildResult(report, timestamp=timestamp)
    if report.status == "fail" and not plan.force:
        log.warning("checks failed; no bundles written (use --force to render anyway)")
        return result

    def render(target: str) -> TargetBundle:
        try:
            return RENDERERS[target](course, plan, timestamp)
        except (OttrError, OSError) as exc:
            raise BuildError(f"render:{target}", exc) from exc

    ordered = [t for t in TARGETS if t in plan.targets]
    with ThreadPoolExecutor(max_workers=len(ordered) or 1) as pool:
        bundles = list(pool.map(render, ordered))
    result.bundles = {b.target: b for b in bundles}
    if write:
        for b in bundles:
            try:
                result.written[b.target] = b.write(plan.output_root / b.target, mtime=timestamp)
            except OSError as exc:
                raise BuildError(f"write:{b.target}", exc) from exc
    return result
