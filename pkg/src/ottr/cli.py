"""``ottr`` command line: new, build, check, quiz, sync.

Exit codes: 0 success, 1 check failures, 2 usage or configuration error,
3 I/O or network error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .checks import CheckReport, FixtureUrlProber, ProbePolicy, run_checks
from .course import load_course
from .errors import EXIT_CHECKS, EXIT_IO, EXIT_OK, EXIT_USAGE, OttrError, UsageError
from .manifest import CHECKS, MANIFEST_NAME, TARGETS, load_manifest
from .publish import build, make_plan, write_reports
from .quiz import convert_to_coursera, has_errors, parse_quiz
from .scaffold import scaffold_course
from .sync import PatchSet, apply_patchset, compute_patchset

log = logging.getLogger("ottr")


def _course_root(config: str | None) -> Path:
    path = Path(config) if config else Path(MANIFEST_NAME)
    if path.is_dir():
        path = path / MANIFEST_NAME
    if not path.is_file():
        raise UsageError(f"manifest not found: {path}")
    for warning in load_manifest(path).warnings:
        log.warning("%s: %s", path, warning)
    return path.parent


def _policy(args) -> ProbePolicy:
    return ProbePolicy(timeout=args.url_timeout, retries=args.url_retries, parallelism=args.url_parallel)


def _prober(args):
    if not args.url_fixture:
        return None
    try:
        statuses = json.loads(Path(args.url_fixture).read_text(encoding="utf-8"))
    except ValueError as exc:
        raise UsageError(f"--url-fixture is not valid JSON: {exc}") from exc
    return FixtureUrlProber({u: ConnectionError(s) if isinstance(s, str) else int(s) for u, s in statuses.items()}, 200)


def _summary(report: CheckReport) -> str:
    counts = report.counts()
    rows = [f"{'check':<10} {'errors':>6} {'warnings':>8}  status"]
    for c in CHECKS:
        if c not in report.checks_run:
            status = "SKIPPED"
        else:
            status = "FAIL" if counts[c]["errors"] else "PASS"
        rows.append(f"{c:<10} {counts[c]['errors']:>6} {counts[c]['warnings']:>8}  {status}")
    rows.append(f"overall: {report.status.upper()}")
    return "\n".join(rows)


def _log_findings(report: CheckReport) -> None:
    for f in report.findings:
        log.log(logging.ERROR if f.severity == "error" else logging.WARNING,
                "%s:%d: [%s] %s", f.path, f.line, f.check, f.detail)


def cmd_new(args) -> int:
    title = args.title or Path(args.dest).resolve().name
    for path in scaffold_course(args.dest, title):
        print(path)
    return EXIT_OK


def cmd_build(args) -> int:
    root = _course_root(args.config)
    plan = make_plan(root, args.target, args.out, args.timestamp, args.force)
    result = build(root, plan, prober=_prober(args), policy=_policy(args))
    _log_findings(result.report)
    print(_summary(result.report))
    for target, path in result.written.items():
        print(f"{target}: {path}")
    if not result.written:
        log.error("no bundles written")
    return EXIT_CHECKS if result.report.status == "fail" else EXIT_OK


def cmd_check(args) -> int:
    only = None
    if args.only:
        only = [c.strip() for c in args.only.split(",") if c.strip()]
        unknown = [c for c in only if c not in CHECKS]
        if unknown:
            raise UsageError(f"unknown check(s) {', '.join(unknown)}; expected any of {', '.join(CHECKS)}")
    root = _course_root(args.config)
    course = load_course(root)
    report = run_checks(course, prober=_prober(args), only=only, policy=_policy(args))
    write_reports(report, root)
    _log_findings(report)
    print(_summary(report))
    return EXIT_CHECKS if report.status == "fail" else EXIT_OK


def _read_quiz(path: str):
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        log.error("cannot read %s: %s", path, exc.strerror or exc)
        return None
    return parse_quiz(raw, path)


def cmd_quiz(args) -> int:
    parsed = _read_quiz(args.input)
    if parsed is None:
        return EXIT_IO
    quiz, diagnostics = parsed
    if args.quiz_command == "lint":
        for d in diagnostics:
            print(d)
        return EXIT_CHECKS if has_errors(diagnostics) else EXIT_OK
    for d in diagnostics:
        log.log(logging.ERROR if d.severity == "error" else logging.WARNING, "%s", d)
    if has_errors(diagnostics):
        return EXIT_CHECKS
    sys.stdout.write(json.dumps(convert_to_coursera(quiz), indent=2, ensure_ascii=False) + "\n")
    return EXIT_OK


def cmd_sync(args) -> int:
    root = _course_root(args.config)
    if args.patch:
        patch = PatchSet.from_json(Path(args.patch).read_text(encoding="utf-8"))
    else:
        upstream = args.upstream
        if upstream is None:
            manifest = load_manifest(root / MANIFEST_NAME)
            upstream = manifest.sync.upstream if manifest.sync else None
            if upstream is None:
                raise UsageError("no upstream: pass --upstream or set 'sync.upstream' in the manifest")
            if "://" not in upstream and not Path(upstream).is_absolute():
                upstream = str(root / upstream)
        patch = compute_patchset(upstream, root)
    if args.write_patch:
        js, df = patch.write(args.write_patch)
        log.info("wrote %s and %s", js, df)
    report = apply_patchset(patch, root, "apply" if args.apply else "dry_run")
    if not report.changes:
        print("0 changes")
        return EXIT_OK
    for path, action in report.changes:
        print(f"{action:<7} {path}")
    if args.apply:
        print(f"{report.written} files written; upstream recorded as {patch.upstream_ref}")
    else:
        print(f"{len(report.changes)} changes (dry run, nothing written)")
    return EXIT_OK


def _add_url_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--url-timeout", type=float, default=10.0, help="seconds per URL probe (default 10)")
    p.add_argument("--url-retries", type=int, default=1, help="extra attempts for a failing URL (default 1)")
    p.add_argument("--url-parallel", type=int, default=8, help="concurrent URL probes (default 8)")
    p.add_argument("--url-fixture", metavar="JSON",
                   help="probe URLs offline from a JSON map of url to status code (unlisted URLs pass)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ottr", description="Build, check and sync plain-text courses.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("new", help="create a starter course")
    p.add_argument("dest")
    p.add_argument("--title", help="course title (default: the destination folder name)")
    p.set_defaults(func=cmd_new)

    p = sub.add_parser("build", help="check the course and render its targets")
    p.add_argument("--config", help=f"path to {MANIFEST_NAME} or its folder (default: ./{MANIFEST_NAME})")
    p.add_argument("--target", default="all", choices=(*TARGETS, "all"))
    p.add_argument("--out", help="output folder (default: <course>/_output)")
    p.add_argument("--force", action="store_true", help="render even when checks fail")
    p.add_argument("--timestamp", type=int, help="fixed build time in epoch seconds (env OTTR_BUILD_EPOCH)")
    _add_url_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("check", help="run the checks and write reports/")
    p.add_argument("--config")
    p.add_argument("--only", help="comma-separated subset of: " + ",".join(CHECKS))
    _add_url_flags(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("quiz", help="lint or convert a single quiz file")
    qsub = p.add_subparsers(dest="quiz_command", required=True)
    q = qsub.add_parser("convert", help="print the quiz-bank entry as JSON")
    q.add_argument("input")
    q.add_argument("--to", choices=("coursera",), default="coursera")
    q.set_defaults(func=cmd_quiz)
    q = qsub.add_parser("lint", help="print diagnostics as path:line lines")
    q.add_argument("input")
    q.set_defaults(func=cmd_quiz)

    p = sub.add_parser("sync", help="bring template files up to date from the upstream")
    p.add_argument("--config")
    p.add_argument("--upstream", help="template folder or archive URL (default: sync.upstream)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--dry-run", action="store_true", help="list changes without writing (default)")
    mode.add_argument("--apply", action="store_true", help="write all changes atomically")
    p.add_argument("--patch", metavar="FILE", help="use a saved patchset.json instead of computing one")
    p.add_argument("--write-patch", metavar="DIR", help="save patchset.json and patchset.diff to DIR")
    p.set_defaults(func=cmd_sync)
    return parser


def _configure_logging(verbose: bool) -> None:
    # a fresh handler per call so the current sys.stderr is used
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("ottr: %(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    log.propagate = False


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except OttrError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
