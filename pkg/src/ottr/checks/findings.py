from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone

from ..manifest import CHECKS


@dataclass(frozen=True)
class CheckFinding:
    check: str
    severity: str  # "error" | "warning"
    path: str
    line: int
    detail: str

    def sort_key(self):
        return (CHECKS.index(self.check), self.path, self.line, self.severity, self.detail)


@dataclass
class CheckReport:
    findings: list[CheckFinding] = field(default_factory=list)
    started: float = 0.0
    finished: float = 0.0
    checks_run: tuple[str, ...] = CHECKS

    def counts(self) -> dict[str, dict[str, int]]:
        out = {c: {"errors": 0, "warnings": 0} for c in CHECKS}
        for f in self.findings:
            out[f.check]["errors" if f.severity == "error" else "warnings"] += 1
        return out

    @property
    def error_count(self) -> int:
        return sum(f.severity == "error" for f in self.findings)

    @property
    def status(self) -> str:
        return "fail" if self.error_count else "pass"

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "started": _iso(self.started),
            "finished": _iso(self.finished),
            "checks_run": list(self.checks_run),
            "summary": self.counts(),
            "findings": [
                {"check": f.check, "severity": f.severity, "path": f.path, "line": f.line, "detail": f.detail}
                for f in self.findings
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def _iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def render_report(r: CheckReport) -> str:
    """Markdown report: summary table, then findings grouped by check."""
    counts = r.counts()
    lines = [
        "# Course check report",
        "",
        f"Overall: **{r.status.upper()}**",
        "",
        f"Started {_iso(r.started)}, finished {_iso(r.finished)}.",
        "",
        "| Check | Errors | Warnings | Status |",
        "| --- | ---: | ---: | --- |",
    ]
    for c in CHECKS:
        e, w = counts[c]["errors"], counts[c]["warnings"]
        status = "FAIL" if e else ("PASS" if c in r.checks_run else "SKIPPED")
        lines.append(f"| {c} | {e} | {w} | {status} |")
    for c in CHECKS:
        group = [f for f in r.findings if f.check == c]
        if not group:
            continue
        lines += ["", f"## {c}", ""]
        lines += [f"- `{f.path}:{f.line}` {f.severity}: {f.detail}" for f in group]
    return "\n".join(lines) + "\n"
