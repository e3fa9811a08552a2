"""Unified diff generation and strict application for single files."""

from __future__ import annotations

import difflib
import re

NO_NEWLINE = "\\ No newline at end of file"
_HUNK = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


class PatchError(ValueError):
    pass


def _lines(text: str) -> list[str]:
    """Split on LF only, keeping terminators (str.splitlines also splits on CR, FF, ...)."""
    return re.findall(r"[^\n]*\n|[^\n]+$", text)


def unified_diff(old: str | None, new: str | None, path: str, context: int = 3) -> str:
    """Diff text for one file; ``None`` content means the file is absent."""
    a = _lines(old or "")
    b = _lines(new or "")
    fromfile = f"a/{path}" if old is not None else "/dev/null"
    tofile = f"b/{path}" if new is not None else "/dev/null"
    out = []
    for line in difflib.unified_diff(a, b, fromfile, tofile, n=context):
        if line.endswith("\n"):
            out.append(line)
        else:
            out.append(line + "\n" + NO_NEWLINE + "\n")
    return "".join(out)


def apply_unified_diff(old: str, diff: str) -> str:
    """Apply a single-file unified diff to ``old``; context must match exactly."""
    src = _lines(old)
    lines = _lines(diff)
    out: list[str] = []
    pos = 0  # index into src of the next unconsumed line
    i = 0
    while i < len(lines) and not lines[i].startswith("@@"):
        i += 1
    while i < len(lines):
        m = _HUNK.match(lines[i])
        if not m:
            raise PatchError(f"malformed hunk header: {lines[i]!r}")
        old_start = int(m.group(1))
        old_len = int(m.group(2)) if m.group(2) is not None else 1
        start = old_start - 1 if old_len > 0 else old_start
        if start < pos:
            raise PatchError("overlapping hunks")
        out.extend(src[pos:start])
        pos = start
        i += 1
        while i < len(lines) and not lines[i].startswith("@@"):
            line = lines[i]
            tag, body = line[:1], line[1:]
            nxt = lines[i + 1] if i + 1 < len(lines) else ""
            if nxt.rstrip("\n") == NO_NEWLINE:
                body = body[:-1] if body.endswith("\n") else body
                i += 1
            if tag == " " or tag == "-":
                if pos >= len(src) or src[pos] != body:
                    raise PatchError(f"context mismatch at original line {pos + 1}")
                pos += 1
                if tag == " ":
                    out.append(body)
            elif tag == "+":
                out.append(body)
            elif line.rstrip("\n") == NO_NEWLINE:
                pass
            else:
                raise PatchError(f"unexpected diff line: {line!r}")
            i += 1
    out.extend(src[pos:])
    return "".join(out)
