"""Exception hierarchy shared by every stage of the course compiler.

Each exception carries an ``exit_code`` so the CLI can map any failure to
its documented status without a lookup table per call site.
"""

from __future__ import annotations

EXIT_OK = 0
EXIT_CHECKS = 1
EXIT_USAGE = 2
EXIT_IO = 3


class OttrError(Exception):
    exit_code = EXIT_USAGE


class ManifestError(OttrError):
    """A manifest failed validation.

    ``code`` is one of MissingField, DuplicateChapter, EmptyTargets, BadGlob,
    PathEscape, InvalidValue or SyntaxError; ``key`` and ``line`` locate the
    offending entry (line is 1-based, ``None`` when not attributable).
    """

    def __init__(self, code: str, key: str, line: int | None, message: str):
        self.code = code
        self.key = key
        self.line = line
        self.message = message
        where = f" (line {line})" if line is not None else ""
        super().__init__(f"{code}: {key}{where}: {message}")


class UsageError(OttrError):
    pass


class DestinationNotEmpty(OttrError):
    def __init__(self, dest):
        self.dest = dest
        super().__init__(f"destination is not empty: {dest}")


class MissingBaseUrl(OttrError):
    def __init__(self):
        super().__init__("the coursera target needs 'base_url' set in the manifest")


class MissingWordlist(OttrError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"word list not found (manifest key 'wordlist'): {path}")


class RenderError(OttrError):
    exit_code = EXIT_CHECKS


class UnconvertibleQuiz(RenderError):
    pass


class BuildError(OttrError):
    """A pipeline stage failed; ``stage`` names it and ``cause`` is the original error."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", EXIT_IO if isinstance(cause, OSError) else EXIT_USAGE)
        super().__init__(f"[{stage}] {cause}")


class OptInDisabled(OttrError):
    def __init__(self):
        super().__init__("template updates are disabled: set 'sync.opt_in: true' in the manifest")


class UpstreamUnreachable(OttrError):
    exit_code = EXIT_IO


class StaleDownstream(OttrError):
    exit_code = EXIT_IO

    def __init__(self, path: str, expected: str | None, actual: str | None):
        self.path = path
        self.expected = expected
        self.actual = actual
        super().__init__(
            f"downstream changed since the patchset was computed: {path} "
            f"(expected {expected or 'absent'}, found {actual or 'absent'})"
        )


class OriginUnreachable(OttrError):
    exit_code = EXIT_IO


class HashMismatch(OttrError):
    exit_code = EXIT_CHECKS

    def __init__(self, origin: str, file: str, old: str, new: str):
        self.origin = origin
        self.file = file
        self.old = old
        self.new = new
        super().__init__(
            f"borrowed chapter {file} from {origin} changed: pinned sha256 {old}, fetched {new}"
        )
