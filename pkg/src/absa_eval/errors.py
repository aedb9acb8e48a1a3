"""Exception hierarchy shared across the package.

The CLI maps the three top branches to exit codes: ConfigError -> 1,
DataError -> 2, EndpointError -> 3.
"""

from __future__ import annotations


class AbsaEvalError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AbsaEvalError):
    """Bad user configuration (unknown task, invalid run settings, ...)."""


class EmptyVocabulary(ConfigError):
    """A category task was given no category vocabulary."""


class InsufficientDemonstrations(ConfigError):
    """Fewer training examples available than the requested shot count."""


class MixedPolicy(ConfigError):
    """Reports scored under different canonicalization policies cannot be tabulated together."""


class DataError(AbsaEvalError):
    """Dataset files are missing, malformed, or violate the task schema."""


class MissingSplit(DataError):
    def __init__(self, split: str, path: str, detail: str = ""):
        self.split = split
        self.path = path
        super().__init__(f"missing {split} split under {path}" + (f": {detail}" if detail else ""))


class MalformedRecord(DataError):
    def __init__(self, path: str, line_no: int, detail: str):
        self.path = path
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {detail}")


class SchemaViolation(DataError):
    def __init__(self, record: object, violations: list, context: str = ""):
        self.record = record
        self.violations = violations
        msg = "; ".join(str(v) for v in violations)
        super().__init__(f"{context + ': ' if context else ''}{msg}")


class EndpointError(AbsaEvalError):
    """Problems talking to the completion endpoint."""


class EndpointUnreachable(EndpointError):
    pass


class AuthFailure(EndpointError):
    pass


class ResponseTruncated(EndpointError):
    """The endpoint stopped generating because the token limit was reached."""


class ParseError(AbsaEvalError):
    """Strict-mode response parsing failed. ``kind`` names the failure."""

    def __init__(self, kind: str, detail: str = ""):
        self.kind = kind
        super().__init__(f"{kind}{': ' + detail if detail else ''}")


class EmptyRunList(AbsaEvalError):
    """aggregate() needs at least one run."""
