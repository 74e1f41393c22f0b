"""
Exception hierarchy for KGTrail.
Every error raised on purpose by the package derives from KGTrailError,
so the CLI and the evaluation harness can catch one base class.
"""

from typing import Iterable, Optional


class KGTrailError(RuntimeError):
    """Base error for KGTrail."""


# ---- input errors (CLI exit code 1) ----

class GraphParseError(KGTrailError):
    """Malformed line in a triple file."""

    def __init__(self, line_number: int, line: str, message: str = "expected 3 TAB-separated fields"):
        self.line_number = line_number
        self.line = line
        super().__init__(f"line {line_number}: {message}: {line!r}")


class EmptyGraphError(KGTrailError):
    """Triple file contained no triples."""


class MissingEntitiesError(KGTrailError):
    """None of the requested topic entities exist in the graph."""

    def __init__(self, missing: Iterable[str]):
        self.missing = tuple(missing)
        super().__init__(f"topic not in graph: {', '.join(self.missing)}")


class DatasetError(KGTrailError):
    """Schema or uniqueness violation in a dataset file."""

    def __init__(self, message: str, line_number: Optional[int] = None):
        self.line_number = line_number
        prefix = f"line {line_number}: " if line_number is not None else ""
        super().__init__(prefix + message)


class ConfigError(KGTrailError):
    """Invalid run configuration."""


class TemplateError(KGTrailError):
    """Prompt template rendered with missing or unexpected fields."""

    def __init__(self, kind: str, field_name: str, problem: str):
        self.kind = kind
        self.field_name = field_name
        super().__init__(f"{kind} template: {problem} placeholder '{field_name}'")


class ContractViolation(KGTrailError):
    """An operation was called outside its precondition."""


# ---- structured output ----

class ParseError(KGTrailError):
    """Model output did not contain the expected literal."""


class NarratorError(KGTrailError):
    """Context generation returned an empty narrative."""


class PriorsError(KGTrailError):
    """Summarization returned nothing usable, or a priors file is invalid."""


# ---- backend errors (CLI exit code 2) ----

class BackendError(KGTrailError):
    """Base for LLM backend failures."""


class TransientBackendError(BackendError):
    """Retryable transport failure (connection reset, timeout, 5xx, rate limit)."""


class BackendUnavailableError(BackendError):
    """Backend failed permanently or retries were exhausted."""


class UnmatchedRequestError(BackendError):
    """Scripted backend has no rule for a rendered prompt."""

    def __init__(self, kind: str, fingerprint: str):
        self.kind = kind
        self.fingerprint = fingerprint
        super().__init__(f"no scripted rule matches {kind} prompt (fingerprint {fingerprint})")
