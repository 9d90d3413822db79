"""Exception hierarchy shared by every layer of the package."""

from __future__ import annotations


class LitPipeError(Exception):
    """Base class for all errors raised by litpipe."""


# --- search clients ---------------------------------------------------------


class EmptyQuery(LitPipeError):
    """The search query is empty after trimming whitespace."""


class RateLimited(LitPipeError):
    """The upstream API answered 429 after all retries."""

    def __init__(self, message: str, retry_after: float | None = None):
        super().__init__(message)
        self.retry_after = retry_after


class UpstreamError(LitPipeError):
    """The upstream API failed with a non-2xx status or a network error."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class DecodeError(LitPipeError):
    """The upstream response could not be parsed into the expected shape."""


class InvalidSeed(LitPipeError):
    """The seed paper id matches neither the arXiv nor the source-id pattern."""


class NotFound(LitPipeError):
    """The requested paper or session does not exist."""


# --- LLM gateway ------------------------------------------------------------


class MissingVariable(LitPipeError):
    """A template placeholder has no value in the variable map."""

    def __init__(self, name: str):
        super().__init__(f"no value supplied for placeholder {{{name}}}")
        self.name = name


class UnknownPlaceholder(LitPipeError):
    """A supplied variable names no placeholder in the template body."""

    def __init__(self, name: str):
        super().__init__(f"template declares no placeholder {{{name}}}")
        self.name = name


class ProviderError(LitPipeError):
    """The LLM provider failed or returned an unusable payload."""


class BudgetExceeded(LitPipeError):
    """The prompt does not fit the model's context window."""


class LlmTimeout(LitPipeError):
    """The LLM provider did not answer in time."""


class CassetteMiss(LitPipeError):
    """Replay was requested but no recording matches the request."""

    def __init__(self, key: str):
        super().__init__(f"no cassette entry for request {key}")
        self.key = key


# --- query synthesis and reranking ------------------------------------------


class EmptyAbstract(LitPipeError):
    """An abstract was required but is empty after trimming."""


class TooManyCandidates(LitPipeError):
    """More candidates than the reranker accepts in a single call."""


class Unparseable(LitPipeError):
    """The LLM output contains nothing the parser can anchor on."""


class IncompleteVerdictSet(LitPipeError):
    """Debate verdicts do not cover the candidate indices exactly once."""


# --- sentence plans ----------------------------------------------------------


class PlanSyntaxError(LitPipeError):
    """The plan text deviates from the plan grammar."""

    def __init__(self, position: int, message: str):
        super().__init__(f"plan syntax error at offset {position}: {message}")
        self.position = position


class PlanLineOutOfRange(LitPipeError):
    """A directive targets a line beyond the planned sentence count."""

    def __init__(self, line: int):
        super().__init__(f"directive line {line} is outside the planned sentences")
        self.line = line


class DuplicateDirective(LitPipeError):
    """The same (line, citation) pair appears twice in one plan."""


class PlanContextMismatch(LitPipeError):
    """The plan cites indices beyond the generation context."""


# --- pipeline ----------------------------------------------------------------


class NoCandidatesFound(LitPipeError):
    """Every configured source returned zero usable records."""


class CorruptSession(LitPipeError):
    """A stored session failed its checksum or cannot be decoded."""


class StageError(LitPipeError):
    """A pipeline stage failed; wraps the original error with its stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
