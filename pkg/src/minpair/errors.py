"""Exception hierarchy shared across the toolkit.

``RuleNotApplicable`` subclasses signal that a perturbation rule does not
apply to a sentence; callers skip the sentence instead of failing.
"""


class MinpairError(Exception):
    """Base class for all toolkit errors."""

    code = "ERROR"


# --- corpus ingestion ---

class LineCountMismatch(MinpairError):
    code = "LINE_COUNT_MISMATCH"


class MalformedRow(MinpairError):
    code = "MALFORMED_ROW"

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class EmptyInput(MinpairError):
    code = "EMPTY_INPUT"


# --- perturbation rules ---

class RuleNotApplicable(MinpairError):
    """A rule could not be applied to this sentence; skip, don't fail."""

    code = "RULE_NOT_APPLICABLE"


class NoCandidateNoun(RuleNotApplicable):
    code = "NO_CANDIDATE_NOUN"


class NoEligiblePhrase(RuleNotApplicable):
    code = "NO_ELIGIBLE_PHRASE"


class NoEligibleToken(RuleNotApplicable):
    code = "NO_ELIGIBLE_TOKEN"


class SingleClause(RuleNotApplicable):
    code = "SINGLE_CLAUSE"


class NoEligibleSite(RuleNotApplicable):
    code = "NO_ELIGIBLE_SITE"


class UnknownErrorType(MinpairError):
    code = "UNKNOWN_ERROR_TYPE"


# --- scoring ---

class BackendFailure(MinpairError):
    code = "BACKEND_FAILURE"


class EmptyTarget(MinpairError):
    code = "EMPTY_TARGET"


class EmptyCorpus(MinpairError):
    code = "EMPTY_CORPUS"


class ProtocolViolation(MinpairError):
    code = "PROTOCOL_VIOLATION"


class ScorerTimeout(MinpairError):
    code = "SCORER_TIMEOUT"


# --- evaluation ---

class NonFiniteScore(MinpairError):
    code = "NON_FINITE_SCORE"


class EmptyTestset(MinpairError):
    code = "EMPTY_TESTSET"


# --- validation / review ---

class SpanOutOfRange(MinpairError):
    code = "SPAN_OUT_OF_RANGE"


class VersionConflict(MinpairError):
    code = "VERSION_CONFLICT"


class IllegalTransition(MinpairError):
    code = "ILLEGAL_TRANSITION"


class UnresolvedReviews(MinpairError):
    code = "UNRESOLVED_REVIEWS"

    def __init__(self, pending_ids):
        self.pending_ids = list(pending_ids)
        super().__init__(
            "unresolved review records: " + ", ".join(self.pending_ids)
        )


class ConfigError(MinpairError):
    code = "CONFIG_ERROR"
