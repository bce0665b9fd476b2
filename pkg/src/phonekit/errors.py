"""Exception hierarchy shared across the toolkit.

Each error family maps onto a stable CLI exit code (see cli.EXIT_CODES),
so library users and shell scripts see the same failure taxonomy.
"""


class PhonekitError(Exception):
    """Base class for all toolkit errors."""


class ParseError(PhonekitError):
    """Malformed transcript, table, or config input."""

    def __init__(self, message, line=None, field=None):
        super().__init__(message)
        self.line = line
        self.field = field


class EncodingError(ParseError):
    """Input bytes are not valid UTF-8."""


class NoBasePhoneError(ParseError):
    """A phone string contains only modifier symbols."""


class PairingError(PhonekitError):
    """Reference and hypothesis transcripts have unmatched utterance ids."""

    def __init__(self, message, ref_only=(), hyp_only=()):
        super().__init__(message)
        self.ref_only = tuple(ref_only)
        self.hyp_only = tuple(hyp_only)


class UndefinedRateError(PhonekitError):
    """Error rate requested with zero reference symbols but nonzero hypothesis."""


class DegenerateAnalysisError(PhonekitError):
    """Analysis input collapsed to nothing (e.g. confusion matrix empty after pruning)."""

    def __init__(self, message, summary=None):
        super().__init__(message)
        self.summary = summary


class DegenerateRowError(DegenerateAnalysisError):
    """A confusion row sums to zero and cannot be normalized."""


class InvalidDistributionError(PhonekitError):
    """A vector is not a probability distribution."""


class TooFewLabelsError(DegenerateAnalysisError):
    """Not enough labels for the requested analysis."""


class EmptyTranscriptError(PhonekitError):
    """Operation requires a non-empty transcript."""


class UnitMismatchError(PhonekitError):
    """Inventories or scores with different units were combined."""


class InsufficientDataError(PhonekitError):
    """Too few data points for a statistic (e.g. < 3 pairs for correlation)."""


class UndefinedCorrelationError(InsufficientDataError):
    """Correlation undefined because one variable has zero variance."""


class UnknownSymbolError(PhonekitError):
    """A reference symbol has no row in the channel model."""
