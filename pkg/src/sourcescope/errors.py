"""Exception hierarchy shared across the package.

Every operational failure maps to a distinct class so callers (and the CLI
exit-code logic) can dispatch on type rather than parse messages.
"""


class SourceScopeError(Exception):
    """Base class for all package errors."""


# --- fetching / feature extraction -----------------------------------------

class FetchError(SourceScopeError):
    """A site could not be fetched; ``url`` names the failing request."""

    def __init__(self, url: str, message: str):
        self.url = url
        super().__init__(f"{message} ({url})")


class NetworkUnreachableError(FetchError):
    pass


class FetchTimeoutError(FetchError):
    pass


class TooManyRedirectsError(FetchError):
    pass


class NonHtmlContentError(FetchError):
    pass


class BodyTooLargeError(FetchError):
    pass


class LexiconError(SourceScopeError):
    """Keyword lexicon file is malformed or violates its invariants."""


# --- domain screening -------------------------------------------------------

class UnparseableUrlError(SourceScopeError):
    """Input could not be reduced to a hostname."""


class EmptyDatabaseError(SourceScopeError):
    """Mimicry screening requires at least one known domain."""


# --- model fitting / scoring -------------------------------------------------

class MissingFeatureError(SourceScopeError):
    """Scoring input lacks a feature the model names."""


class SingularDesignError(SourceScopeError):
    """Design matrix is rank deficient (collinear or constant columns)."""


class SeparationError(SourceScopeError):
    """Quasi-complete separation: a coefficient diverged during fitting."""


class ConvergenceError(SourceScopeError):
    """Fitting did not converge within the iteration budget."""


class ModelDocumentError(SourceScopeError):
    """Model document is structurally malformed."""


class UnknownFeatureError(ModelDocumentError):
    """Model document names a feature outside the supported set."""


class NonFiniteValueError(ModelDocumentError):
    """Model document carries a NaN or infinite coefficient."""


# --- statistics ---------------------------------------------------------------

class DomainError(SourceScopeError):
    """Numeric argument outside the mathematical domain of the function."""


class ZeroMarginError(SourceScopeError):
    """A 2x2 table has an empty margin, so association is undefined."""


class UnknownVariableError(SourceScopeError):
    """Requested variable is not one of the six dataset columns."""


class SingleClassDataError(SourceScopeError):
    """Dataset contains only one label value; baselines are undefined."""


class EmptyDataError(SourceScopeError):
    """Operation requires a non-empty dataset."""


# --- dataset ingestion ---------------------------------------------------------

class DatasetError(SourceScopeError):
    """Base class for CSV ingestion failures."""


class EmptyFileError(DatasetError):
    pass


class MissingColumnError(DatasetError):
    pass


class DuplicateHeaderError(DatasetError):
    pass


class NonBinaryCellError(DatasetError):
    pass
