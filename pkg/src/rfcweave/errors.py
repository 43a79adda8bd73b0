"""Exception hierarchy shared across the workbench."""

from __future__ import annotations


class RfcweaveError(Exception):
    """Base class for all workbench errors."""


class NotFound(RfcweaveError):
    """Input file or RFC number could not be resolved."""


class FetchFailed(RfcweaveError):
    """Network retrieval of an RFC failed."""


class NotText(RfcweaveError):
    """Input is not a plain-text document (PDF, HTML, binary...)."""


class InvalidConfig(RfcweaveError):
    """A configuration value is out of its allowed range."""


class EmptyInput(RfcweaveError):
    """An operation that requires non-empty text received an empty string."""


class ProviderUnavailable(RfcweaveError):
    """An embedding or completion provider is not configured or reachable."""


class DimensionMismatch(RfcweaveError):
    """Query vector dimensionality differs from the index."""


class MissingBinding(RfcweaveError):
    """A prompt template placeholder was left unbound."""


class FixtureMiss(RfcweaveError):
    """Replay mode found no recorded response for a request hash."""

    def __init__(self, message: str, stage: str = "", context_label: str = ""):
        super().__init__(message)
        self.stage = stage
        self.context_label = context_label


class ProviderError(RfcweaveError):
    """Completion provider failed after the configured retries."""


class BudgetExceeded(RfcweaveError):
    """The per-run request cap would be exceeded by another provider call."""


class ExtractionParseError(RfcweaveError):
    """Graph-extraction output stayed invalid after the repair round-trip."""

    def __init__(self, message: str, raw_response: str = ""):
        super().__init__(message)
        self.raw_response = raw_response


class CitationViolation(RfcweaveError):
    """A transition arrived without any usable segment citation."""


class SchemaError(RfcweaveError):
    """A serialized graph failed validation; message carries the JSON path."""


class EmptyName(RfcweaveError):
    """State name canonicalization received an empty string."""


class UnparseableDiagram(RfcweaveError):
    """ASCII diagram outside the supported box-and-arrow dialect."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        if row is not None:
            message = f"{message} (at row {row}, col {col})"
        super().__init__(message)
        self.row = row
        self.col = col
