class PromptkitError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(PromptkitError):
    """A value violates a domain constraint (bad label, bad category, bad stars)."""


class CorpusParseError(PromptkitError):
    """An input file is structurally broken (malformed XML, bad TSV row)."""


class TransportError(PromptkitError):
    """An HTTP backend call failed after retries."""

    def __init__(self, message: str, example_id: str | None = None):
        super().__init__(message)
        self.example_id = example_id
