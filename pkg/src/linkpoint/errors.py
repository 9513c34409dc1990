"""Exception types shared across the engine."""


class LinkpointError(Exception):
    """Base class for all engine errors."""


class KbLoadError(LinkpointError):
    """The knowledge base source could not be read at all."""


class UnknownRelationError(LinkpointError):
    """A functionality query named a predicate that does not occur in the KB."""

    def __init__(self, relation: str):
        super().__init__(f"unknown relation: {relation}")
        self.relation = relation


class UnparseableResponseError(LinkpointError):
    """An API body that was expected to be JSON could not be parsed."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.offset = offset


class TransportError(LinkpointError):
    """Network-level failure (timeout, refused connection, retries exhausted).

    Distinct from an HTTP error status, which is surfaced as a normal response.
    """


class ConfigError(LinkpointError):
    """Invalid settings, registry entry, or endpoint definition."""


class ProbeError(LinkpointError):
    """Fatal probing failure, e.g. a dead endpoint or an empty input class."""
