"""Exception hierarchy shared across the package."""


class KgmcqError(Exception):
    """Base class for all package errors."""


class InvalidLabelError(KgmcqError):
    """Raised for empty or whitespace-only label text."""


class IncompleteAlignmentError(KgmcqError):
    """Raised when a projection is asked for a node the alignment does not cover."""


class MissingFixtureError(KgmcqError):
    """Raised when a fixture lookup misses; fixtures are total, never silently empty."""


class TransportError(KgmcqError):
    """Raised when an HTTP backend or the Wikipedia API cannot be reached."""


class ProtocolError(KgmcqError):
    """Raised when a backend response violates the wire protocol (shape, dimension)."""


class UndefinedSimilarityError(KgmcqError):
    """Raised for cosine similarity involving a zero vector."""


class NotFoundError(KgmcqError):
    """Raised when a Wikipedia page does not exist."""


class DatasetError(KgmcqError):
    """Raised for dataset files that fail validation."""


class BuildError(KgmcqError):
    """Raised when propositional-graph construction fails for an option."""
