"""Shared exception types."""


class PrecisionError(ArithmeticError):
    """The requested result is not certified at the working precision."""


class DegenerateVertexError(PrecisionError):
    """A Newton-polygon vertex needed for a split cannot be certified."""


class TruncationError(PrecisionError):
    """Stored truncation is too short for the requested degree to be stable."""


class TowerError(PrecisionError):
    """Projector tower cannot be continued at the requested depth."""
