"""Exception hierarchy. ``category`` is what the CLI reports on failure."""


class A2GError(Exception):
    category = "error"


class ZeroDistance(A2GError, ValueError):
    """Transmitter and receiver coincide; the sample has no defined geometry."""

    category = "geometry"


class PatternError(A2GError, ValueError):
    category = "pattern"


class MalformedGrid(PatternError):
    pass


class RaggedRows(PatternError):
    pass


class NonFiniteGain(PatternError):
    pass


class GridMismatch(PatternError):
    pass


class IngestError(A2GError, ValueError):
    category = "ingest"


class EmptyTrack(IngestError):
    pass


class NonMonotoneTime(IngestError):
    pass


class MalformedRow(IngestError):
    pass


class NonFinitePower(IngestError):
    pass


class NoOverlap(IngestError):
    pass


class EmptyInput(A2GError, ValueError):
    category = "segmentation"


class DegenerateDesign(A2GError, ValueError):
    category = "fit"


class ConfigError(A2GError, ValueError):
    category = "config"
