"""Exception types shared across the package."""


class BspError(Exception):
    """Base class for all package errors."""


class GeometryError(BspError):
    pass


class CutMisses(GeometryError):
    """Cut offset falls outside the block's open projection interval."""


class DegenerateCut(GeometryError):
    """A split produced a child of negligible area."""


class QuadratureFailure(BspError):
    """Adaptive quadrature exceeded its depth limit."""


class EnvelopeViolation(BspError):
    """A rejection-sampling proposal exceeded its declared envelope."""


class SubdomainNotContained(BspError):
    """Sub-polygon is not contained in the tree's domain."""


class TimeOutOfRange(BspError):
    """Snapshot time outside [0, budget]."""


class PointOutsideDomain(BspError):
    """Query point not covered by any block."""


class RunawayProcess(BspError):
    """Generative process exceeded the hard cap on cut count."""


class AllWeightsZero(BspError):
    """Every particle weight underflowed; likelihood is misbound."""


class SingleClass(BspError):
    """AUC requested but only one label class is present."""
