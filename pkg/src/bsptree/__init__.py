"""Generative space partitioning with oblique cuts on convex planar
domains, plus conditional-SMC inference and a relational model on top.
"""

from ._kernels import BACKEND
from .errors import (
    AllWeightsZero,
    BspError,
    CutMisses,
    DegenerateCut,
    EnvelopeViolation,
    GeometryError,
    PointOutsideDomain,
    QuadratureFailure,
    RunawayProcess,
    SingleClass,
    SubdomainNotContained,
    TimeOutOfRange,
)
from .geometry import ConvexPolygon, CutLine, Point2, diameter, intersect, perimeter, polygon_area, split
from .inference import (
    BetaBernoulli,
    CsmcConfig,
    DirichletMultinomial,
    PointData,
    csmc_sweep,
    gibbs_run,
    log_marginal,
    log_marginal_tree,
)
from .measure import (
    AxisAligned,
    Custom,
    DirectionWeight,
    Mixed,
    Uniform,
    block_measure,
    direction_density,
    mondrian_style,
    sample_cut,
    sample_direction,
    weight_from_json,
)
from .process import BspTree, CutEvent, PartitionSnapshot, extend, locate, locate_many, restrict, sample_bsp
from .relational import (
    Coordinates,
    RelationalDataset,
    ToyDataset,
    auc,
    fit_relational,
    generate_relational,
    generate_toy,
    holdout_mask,
    predict,
)
from .rng import RngStream

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "__version__",
    # errors
    "BspError",
    "GeometryError",
    "CutMisses",
    "DegenerateCut",
    "QuadratureFailure",
    "EnvelopeViolation",
    "SubdomainNotContained",
    "TimeOutOfRange",
    "PointOutsideDomain",
    "RunawayProcess",
    "AllWeightsZero",
    "SingleClass",
    # geometry
    "Point2",
    "CutLine",
    "ConvexPolygon",
    "perimeter",
    "polygon_area",
    "diameter",
    "split",
    "intersect",
    # measure
    "DirectionWeight",
    "Uniform",
    "AxisAligned",
    "Custom",
    "Mixed",
    "mondrian_style",
    "weight_from_json",
    "block_measure",
    "direction_density",
    "sample_direction",
    "sample_cut",
    # process
    "BspTree",
    "CutEvent",
    "PartitionSnapshot",
    "sample_bsp",
    "restrict",
    "extend",
    "locate",
    "locate_many",
    # inference
    "BetaBernoulli",
    "DirichletMultinomial",
    "PointData",
    "log_marginal",
    "CsmcConfig",
    "csmc_sweep",
    "gibbs_run",
    # relational
    "RelationalDataset",
    "Coordinates",
    "ToyDataset",
    "generate_toy",
    "generate_relational",
    "holdout_mask",
    "predict",
    "auc",
    "fit_relational",
    # rng
    "RngStream",
]
