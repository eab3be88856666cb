"""Self-similar Antoine necklaces: chain construction, validation, iteration and projection analysis."""
from .chains import (
    Chain,
    ChainVerdict,
    RegularChainParams,
    build_initial_link,
    build_theorem2_chain,
    enclosing_similar_torus,
    find_psi0,
    minimal_m,
    regular_chain_from_params,
    validate_chain,
)
from .errors import (
    BudgetExceeded,
    GeometryError,
    InsufficientData,
    InvalidParams,
    InvariantViolation,
    NonConvergence,
    NotFound,
    NotSimilar,
    PreconditionFailed,
    ValidationFailed,
)
from .geometry import (
    Circle3,
    LinkVerdict,
    MinimizeOpts,
    Plane,
    Similarity,
    SolidTorus,
    apply_similarity,
    circle_circle_distance,
    circles_linked,
    linking_number_gauss,
    point_circle_distance,
    project_point,
    tori_disjoint,
    torus_contains_torus,
)
from .ifs import (
    CoverLevel,
    IfsSystem,
    attractor_sample,
    extract_similarity,
    iterate_cover,
    moran_cover_sum,
    similarity_dimension,
)
from .projection import (
    PlaneSweep,
    ProjectionReport,
    SweepConfig,
    box_count_dimension,
    project_cover_area,
    projection_connectivity,
    raster_slack,
    sweep,
)
from .search import FeasibilityCell, SearchGrid, certified_region_report, scan, theorem3_checks

__version__ = "0.1.0"

__all__ = [
    "apply_similarity",
    "attractor_sample",
    "box_count_dimension",
    "BudgetExceeded",
    "build_initial_link",
    "build_theorem2_chain",
    "certified_region_report",
    "Chain",
    "ChainVerdict",
    "Circle3",
    "circle_circle_distance",
    "circles_linked",
    "CoverLevel",
    "enclosing_similar_torus",
    "extract_similarity",
    "FeasibilityCell",
    "find_psi0",
    "GeometryError",
    "IfsSystem",
    "InsufficientData",
    "InvalidParams",
    "InvariantViolation",
    "iterate_cover",
    "linking_number_gauss",
    "LinkVerdict",
    "minimal_m",
    "MinimizeOpts",
    "moran_cover_sum",
    "NonConvergence",
    "NotFound",
    "NotSimilar",
    "Plane",
    "PlaneSweep",
    "point_circle_distance",
    "PreconditionFailed",
    "project_cover_area",
    "project_point",
    "projection_connectivity",
    "ProjectionReport",
    "raster_slack",
    "regular_chain_from_params",
    "RegularChainParams",
    "scan",
    "SearchGrid",
    "Similarity",
    "similarity_dimension",
    "SolidTorus",
    "sweep",
    "SweepConfig",
    "theorem3_checks",
    "tori_disjoint",
    "torus_contains_torus",
    "validate_chain",
    "ValidationFailed",
]
