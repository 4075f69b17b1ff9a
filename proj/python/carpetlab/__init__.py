"""McMullen-map classification, nested-square carpets and fractal measurements."""

from ._carpetlab import (
    DataError,
    InvalidParameter,
    PoleError,
    ResourceError,
    box_dimension,
    carpet_counts,
    carpet_squares,
    classify,
    complement_component_count,
    cover_bound,
    critical_points,
    escape_radius,
    high_type,
    mcmullen,
    rasterize_carpet,
    standard_carpet,
)

__all__ = [
    "DataError",
    "InvalidParameter",
    "PoleError",
    "ResourceError",
    "box_dimension",
    "carpet_counts",
    "carpet_squares",
    "classify",
    "complement_component_count",
    "cover_bound",
    "critical_points",
    "escape_radius",
    "high_type",
    "mcmullen",
    "rasterize_carpet",
    "standard_carpet",
]
