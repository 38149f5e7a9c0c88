"""Exact plane geometry over the field Q(sqrt 3).

The height-1 equilateral triangle, its dyadic vertical cuts, and every
rotation by a multiple of 30 degrees have coordinates of the form
a + b*sqrt(3) with rational a, b.  Working in that field keeps the whole
cut-and-shift pipeline exact: areas are equalities, not tolerances.
"""

from .scalar import ExactScalar, HALF, INV_SQRT3, ONE, SQRT3, ZERO, rational, scalar
from .primitives import (
    GeomError,
    Point2,
    ORIGIN,
    RigidMotion,
    Segment2,
    HIT_NONE,
    HIT_OVERLAP,
    HIT_POINT,
    cross,
    dot,
    ensure_ccw,
    on_segment,
    orient,
    point_in_polygon_closed,
    polygon_area,
    segment_hits,
    signed_area2,
    validate_simple_polygon,
)
from .region import (
    Region2,
    contains_segment,
    normalize,
    point_in_region,
    region_area,
    region_intersect,
    region_union,
    transform,
)

__all__ = [
    "ExactScalar",
    "GeomError",
    "HALF",
    "HIT_NONE",
    "HIT_OVERLAP",
    "HIT_POINT",
    "INV_SQRT3",
    "ONE",
    "ORIGIN",
    "Point2",
    "Region2",
    "RigidMotion",
    "SQRT3",
    "Segment2",
    "ZERO",
    "contains_segment",
    "cross",
    "dot",
    "ensure_ccw",
    "normalize",
    "on_segment",
    "orient",
    "point_in_polygon_closed",
    "point_in_region",
    "polygon_area",
    "rational",
    "region_area",
    "region_intersect",
    "region_union",
    "scalar",
    "segment_hits",
    "signed_area2",
    "transform",
    "validate_simple_polygon",
]
