"""Box-counting dimension estimates for the sets this package builds.

Neighbourhood volume |N_dK| is measured by occupancy of a cell grid
at pitch d/4: a cell counts when its centre lies within d of the set.
The log-log slope of those volumes against d gives the Minkowski
dimension, and the same curve feeds the discretized lower bound
|N_dK| >= c_eps * d^eps that a full-dimensional set must satisfy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exactgeom.region import Region2
from .parallel import map_ordered
from .tubelab.core import TubeFamily

__all__ = [
    "BoxCountCurve",
    "DimError",
    "DimensionEstimate",
    "KakeyaBoundReport",
    "kakeya_bound_check",
    "minkowski_estimate",
    "neighborhood_volume_curve",
]

# Above _MAX_CELLS cells the exact per-polygon distance test gives way
# to a parity scanline fill with disk dilation, whose cost scales with
# the grid rather than with polygon count; _SCAN_CELLS caps that too.
_MAX_CELLS = 1 << 27
_SCAN_CELLS = 1 << 31


class DimError(ValueError):
    """Invalid input to a dimension estimation routine."""


@dataclass(frozen=True)
class BoxCountCurve:
    """Neighbourhood volumes (delta, |N_dK|) at strictly decreasing delta."""

    entries: tuple[tuple[float, float], ...]

    def __post_init__(self):
        entries = tuple((float(d), float(v)) for d, v in self.entries)
        if not entries:
            raise DimError("a curve needs at least one entry")
        for d, v in entries:
            if not (0.0 < d < 1.0) or not math.isfinite(d):
                raise DimError(f"delta must lie in (0, 1), got {d}")
            if not (v > 0.0) or not math.isfinite(v):
                raise DimError(f"volume must be positive, got {v}")
        for (d1, v1), (d2, v2) in zip(entries, entries[1:]):
            if not d2 < d1:
                raise DimError("deltas must be strictly decreasing")
            if v2 > v1:
                raise DimError("volumes must be non-increasing as delta shrinks")
        object.__setattr__(self, "entries", entries)

    @property
    def deltas(self) -> tuple[float, ...]:
        return tuple(d for d, _ in self.entries)

    @property
    def volumes(self) -> tuple[float, ...]:
        return tuple(v for _, v in self.entries)

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class DimensionEstimate:
    """Least-squares Minkowski dimension with its fit residual.

    delta_range records the (coarsest, finest) scales the fit used
    after any endpoint trimming.
    """

    dimension: float
    residual: float
    delta_range: tuple[float, float]


@dataclass(frozen=True)
class KakeyaBoundReport:
    """Result of testing |N_dK| >= c_eps * d^eps along a curve.

    c_epsilon is the infimum of |N_dK| / d^eps over the curve;
    consistent means the infimum is positive and the ratio shows no
    vanishing trend toward fine scales.
    """

    epsilon: float
    c_epsilon: float
    delta_at_min: float
    ratios: tuple[float, ...]
    consistent: bool


def _float_polygons(region: Region2) -> list[np.ndarray]:
    polys = [
        np.array([[float(p.x), float(p.y)] for p in poly], dtype=float)
        for poly in region.polygons
    ]
    if not polys:
        raise DimError("cannot measure an empty region")
    return polys


def _axes(lo: np.ndarray, hi: np.ndarray, cell: float,
          cap: int = _MAX_CELLS) -> tuple[np.ndarray, np.ndarray]:
    counts = np.maximum(np.ceil((hi - lo) / cell).astype(int), 1)
    if int(np.prod(counts)) > cap:
        raise DimError(
            f"analysis grid would need {int(np.prod(counts))} cells; "
            "use coarser deltas")
    return lo, counts


def _window(lo, counts, cell, wlo, whi):
    """Index range of cells whose centres might fall in [wlo, whi]."""
    i0 = np.maximum(np.floor((wlo - lo) / cell - 0.5).astype(int), 0)
    i1 = np.minimum(np.ceil((whi - lo) / cell + 0.5).astype(int), counts)
    return i0, i1


def _centers(lo: float, i0: int, i1: int, cell: float) -> np.ndarray:
    return lo + (np.arange(i0, i1) + 0.5) * cell


def _segment_dist2(px, py, ax, ay, bx, by):
    """Squared distance from broadcast points to one segment."""
    dx, dy = bx - ax, by - ay
    norm2 = dx * dx + dy * dy
    if norm2 == 0.0:
        return (px - ax) ** 2 + (py - ay) ** 2
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / norm2, 0.0, 1.0)
    return (px - ax - t * dx) ** 2 + (py - ay - t * dy) ** 2


def _boundary_edges(region: Region2, polys: list[np.ndarray]) -> np.ndarray:
    """Edges of the union outline, as an (n, 2, 2) float array.

    In a disjoint polygon decomposition every interior edge appears an
    even number of times; edges seen an odd number of times trace the
    outer boundary.
    """
    counts: dict = {}
    keyed = []
    for poly in region.polygons:
        ring = []
        for p, q in zip(poly, poly[1:] + poly[:1]):
            a = (p.x.to_ints(), p.y.to_ints())
            b = (q.x.to_ints(), q.y.to_ints())
            key = (a, b) if a <= b else (b, a)
            counts[key] = counts.get(key, 0) + 1
            ring.append(key)
        keyed.append(ring)
    out = []
    for V, ring in zip(polys, keyed):
        for k, key in enumerate(ring):
            if counts[key] % 2 == 1:
                out.append((V[k], V[(k + 1) % len(V)]))
    if not out:
        return np.zeros((0, 2, 2))
    return np.array(out)


def _region_volume_exact(polys, delta, cell, lo, counts):
    occ = np.zeros(tuple(counts), dtype=bool)
    d2 = delta * delta
    pad = delta + cell
    for V in polys:
        i0, i1 = _window(lo, counts, cell, V.min(axis=0) - pad, V.max(axis=0) + pad)
        xs = _centers(lo[0], i0[0], i1[0], cell)[:, None]
        ys = _centers(lo[1], i0[1], i1[1], cell)[None, :]
        inside = np.zeros((len(xs), ys.shape[1]), dtype=bool)
        near = np.zeros_like(inside)
        for (ax, ay), (bx, by) in zip(V, np.roll(V, -1, axis=0)):
            if ay != by:
                hit = (ay > ys) != (by > ys)
                cross = ax + (ys - ay) * (bx - ax) / (by - ay)
                inside ^= hit & (xs < cross)
            near |= _segment_dist2(xs, ys, ax, ay, bx, by) <= d2
        occ[i0[0]:i1[0], i0[1]:i1[1]] |= inside | near
    return float(occ.sum()) * cell ** 2


def _region_volume_scan(polys, bedges, delta, cell, lo, counts):
    nx, ny = int(counts[0]), int(counts[1])
    par = np.zeros((nx, ny), dtype=np.uint8)
    for V in polys:
        for (ax, ay), (bx, by) in zip(V, np.roll(V, -1, axis=0)):
            if ay == by:
                continue
            ylo, yhi = (ay, by) if ay < by else (by, ay)
            j0 = max(int(math.floor((ylo - lo[1]) / cell - 0.5)), 0)
            j1 = min(int(math.ceil((yhi - lo[1]) / cell + 0.5)), ny)
            if j0 >= j1:
                continue
            yc = lo[1] + (np.arange(j0, j1) + 0.5) * cell
            m = (ay > yc) != (by > yc)
            if not m.any():
                continue
            rows = np.nonzero(m)[0] + j0
            xc = ax + (yc[m] - ay) * (bx - ax) / (by - ay)
            ix = np.ceil((xc - lo[0]) / cell - 0.5).astype(np.int64)
            keep = ix < nx
            np.add.at(par, (np.clip(ix[keep], 0, nx - 1), rows[keep]), 1)
    par &= 1
    np.bitwise_xor.accumulate(par, axis=0, out=par)
    inside = par.view(bool)
    # stamp the outline so slivers thinner than a cell still register
    for (a, b) in bedges:
        n = int(np.hypot(b[0] - a[0], b[1] - a[1]) / (0.5 * cell)) + 2
        t = np.linspace(0.0, 1.0, n)
        ix = ((a[0] + t * (b[0] - a[0]) - lo[0]) / cell - 0.5).round().astype(np.int64)
        iy = ((a[1] + t * (b[1] - a[1]) - lo[1]) / cell - 0.5).round().astype(np.int64)
        inside[np.clip(ix, 0, nx - 1), np.clip(iy, 0, ny - 1)] = True
    r = delta / cell
    occ = np.zeros_like(inside)
    rr = int(math.floor(r))
    for dx in range(-rr, rr + 1):
        for dy in range(-rr, rr + 1):
            if dx * dx + dy * dy > r * r * (1 + 1e-12):
                continue
            occ[max(dx, 0):nx + min(dx, 0), max(dy, 0):ny + min(dy, 0)] |= \
                inside[max(-dx, 0):nx + min(-dx, 0), max(-dy, 0):ny + min(-dy, 0)]
    return float(occ.sum()) * cell ** 2


def _region_volume(polys, bedges, delta, cell, force_scan=False):
    verts = np.vstack(polys)
    pad = delta + cell
    lo, counts = _axes(verts.min(axis=0) - pad, verts.max(axis=0) + pad, cell,
                       cap=_SCAN_CELLS)
    if not force_scan and int(np.prod(counts)) <= _MAX_CELLS:
        return _region_volume_exact(polys, delta, cell, lo, counts)
    return _region_volume_scan(polys, bedges, delta, cell, lo, counts)


def _region_needs_scan(polys, deltas, cell_factor):
    """True when the finest delta exceeds the exact path's cell cap.

    One curve must not mix the two rasterizations: their small
    systematic offsets would masquerade as slope.
    """
    d = deltas[-1]
    cell = d / cell_factor
    verts = np.vstack(polys)
    span = verts.max(axis=0) - verts.min(axis=0) + 2 * (d + cell)
    return int(np.prod(np.maximum(np.ceil(span / cell), 1))) > _MAX_CELLS


def _tube_volume(family: TubeFamily, delta: float, cell: float) -> float:
    dim = family.dim
    ends = np.array([t.a for t in family.tubes] + [t.b for t in family.tubes])
    reach = family.delta + delta
    pad = reach + cell
    lo, counts = _axes(ends.min(axis=0) - pad, ends.max(axis=0) + pad, cell)
    occ = np.zeros(tuple(counts), dtype=bool)
    r2 = reach * reach
    for tube in family.tubes:
        wlo = np.minimum(tube.a, tube.b) - pad
        whi = np.maximum(tube.a, tube.b) + pad
        i0, i1 = _window(lo, counts, cell, wlo, whi)
        axes = [_centers(lo[k], i0[k], i1[k], cell) for k in range(dim)]
        grids = np.meshgrid(*axes, indexing="ij", sparse=True)
        t = sum((g - a) * w for g, a, w in zip(grids, tube.a, tube.omega))
        t = np.clip(t, 0.0, tube.length)
        dist2 = sum((g - a - t * w) ** 2
                    for g, a, w in zip(grids, tube.a, tube.omega))
        sel = tuple(slice(a, b) for a, b in zip(i0, i1))
        occ[sel] |= dist2 <= r2
    return float(occ.sum()) * cell ** dim


def _cloud_volume(points: np.ndarray, delta: float, cell: float) -> float:
    dim = points.shape[1]
    pad = delta + cell
    lo, counts = _axes(points.min(axis=0) - pad, points.max(axis=0) + pad, cell)
    occ = np.zeros(tuple(counts), dtype=bool)
    d2 = delta * delta
    for p in points:
        i0, i1 = _window(lo, counts, cell, p - pad, p + pad)
        axes = [_centers(lo[k], i0[k], i1[k], cell) for k in range(dim)]
        grids = np.meshgrid(*axes, indexing="ij", sparse=True)
        dist2 = sum((g - c) ** 2 for g, c in zip(grids, p))
        sel = tuple(slice(a, b) for a, b in zip(i0, i1))
        occ[sel] |= dist2 <= d2
    return float(occ.sum()) * cell ** dim


def neighborhood_volume_curve(shape, deltas, *, cell_factor: float = 4.0) -> BoxCountCurve:
    """Measure |N_dK| of shape over the given decreasing deltas.

    shape may be a Region2, a TubeFamily, or an (n, dim) point array.
    Each delta uses its own occupancy grid at pitch delta/cell_factor;
    evaluations run through the shared ordered parallel map.
    """
    ds = [float(d) for d in deltas]
    if not ds:
        raise DimError("need at least one delta")
    for d in ds:
        if not (0.0 < d < 1.0):
            raise DimError(f"deltas must lie in (0, 1), got {d}")
    if any(b >= a for a, b in zip(ds, ds[1:])):
        raise DimError("deltas must be strictly decreasing")
    if not (cell_factor >= 2.0):
        raise DimError("cell_factor must be at least 2")

    if isinstance(shape, Region2):
        polys = _float_polygons(shape)
        bedges = _boundary_edges(shape, polys)
        scan = _region_needs_scan(polys, ds, cell_factor)
        jobs = [(lambda d=d: _region_volume(polys, bedges, d, d / cell_factor,
                                            force_scan=scan)) for d in ds]
    elif isinstance(shape, TubeFamily):
        jobs = [(lambda d=d: _tube_volume(shape, d, d / cell_factor)) for d in ds]
    else:
        pts = np.asarray(shape, dtype=float)
        if pts.ndim != 2 or pts.shape[1] not in (2, 3) or len(pts) == 0:
            raise DimError("point cloud must be a non-empty (n, 2) or (n, 3) array")
        if not np.all(np.isfinite(pts)):
            raise DimError("point cloud must be finite")
        jobs = [(lambda d=d: _cloud_volume(pts, d, d / cell_factor)) for d in ds]

    vols = map_ordered(lambda job: job(), jobs)
    return BoxCountCurve(tuple(zip(ds, vols)))


def minkowski_estimate(curve: BoxCountCurve, ambient: int, *, trim: int = 1) -> DimensionEstimate:
    """Fit dimension = ambient - slope of log |N_dK| against log d.

    trim entries are dropped from each end of the curve before the
    least-squares fit (boundary scales are the least reliable); the
    result is clamped to [0, ambient].
    """
    if ambient not in (1, 2, 3):
        raise DimError(f"ambient dimension must be 1, 2, or 3, got {ambient}")
    if len(curve) < 4:
        raise DimError("dimension fit needs at least 4 curve points")
    if trim < 0 or len(curve) - 2 * trim < 2:
        raise DimError(f"trim {trim} leaves fewer than 2 points")
    used = curve.entries[trim:len(curve) - trim] if trim else curve.entries
    x = np.log([d for d, _ in used])
    y = np.log([v for _, v in used])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    dimension = min(max(ambient - float(slope), 0.0), float(ambient))
    return DimensionEstimate(dimension, residual, (used[0][0], used[-1][0]))


def kakeya_bound_check(curve: BoxCountCurve, epsilon: float) -> KakeyaBoundReport:
    """Evaluate inf |N_dK| / d^eps over the curve.

    The verdict is consistent when the infimum is positive and the
    ratio at the finest scale has not collapsed below half the ratio
    at the coarsest, i.e. no power-law decay is visible in the range.
    """
    if not (0.0 < epsilon <= 1.0):
        raise DimError(f"epsilon must lie in (0, 1], got {epsilon}")
    ratios = tuple(v / d ** epsilon for d, v in curve.entries)
    k = int(np.argmin(ratios))
    c_eps = ratios[k]
    consistent = c_eps > 0.0 and ratios[-1] >= 0.5 * ratios[0]
    return KakeyaBoundReport(epsilon, c_eps, curve.entries[k][0], ratios, consistent)
