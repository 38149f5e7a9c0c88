"""Union volume of a tube family, by grid occupancy or Monte Carlo.

Both methods reduce to point-in-union queries.  Tubes are bucketed
into a coarse spatial hash along their core segments so each query
point only tests nearby tubes.
"""

from __future__ import annotations

import math

import numpy as np

from ..parallel import map_ordered
from ..rng import make_rng
from .core import (
    Tube,
    TubeError,
    TubeFamily,
    VolumeEstimate,
    family_bbox,
    family_total_volume,
)

__all__ = ["union_volume", "kakeya_ratio", "TubeIndex"]

_MC_CHUNK = 1 << 18


class TubeIndex:
    """Spatial hash of a family for batched point-in-union queries."""

    def __init__(self, fam: TubeFamily):
        self.dim = fam.dim
        self.delta = fam.delta
        self.anchors = np.array([t.a for t in fam.tubes])
        self.omegas = np.array([t.omega for t in fam.tubes])
        self.lengths = np.array([t.length for t in fam.tubes])
        self.lo, self.hi = family_bbox(fam)
        span = float(np.max(self.hi - self.lo))
        # Cells no finer than a tube width; cap the lattice at 64^dim.
        self.h = max(2.0 * fam.delta, span / 64.0)
        self.shape = np.maximum(
            1, np.ceil((self.hi - self.lo) / self.h - 1e-12).astype(int)
        )
        self.buckets: dict[int, np.ndarray] = {}
        self._fill(fam)

    def _cell_ids(self, pts: np.ndarray) -> np.ndarray:
        ix = ((pts - self.lo) / self.h).astype(int)
        ix = np.clip(ix, 0, self.shape - 1)
        flat = ix[:, 0]
        for d in range(1, self.dim):
            flat = flat * self.shape[d] + ix[:, d]
        return flat

    def _fill(self, fam: TubeFamily) -> None:
        cids = []
        tids = []
        for i, t in enumerate(fam.tubes):
            c = self._cells_near_tube(t)
            cids.append(c)
            tids.append(np.full(len(c), i))
        cid = np.concatenate(cids)
        tid = np.concatenate(tids)
        order = np.argsort(cid, kind="stable")
        cid = cid[order]
        tid = tid[order]
        starts = np.flatnonzero(np.r_[True, cid[1:] != cid[:-1]])
        bounds = np.r_[starts, len(cid)]
        self.buckets = {
            int(cid[a]): tid[a:b] for a, b in zip(bounds[:-1], bounds[1:])
        }

    def _cells_near_tube(self, t: Tube) -> np.ndarray:
        # Walk the core, mark every cell whose points might touch the
        # tube: reach = delta + walk spacing/2 + cell diagonal/2.
        step = self.h / 2.0
        n = int(math.ceil(t.length / step)) + 1
        pts = t.a[None, :] + np.linspace(0.0, t.length, n)[:, None] * t.omega[None, :]
        reach = t.delta + step / 2.0 + self.h * math.sqrt(self.dim) / 2.0
        r = int(math.ceil(reach / self.h))
        base = ((pts - self.lo) / self.h).astype(int)
        base = np.unique(np.clip(base, 0, self.shape - 1), axis=0)
        offs = np.stack(
            np.meshgrid(*([np.arange(-r, r + 1)] * self.dim), indexing="ij"), axis=-1
        ).reshape(-1, self.dim)
        cells = (base[:, None, :] + offs[None, :, :]).reshape(-1, self.dim)
        cells = cells[((cells >= 0) & (cells < self.shape)).all(axis=1)]
        flat = cells[:, 0]
        for d in range(1, self.dim):
            flat = flat * self.shape[d] + cells[:, d]
        return np.unique(flat)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask over rows of pts: inside the union of tubes."""
        n = len(pts)
        out = np.zeros(n, dtype=bool)
        if n == 0:
            return out
        ids = self._cell_ids(pts)
        order = np.argsort(ids, kind="stable")
        ids_sorted = ids[order]
        starts = np.flatnonzero(np.r_[True, ids_sorted[1:] != ids_sorted[:-1]])
        bounds = np.r_[starts, n]
        d2 = self.delta * self.delta
        for a, b in zip(bounds[:-1], bounds[1:]):
            cand = self.buckets.get(int(ids_sorted[a]))
            if cand is None:
                continue
            sel = order[a:b]
            p = pts[sel]
            rel = p[:, None, :] - self.anchors[cand][None, :, :]
            t = np.einsum("pcd,cd->pc", rel, self.omegas[cand])
            perp2 = np.einsum("pcd,pcd->pc", rel, rel) - t * t
            hit = (t >= 0.0) & (t <= self.lengths[cand][None, :]) & (perp2 <= d2)
            out[sel] = hit.any(axis=1)
        return out


def _mc_volume(fam: TubeFamily, samples: int, seed: int) -> VolumeEstimate:
    index = TubeIndex(fam)
    lo, hi = index.lo, index.hi
    box = float(np.prod(hi - lo))
    n_chunks = max(1, math.ceil(samples / _MC_CHUNK))
    sizes = [_MC_CHUNK] * (n_chunks - 1) + [samples - _MC_CHUNK * (n_chunks - 1)]

    def run(job) -> int:
        stream, size = job
        rng = make_rng(seed, stream)
        pts = rng.uniform(0.0, 1.0, size=(size, fam.dim)) * (hi - lo) + lo
        return int(index.contains(pts).sum())

    hits = sum(map_ordered(run, list(enumerate(sizes))))
    p = hits / samples
    se = box * math.sqrt(p * (1.0 - p) / samples)
    return VolumeEstimate(box * p, se, "monte-carlo", samples=samples)


def _grid_volume(fam: TubeFamily, resolution: int) -> VolumeEstimate:
    index = TubeIndex(fam)
    lo, hi = index.lo, index.hi
    h = float(np.max(hi - lo)) / resolution
    shape = np.maximum(1, np.round((hi - lo) / h).astype(int))
    axes = [lo[d] + (np.arange(shape[d]) + 0.5) * h for d in range(fam.dim)]
    grid = np.zeros(tuple(shape), dtype=bool)
    # Stream slices along the first axis; a full 3D mesh is too large.
    tail = np.meshgrid(*axes[1:], indexing="ij") if fam.dim > 1 else []
    tail = [m.ravel() for m in tail]
    for i, x0 in enumerate(axes[0]):
        cols = [np.full(len(tail[0]) if tail else 1, x0)] + tail
        pts = np.stack(cols, axis=1)
        grid[i] = index.contains(pts).reshape(grid.shape[1:])
    cell = h**fam.dim
    value = float(grid.sum()) * cell
    # Discretization band: half a cell of volume per boundary face.
    faces = 0
    for d in range(fam.dim):
        faces += int(np.sum(np.diff(grid, axis=d) != 0))
        sl = [slice(None)] * fam.dim
        sl[d] = [0, -1]
        faces += int(grid[tuple(sl)].sum())
    return VolumeEstimate(value, 0.5 * faces * cell, "grid", resolution=resolution)


def union_volume(
    fam: TubeFamily,
    method: str = "monte-carlo",
    samples: int = 1_000_000,
    resolution: int = 256,
    seed: int = 0,
) -> VolumeEstimate:
    """Volume of the union of the family's tubes.

    grid: occupied-cell count on an axis lattice over the bounding box,
    with the discretization band reported as the error.  monte-carlo:
    hit fraction of uniform box samples, with the binomial std error.
    """
    if method == "monte-carlo":
        if samples < 1:
            raise TubeError("need at least one sample")
        return _mc_volume(fam, samples, seed)
    if method == "grid":
        if resolution < 2:
            raise TubeError("resolution must be at least 2")
        return _grid_volume(fam, resolution)
    raise TubeError(f"unknown method {method!r}")


def kakeya_ratio(fam: TubeFamily, estimate: VolumeEstimate) -> float:
    """Union volume divided by the sum of individual tube volumes."""
    return estimate.value / family_total_volume(fam)
