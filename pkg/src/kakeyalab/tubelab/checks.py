"""Structural checks on tube families.

Pairwise-overlap flags, the prism occupancy axiom, coarse-scale
fattening and the sticky count test.  All sampling is seeded and
chunked deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..rng import make_rng
from .core import (
    Prism,
    Tube,
    TubeError,
    TubeFamily,
    _segment_distance_batch,
    family_bbox,
)

__all__ = [
    "PairOverlap",
    "DistinctReport",
    "essentially_distinct_check",
    "PrismCheck",
    "WolffReport",
    "wolff_axiom_check",
    "FattenResult",
    "fatten",
    "StickyScale",
    "StickyReport",
    "sticky_check",
]


def _perp_frame(omegas: np.ndarray) -> tuple[np.ndarray, ...]:
    """Orthonormal basis of each direction's perpendicular plane.

    Deterministic: seeded from the coordinate axis least aligned with
    omega, so axis-parallel directions get axis-aligned frames.
    """
    n, dim = omegas.shape
    if dim == 2:
        return (np.stack([-omegas[:, 1], omegas[:, 0]], axis=1),)
    axis = np.argmin(np.abs(omegas), axis=1)
    h = np.zeros_like(omegas)
    h[np.arange(n), axis] = 1.0
    e1 = h - np.einsum("ij,ij->i", h, omegas)[:, None] * omegas
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(omegas, e1)
    return e1, e2


@dataclass(frozen=True)
class PairOverlap:
    """Sampled overlap of tube j inside tube i (fraction of |T_i|)."""

    i: int
    j: int
    estimate: float
    std_error: float


@dataclass(frozen=True)
class DistinctReport:
    n_pairs: int
    n_sampled: int
    samples_per_pair: int
    flagged: tuple[PairOverlap, ...]

    @property
    def ok(self) -> bool:
        return not self.flagged


def essentially_distinct_check(
    fam: TubeFamily, samples_per_pair: int = 64, seed: int = 0
) -> DistinctReport:
    """Flag pairs whose overlap, sampled inside the first tube, exceeds
    half its volume by more than three standard errors.

    Pairs whose core segments stay farther apart than 2 delta cannot
    meet; they are recorded as zero overlap without sampling.

    Direction separation by delta does not by itself keep a pair below
    the half-volume line: two length-1 tubes through a common point
    with directions a full delta apart still share about 0.69 of a
    tube, so flags on clustered families are expected and genuine.
    """
    tubes = fam.tubes
    n = len(tubes)
    d = fam.dim
    A = np.array([t.a for t in tubes])
    W = np.array([t.omega for t in tubes])
    L = np.array([t.length for t in tubes])
    B = A + L[:, None] * W
    cut = 2.0 * fam.delta + 1e-12

    # Core-distance prefilter, in row blocks to bound memory.
    keep_i = []
    keep_j = []
    block_rows = max(1, (1 << 21) // max(n, 1))
    for i0 in range(0, n, block_rows):
        i1 = min(i0 + block_rows, n)
        ii, jj = np.meshgrid(np.arange(i0, i1), np.arange(n), indexing="ij")
        mask = jj > ii
        ii = ii[mask]
        jj = jj[mask]
        if len(ii) == 0:
            continue
        dist = _segment_distance_batch(A[ii], B[ii], A[jj], B[jj])
        near = dist <= cut
        keep_i.append(ii[near])
        keep_j.append(jj[near])
    I = np.concatenate(keep_i) if keep_i else np.empty(0, dtype=int)
    J = np.concatenate(keep_j) if keep_j else np.empty(0, dtype=int)

    flagged = []
    S = samples_per_pair
    pair_block = max(1, (1 << 21) // max(S, 1))
    for bidx, p0 in enumerate(range(0, len(I), pair_block)):
        bi = I[p0 : p0 + pair_block]
        bj = J[p0 : p0 + pair_block]
        rng = make_rng(seed, bidx)
        t = rng.uniform(0.0, 1.0, size=(len(bi), S)) * L[bi][:, None]
        pts = A[bi][:, None, :] + t[..., None] * W[bi][:, None, :]
        if d == 2:
            (e1,) = _perp_frame(W[bi])
            r = fam.delta * rng.uniform(-1.0, 1.0, size=(len(bi), S))
            pts = pts + r[..., None] * e1[:, None, :]
        else:
            e1, e2 = _perp_frame(W[bi])
            rad = fam.delta * np.sqrt(rng.uniform(0.0, 1.0, size=(len(bi), S)))
            ang = rng.uniform(0.0, 2.0 * math.pi, size=(len(bi), S))
            pts = (
                pts
                + (rad * np.cos(ang))[..., None] * e1[:, None, :]
                + (rad * np.sin(ang))[..., None] * e2[:, None, :]
            )
        rel = pts - A[bj][:, None, :]
        tj = np.einsum("psd,pd->ps", rel, W[bj])
        perp2 = np.einsum("psd,psd->ps", rel, rel) - tj * tj
        hit = (tj >= 0.0) & (tj <= L[bj][:, None]) & (perp2 <= fam.delta**2)
        phat = hit.mean(axis=1)
        se = np.sqrt(phat * (1.0 - phat) / S)
        bad = phat > 0.5 + 3.0 * se
        for k in np.flatnonzero(bad):
            flagged.append(
                PairOverlap(int(bi[k]), int(bj[k]), float(phat[k]), float(se[k]))
            )
    return DistinctReport(n * (n - 1) // 2, len(I), S, tuple(flagged))


@dataclass(frozen=True)
class PrismCheck:
    kind: str
    count: int
    bound: float
    prism: Prism

    @property
    def ratio(self) -> float:
        return self.count / self.bound


@dataclass(frozen=True)
class WolffReport:
    n_checked: int
    violations: tuple[PrismCheck, ...]
    slab: PrismCheck
    max_ratio: float

    @property
    def ok(self) -> bool:
        return not self.violations


def _prism_count(
    prism: Prism, A: np.ndarray, B: np.ndarray, W: np.ndarray, delta: float
) -> int:
    """Tubes wholly inside the closed prism.

    Along prism axis f the tube bulges delta*sqrt(1-(f.omega)^2) beyond
    its core, so containment is both endpoints clearing every face by
    that margin.
    """
    ndw = W @ prism.frame.T
    margin = delta * np.sqrt(np.maximum(0.0, 1.0 - ndw * ndw))
    h = prism.half_extents[None, :] + 1e-15
    ca = np.abs((A - prism.center) @ prism.frame.T) + margin
    cb = np.abs((B - prism.center) @ prism.frame.T) + margin
    return int(np.sum((ca <= h).all(axis=1) & (cb <= h).all(axis=1)))


def wolff_axiom_check(
    fam: TubeFamily, n_prisms: int = 2000, seed: int = 0
) -> WolffReport:
    """Prism occupancy axiom: no prism R contains more than |R|/delta^2
    tubes.  Checks seeded random prisms, prisms fitted to the family's
    principal axes, and the slab around the unit z=0 square.
    """
    if fam.dim != 3:
        raise TubeError("the prism occupancy check is three-dimensional only")
    d = fam.delta
    A = np.array([t.a for t in fam.tubes])
    W = np.array([t.omega for t in fam.tubes])
    L = np.array([t.length for t in fam.tubes])
    B = A + L[:, None] * W
    lo, hi = family_bbox(fam)

    checks: list[PrismCheck] = []

    def add(kind: str, prism: Prism) -> PrismCheck:
        count = _prism_count(prism, A, B, W, d)
        bound = prism.volume() / (d * d)
        row = PrismCheck(kind, count, bound, prism)
        checks.append(row)
        return row

    slab = add(
        "slab",
        Prism(
            np.array([0.5, 0.5, 0.0]),
            np.array([0.5 + d, 0.5 + d, d]),
            np.eye(3),
        ),
    )

    mids = 0.5 * (A + B)
    mu = mids.mean(axis=0)
    cov = np.cov((mids - mu).T) + 1e-12 * np.eye(3)
    _, vecs = np.linalg.eigh(cov)
    frame = vecs.T[::-1]  # leading axis first
    spread = np.abs((mids - mu) @ frame.T).max(axis=0) + d + 1e-9
    for thin in range(3):
        half = spread.copy()
        if thin:
            half[-thin:] = np.maximum(2.0 * d, 1e-6)
        add("fitted", Prism(mu, half, frame))

    rng = make_rng(seed, 0)
    span = float(np.linalg.norm(hi - lo)) / 2.0
    for _ in range(n_prisms):
        center = rng.uniform(0.0, 1.0, size=3) * (hi - lo) + lo
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        half = np.exp(rng.uniform(math.log(d), math.log(max(span, 2 * d)), size=3))
        add("random", Prism(center, half, q))

    violations = tuple(c for c in checks if c.count > c.bound)
    max_ratio = max(c.ratio for c in checks)
    return WolffReport(len(checks), violations, slab, max_ratio)


@dataclass(frozen=True)
class FattenResult:
    """Greedy coarsening of a family to scale rho.

    assignment[i] is the position in kept_indices of the kept tube that
    absorbed input tube i; kept tubes absorb themselves.
    """

    family: TubeFamily
    kept_indices: tuple[int, ...]
    assignment: tuple[int, ...]


def fatten(fam: TubeFamily, rho: float) -> FattenResult:
    """Extract rho-tubes greedily in input order.

    A tube is absorbed by the first kept tube whose core line is within
    rho in position (sup-norm in the kept tube's perpendicular frame)
    and rho in direction (antipodal chord), both strictly; otherwise it
    is kept and fattened to radius rho.
    """
    if rho < fam.delta:
        raise TubeError(f"rho must be at least delta, got {rho} < {fam.delta}")
    tubes = fam.tubes
    W = np.array([t.omega for t in tubes])
    A = np.array([t.a for t in tubes])
    frames = _perp_frame(W)

    kept: list[int] = []
    assign: list[int] = []
    kw = np.empty((0, fam.dim))
    ka = np.empty((0, fam.dim))
    kf = [np.empty((0, fam.dim)) for _ in frames]
    for i in range(len(tubes)):
        if kept:
            diff_m = np.linalg.norm(kw - W[i], axis=1)
            diff_p = np.linalg.norm(kw + W[i], axis=1)
            dir_close = np.minimum(diff_m, diff_p) < rho
            off = A[i] - ka
            pos = np.abs(np.einsum("kd,kd->k", off, kf[0]))
            for f in kf[1:]:
                pos = np.maximum(pos, np.abs(np.einsum("kd,kd->k", off, f)))
            close = np.flatnonzero(dir_close & (pos < rho))
        else:
            close = np.empty(0, dtype=int)
        if close.size:
            assign.append(int(close[0]))
        else:
            assign.append(len(kept))
            kept.append(i)
            kw = np.vstack([kw, W[i]])
            ka = np.vstack([ka, A[i]])
            kf = [np.vstack([f, fr[i]]) for f, fr in zip(kf, frames)]
    fat = tuple(
        Tube(fam.dim, tubes[i].a, tubes[i].omega, rho, tubes[i].length) for i in kept
    )
    return FattenResult(
        TubeFamily(rho, fat, fam.placement_tag), tuple(kept), tuple(assign)
    )


@dataclass(frozen=True)
class StickyScale:
    rho: float
    n_kept: int
    min_norm: float
    max_norm: float
    ok: bool


@dataclass(frozen=True)
class StickyReport:
    """Per-scale normalized child counts count * (delta/rho)^2.

    The verdict can depend on the greedy extraction order; kept tubes
    are always extracted in input order here.
    """

    delta: float
    c_bound: float
    scales: tuple[StickyScale, ...]
    order_note: str = "greedy extraction in input order"

    @property
    def sticky(self) -> bool:
        return all(s.ok for s in self.scales)


def sticky_check(
    fam: TubeFamily, rhos: list[float] | None = None, c_bound: float = 4.0
) -> StickyReport:
    """Sticky test: at every scale rho each kept rho-tube should absorb
    about (rho/delta)^2 tubes, within the factor c_bound.
    """
    if rhos is None:
        k = round(math.log2(1.0 / fam.delta))
        if abs(fam.delta * 2**k - 1.0) > 1e-9:
            raise TubeError("the default scale ladder needs a dyadic delta")
        rhos = [fam.delta * 2**s for s in range(k + 1)]
    rows = []
    for rho in rhos:
        res = fatten(fam, rho)
        counts = np.bincount(res.assignment, minlength=len(res.kept_indices))
        norm = counts * (fam.delta / rho) ** 2
        lo = float(norm.min())
        hi = float(norm.max())
        rows.append(
            StickyScale(rho, len(res.kept_indices), lo, hi, lo >= 1.0 / c_bound and hi <= c_bound)
        )
    return StickyReport(fam.delta, c_bound, tuple(rows))
