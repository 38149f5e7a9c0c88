"""Direction nets and family placement.

Directions live on the half-sphere with antipodes identified; distance
is the chord metric min(|u - v|, |u + v|).  Nets are delta-separated
and maximal: separated by construction, maximal by a greedy pass over
a dense candidate stream followed by lattice and random augmentation.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from ..rng import make_rng
from .core import Tube, TubeError, TubeFamily

__all__ = [
    "direction_chord",
    "generate_directions",
    "generate_family",
    "parallel_lines_family",
]

def direction_chord(u: np.ndarray, v: np.ndarray) -> float:
    """Chord distance with antipodal identification."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    return min(float(np.linalg.norm(u - v)), float(np.linalg.norm(u + v)))


def _chords_to_set(pts: np.ndarray, kept: np.ndarray) -> np.ndarray:
    """Min chord distance from each row of pts to the kept set."""
    k2 = np.sum(kept**2, axis=1)[None, :]
    out = np.empty(len(pts))
    step = max(1, (1 << 22) // max(len(kept), 1))
    for a in range(0, len(pts), step):
        blk = pts[a : a + step]
        d2 = np.sum(blk**2, axis=1)[:, None] + k2
        # |p-k|^2 = |p|^2+|k|^2-2p.k, |p+k|^2 = ... + 2p.k; min over sign.
        near = d2 - 2.0 * np.abs(blk @ kept.T)
        out[a : a + step] = np.sqrt(np.maximum(near.min(axis=1), 0.0))
    return out


# Relative padding on the separation target.  Spacings are computed
# for delta*(1+pad), so the 1e-16-scale rounding of the emitted float
# coordinates can never drag a chord below delta itself.
_PAD = 1e-11


def _directions_2d(delta: float) -> np.ndarray:
    """Uniform angular lattice on [0, pi), the maximal separated net.

    n points step pi/n apart have chord spacing 2 sin(pi/(2n)); the
    largest n keeping that >= delta is floor(pi / (2 asin(delta/2))).
    """
    dpad = delta * (1.0 + _PAD)
    n = int(math.pi / (2.0 * math.asin(dpad / 2.0)))
    theta = np.arange(n) * (math.pi / n)
    return np.stack([np.cos(theta), np.sin(theta)], axis=1)


def _directions_3d(delta: float) -> np.ndarray:
    """Staggered latitude-band net on the upper half-sphere.

    The equator ring comes first and keeps only half its azimuths, so
    the identification of antipodes cannot bring two of its points
    within delta of each other.  Higher bands sit 2 asin(delta/2)
    apart in polar angle, which keeps inter-band chords at least
    delta, including chords to reflected lower-half images; within a
    band the azimuth step is the smallest giving chord >= delta.
    Cell half-diagonals stay well under delta, so the net is maximal:
    no direction is delta-far from every chosen one.
    """
    dpad = delta * (1.0 + _PAD)
    beta = 2.0 * math.asin(dpad / 2.0)

    def ring(polar: float, span: float, stagger: int) -> np.ndarray:
        r = math.sin(polar)
        z = math.cos(polar)
        if dpad >= 2.0 * r:
            # the whole ring has diameter 2r; it can hold one point only
            m = 1
        else:
            step = 2.0 * math.asin(dpad / (2.0 * r))
            m = max(1, int(math.floor(span / step)))
        phi = (np.arange(m) + 0.5 * stagger) * (span / m)
        return np.stack([r * np.cos(phi), r * np.sin(phi), np.full(m, z)], axis=1)

    rows = [ring(math.pi / 2.0, math.pi, 0)]
    i = 0
    polar = math.pi / 2.0
    while polar - beta > 1e-9:
        i += 1
        polar = math.pi / 2.0 - i * beta
        rows.append(ring(polar, 2.0 * math.pi, i % 2))
    if 2.0 * math.sin(polar / 2.0) >= dpad:
        rows.append(np.array([[0.0, 0.0, 1.0]]))
    return np.concatenate(rows)


_NET_CACHE: dict[tuple[float, int], np.ndarray] = {}


def generate_directions(delta: float, dim: int) -> np.ndarray:
    """Maximal delta-separated direction net, one representative per line.

    Rows are unit vectors; for dim 2 the angles are uniform on [0, pi),
    for dim 3 representatives have z >= 0.  Deterministic in (delta, dim).
    """
    if not (0.0 < delta < 1.0):
        raise TubeError(f"delta must lie in (0, 1), got {delta}")
    if dim not in (2, 3):
        raise TubeError(f"dim must be 2 or 3, got {dim}")
    key = (delta, dim)
    if key not in _NET_CACHE:
        net = _directions_2d(delta) if dim == 2 else _directions_3d(delta)
        net.setflags(write=False)
        _NET_CACHE[key] = net
    return _NET_CACHE[key]


def _random_ball(rng: np.random.Generator, n: int, dim: int) -> np.ndarray:
    out = np.empty((n, dim))
    have = 0
    while have < n:
        cand = rng.uniform(-1.0, 1.0, size=(2 * (n - have) + 16, dim))
        cand = cand[np.sum(cand**2, axis=1) <= 1.0]
        take = min(len(cand), n - have)
        out[have : have + take] = cand[:take]
        have += take
    return out


_PERRON_CACHE: dict[int, object] = {}


def _perron_tree(m: int):
    if m not in _PERRON_CACHE:
        from ..perron import PerronSpec, build_perron_tree

        _PERRON_CACHE[m] = build_perron_tree(PerronSpec.default(m))
    return _PERRON_CACHE[m]


def generate_family(
    delta: float,
    dim: int,
    placement: str,
    seed: int = 0,
    tree_levels: int = 6,
) -> TubeFamily:
    """One tube per net direction, anchored by the placement rule.

    bush: every core segment starts at the origin.
    random: anchors drawn uniformly from the unit ball.
    perron-base (dim 2 only): cores are tracked segments of the shifted
    tree with `tree_levels` levels, rotated into the sector that holds
    the requested direction.
    """
    dirs = generate_directions(delta, dim)
    if placement == "bush":
        tubes = [Tube(dim, np.zeros(dim), w, delta) for w in dirs]
    elif placement == "random":
        anchors = _random_ball(make_rng(seed, 0), len(dirs), dim)
        tubes = [Tube(dim, a, w, delta) for a, w in zip(anchors, dirs)]
    elif placement == "perron-base":
        if dim != 2:
            raise TubeError("perron-base placement is two-dimensional only")
        tubes = [
            _tree_segment_tube(float(math.atan2(w[1], w[0])), delta, tree_levels)
            for w in dirs
        ]
    else:
        raise TubeError(f"unknown placement {placement!r}")
    return TubeFamily(delta, tuple(tubes), placement)


def _tree_segment_tube(theta: float, delta: float, m: int) -> Tube:
    """Unit tube along the tracked tree segment at line angle theta.

    The tree's own fan realises line angles in [60, 120) degrees; the
    other two thirds come from the 120/240 degree rotations about the
    apex, exactly as in the three-sector assembly of the full set.
    """
    from ..exactgeom import RigidMotion, Segment2
    from ..perron import APEX, BASE_HALF, covering_segment

    tree = _perron_tree(m)
    deg = math.degrees(theta % math.pi)
    if 60.0 <= deg < 120.0:
        turn = 0
    elif deg < 60.0:
        turn = 120
    else:
        turn = 240
    sector_deg = (deg - turn) % 180.0
    t = math.tan(math.radians(sector_deg - 90.0))
    bh = float(BASE_HALF) * (1.0 - 1e-14)
    seg, _ = covering_segment(tree, Fraction(min(max(t, -bh), bh)))
    if turn:
        motion = RigidMotion.rotation(turn, APEX)
        seg = Segment2(motion.apply(seg.p), motion.apply(seg.q))
    p = np.array([float(seg.p.x), float(seg.p.y)])
    q = np.array([float(seg.q.x), float(seg.q.y)])
    w = q - p
    w /= np.linalg.norm(w)
    return Tube(2, p, w, delta)


def parallel_lines_family(delta: float) -> TubeFamily:
    """All tubes joining {(dj, 0, 0)} to {(dk, 1, 0)}, j, k in 1..1/d.

    The scale must be an exact reciprocal integer; the family has
    delta^-2 tubes and realises the two-parallel-lines construction.
    """
    n_f = 1.0 / delta
    n = round(n_f)
    if n < 2 or abs(n_f - n) > 1e-9:
        raise TubeError(f"1/delta must be an integer >= 2, got {n_f}")
    tubes = []
    for j in range(1, n + 1):
        a = np.array([delta * j, 0.0, 0.0])
        for k in range(1, n + 1):
            b = np.array([delta * k, 1.0, 0.0])
            chord = b - a
            length = float(np.linalg.norm(chord))
            tubes.append(Tube(3, a, chord / length, delta, length))
    return TubeFamily(delta, tuple(tubes), "parallel-lines")
