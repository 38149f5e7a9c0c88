"""Complex line families on the Heisenberg surface in C^3.

The surface {Im z1 = Im(z2 conj(z3))}, cut to the polydisc
|z_i| <= 2, carries a four-real-parameter family of complex line
segments.  Their delta-tubes keep total volume of constant order
while the union sits inside the delta-neighbourhood of the surface,
whose volume is only ~ delta: over C the strong discretized volume
bound fails outright, and this module measures that failure.

Two charts appear below.  The historical chart (z, w + a z,
z conj(w) + b) lands on the surface only for real w with a b = 1 + w^2;
the gauge-fixed chart (b + conj(w) z, z, w + a z) with a, b real lies
on it identically, so the full parameter lattice is usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .parallel import map_ordered
from .rng import make_rng
from .tubelab.core import VolumeEstimate

__all__ = [
    "CPoint3",
    "ComplexLineParams",
    "ComplexTubeFamily",
    "MEMBERSHIP_CALIBRATION",
    "membership_defect",
    "complex_line_point",
    "complex_segment_points",
    "surface_line_point",
    "surface_segment_points",
    "lattice_count",
    "complex_tube_volume",
    "build_complex_family",
    "heisenberg_neighborhood_volume",
]

# Smallest round constant c such that every point of a delta-tube around
# a family segment has defect <= c*delta.  Fixed by the containment
# experiment at delta = 1/8: sampled worst-stretch tubes reach
# defect/delta = 1.79, and the gradient bound sqrt(1 + |z2|^2 + |z3|^2)
# plus the delta/2 curvature term caps the sup at 2.07.
MEMBERSHIP_CALIBRATION = 2.1

# Volume of the sampling domain: three independent discs of radius 2.
_POLYDISC_VOLUME = (4.0 * math.pi) ** 3

_MC_CHUNK = 1 << 18

_BOUND_TOL = 1e-12


class HeisenbergError(ValueError):
    """Raised for parameters outside the family's contracts."""


@dataclass(frozen=True)
class CPoint3:
    """Point of C^3 stored as three Re/Im float pairs."""

    re1: float
    im1: float
    re2: float
    im2: float
    re3: float
    im3: float

    @classmethod
    def from_complex(cls, z1: complex, z2: complex, z3: complex) -> "CPoint3":
        return cls(z1.real, z1.imag, z2.real, z2.imag, z3.real, z3.imag)

    @property
    def z1(self) -> complex:
        return complex(self.re1, self.im1)

    @property
    def z2(self) -> complex:
        return complex(self.re2, self.im2)

    @property
    def z3(self) -> complex:
        return complex(self.re3, self.im3)


@dataclass(frozen=True)
class ComplexLineParams:
    """Line parameters (a, b, w): two reals and a complex, all in the unit ball."""

    a: float
    b: float
    w: complex

    def __post_init__(self):
        if not (
            abs(self.a) <= 1.0 + _BOUND_TOL
            and abs(self.b) <= 1.0 + _BOUND_TOL
            and abs(self.w) <= 1.0 + _BOUND_TOL
        ):
            raise HeisenbergError("line parameters must satisfy |a|,|b|,|w| <= 1")

    def box_coords(self) -> tuple[float, float, float, float]:
        """The parameter as a point of the real box [-1,1]^4."""
        return (self.a, self.b, self.w.real, self.w.imag)


def membership_defect(p: CPoint3) -> float:
    """Distance of a point from the surface equation: |Im z1 - Im(z2 conj(z3))|."""
    return abs(p.z1.imag - (p.z2 * p.z3.conjugate()).imag)


def _defect(z1: np.ndarray, z2: np.ndarray, z3: np.ndarray) -> np.ndarray:
    return np.abs(z1.imag - (z2 * np.conj(z3)).imag)


def _disc_spiral(n: int, radius: float) -> np.ndarray:
    """n quasi-uniform points of the closed disc, on a golden-angle spiral."""
    k = np.arange(n)
    r = radius * np.sqrt((k + 0.5) / n)
    phi = k * (math.pi * (3.0 - math.sqrt(5.0)))
    return r * np.exp(1j * phi)


def complex_line_point(params: ComplexLineParams, z: complex) -> CPoint3:
    """Historical chart: z maps to (z, w + a z, z conj(w) + b).

    On the surface only for real w with a b = 1 + w^2; kept for the
    defect diagnostics.  Family construction uses surface_line_point.
    """
    a, b, w = params.a, params.b, params.w
    return CPoint3.from_complex(z, w + a * z, z * w.conjugate() + b)


def complex_segment_points(params: ComplexLineParams, n: int) -> list[CPoint3]:
    """Historical chart sampled over the core disc |z| <= 1/2."""
    if n < 1:
        raise HeisenbergError("need at least one sample")
    return [complex_line_point(params, complex(z)) for z in _disc_spiral(n, 0.5)]


def surface_line_point(params: ComplexLineParams, z: complex) -> CPoint3:
    """Gauge-fixed chart: z maps to (b + conj(w) z, z, w + a z).

    Exactly on the surface for every parameter choice: both sides of
    the defining equation reduce to Im(conj(w) z) since a and b are
    real.  All coordinates stay inside the polydisc for |z| <= 1/2.
    """
    a, b, w = params.a, params.b, params.w
    return CPoint3.from_complex(b + w.conjugate() * z, z, w + a * z)


def surface_segment_points(params: ComplexLineParams, n: int) -> list[CPoint3]:
    """Gauge-fixed chart sampled over the core disc |z| <= 1/2."""
    if n < 1:
        raise HeisenbergError("need at least one sample")
    return [surface_line_point(params, complex(z)) for z in _disc_spiral(n, 0.5)]


def _inverse_delta(delta: float) -> int:
    inv = round(1.0 / delta)
    if inv < 1 or abs(inv * delta - 1.0) > 1e-9:
        raise HeisenbergError("1/delta must be a positive integer")
    return inv


def _disc_lattice_count(inv: int) -> int:
    # integer points (i, j) with i^2 + j^2 <= inv^2, exact arithmetic
    return sum(
        2 * math.isqrt(inv * inv - i * i) + 1 for i in range(-inv, inv + 1)
    )


def lattice_count(delta: float) -> int:
    """Size of the admissible parameter lattice.

    (delta Z)^4 cut to [-1,1]^4 and then to the disc |w| <= 1, the
    admissible subset where the parameter contract holds; the a and b
    axes keep all 2/delta + 1 ticks.
    """
    inv = _inverse_delta(delta)
    return (2 * inv + 1) ** 2 * _disc_lattice_count(inv)


def complex_tube_volume(delta: float) -> float:
    """Volume model for one complex delta-tube: (pi delta^2)^2 * (pi/4).

    Squared disc cross-section times the area of the core disc
    |z| <= 1/2; the parameter-dependent stretch of the chart, between
    1 and 3, is deliberately dropped from the model.
    """
    return (math.pi * delta**2) ** 2 * (math.pi / 4.0)


@dataclass(frozen=True)
class ComplexTubeFamily:
    """Parameter family with pairwise sup-distance >= delta in the box."""

    delta: float
    params: tuple[ComplexLineParams, ...]

    def __post_init__(self):
        if not self.params:
            raise HeisenbergError("family must be nonempty")
        box = np.array([p.box_coords() for p in self.params])
        # Lattice-aligned families are validated by cell uniqueness;
        # pairwise checking is quadratic and reserved for small ones.
        idx = np.rint(box / self.delta)
        if np.max(np.abs(idx * self.delta - box)) <= 1e-9 * self.delta:
            cells = {tuple(row) for row in idx.astype(int)}
            if len(cells) == len(self.params):
                return
            raise HeisenbergError("duplicate parameter point")
        if len(self.params) > 2048:
            raise HeisenbergError(
                "off-lattice family too large for pairwise separation check"
            )
        diff = np.abs(box[:, None, :] - box[None, :, :]).max(axis=2)
        np.fill_diagonal(diff, np.inf)
        if diff.min() < self.delta * (1.0 - 1e-12):
            raise HeisenbergError("parameters closer than delta in sup-distance")

    def __len__(self) -> int:
        return len(self.params)


def build_complex_family(delta: float) -> ComplexTubeFamily:
    """Lattice parameters (delta Z)^4 cut to [-1,1]^4 and |w| <= 1.

    The disc cut keeps the parameter contract |w| <= 1, which the box
    corners would break.  Under the gauge-fixed chart every remaining
    lattice point is admissible: the defect vanishes identically along
    each segment, which the build verifies on a seeded spot-check
    before returning.
    """
    inv = _inverse_delta(delta)
    ticks = [k * delta for k in range(-inv, inv + 1)]
    inside = [
        complex(wr, wi)
        for wr in ticks
        for wi in ticks
        if abs(complex(wr, wi)) <= 1.0 + _BOUND_TOL
    ]
    params = tuple(
        ComplexLineParams(a, b, w) for a in ticks for b in ticks for w in inside
    )
    if len(params) != lattice_count(delta):
        raise HeisenbergError("lattice enumeration disagrees with its count")
    rng = make_rng(0, 0)
    probe = rng.choice(len(params), size=min(len(params), 128), replace=False)
    worst = 0.0
    for i in probe:
        for q in surface_segment_points(params[int(i)], 16):
            worst = max(worst, membership_defect(q))
    if worst > 1e-9:
        raise HeisenbergError("segment left the surface; chart is broken")
    return ComplexTubeFamily(delta, params)


def heisenberg_neighborhood_volume(
    delta: float, samples: int, seed: int = 0
) -> VolumeEstimate:
    """Monte Carlo volume of {defect <= delta} in the radius-2 polydisc.

    Upper-bounds the volume of any union of family tubes once delta is
    rescaled by MEMBERSHIP_CALIBRATION, since tubes live where the
    defect is small.
    """
    if samples < 10**4:
        raise HeisenbergError("need at least 10^4 samples")
    n_chunks = max(1, math.ceil(samples / _MC_CHUNK))
    sizes = [_MC_CHUNK] * (n_chunks - 1) + [samples - _MC_CHUNK * (n_chunks - 1)]

    def run(job) -> int:
        stream, size = job
        rng = make_rng(seed, stream)
        r = 2.0 * np.sqrt(rng.uniform(0.0, 1.0, size=(size, 3)))
        phi = rng.uniform(0.0, 2.0 * math.pi, size=(size, 3))
        z = r * np.exp(1j * phi)
        return int((_defect(z[:, 0], z[:, 1], z[:, 2]) <= delta).sum())

    hits = sum(map_ordered(run, list(enumerate(sizes))))
    p = hits / samples
    se = _POLYDISC_VOLUME * math.sqrt(p * (1.0 - p) / samples)
    return VolumeEstimate(_POLYDISC_VOLUME * p, se, "monte-carlo", samples=samples)
