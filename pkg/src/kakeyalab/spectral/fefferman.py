"""Low-pass pile-up experiment: packets hung below a tree base.

Frequency rectangles of width r cover directions at spacing r; each
packet's dual tube (1/r wide, 1/r^2 long) hangs below the base of the
tree region, scaled so the tree is 1/r^2 tall, pointing along its
tracked direction.  The unit low-pass filter halves every rectangle
radially, which doubles each tube along its length, and the doubles
pile up inside the tree region.  The report compares L^p norms of the
packet sum before and after filtering.

A single tree covers the 60 degree direction sector; the full-circle
variant places three rotated copies and reuses each spatial placement
for the antipodal frequency rectangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..parallel import map_ordered
from ..perron import PerronTree, covering_segment
from .grid import GridField, SpectralError, dft_inverse, lp_norm
from .multipliers import MultiplierSpec, multiplier_symbol
from .packets import FreqRect, WavePacket, _check_grid, packet_symbol_block

__all__ = [
    "PacketDiagnostic",
    "FeffermanReport",
    "minimal_grid",
    "plan_placements",
    "fefferman_experiment",
    "single_packet_ratio",
]

_SECTOR = math.pi / 3
_HEATMAP_BINS = 128


@dataclass(frozen=True)
class PacketDiagnostic:
    """Per-packet record: where it went and what the filter kept.

    power is the frequency-side L^2 mass of the packet's symbol;
    kept_fraction is the share of it surviving the unit low-pass cut.
    """

    index: int
    angle: float
    leaf: int
    rotation: int
    center: np.ndarray
    power: float
    kept_fraction: float


@dataclass(frozen=True)
class FeffermanReport:
    """Norm comparison for one (r, p) run, with per-packet diagnostics
    and a coarse |Sf| occupancy map for rendering."""

    r: float
    p: float
    N: int
    L: float
    n_packets: int
    input_norm: float
    output_norm: float
    packets: tuple[PacketDiagnostic, ...]
    heatmap: np.ndarray

    @property
    def ratio(self) -> float:
        return self.output_norm / self.input_norm


def minimal_grid(r: float) -> tuple[int, float]:
    """Smallest canonical grid for scale r: period 4/r^2 (the tube plus
    clearance), N the next power of two whose Nyquist clears the circle."""
    L = 4.0 / r ** 2
    n = max(8, int(math.ceil(2.0 * L * (1.0 + r))))
    return 1 << (n - 1).bit_length(), L


def _abscissa(phi: float) -> Fraction:
    """Base abscissa of the direction at angle phi, nudged inside the
    sector when rounding lands exactly on an endpoint."""
    return Fraction(-math.cos(phi) / math.sin(phi))


def _rotate(v: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return v
    c, s = math.cos(k * _SECTOR), math.sin(k * _SECTOR)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def plan_placements(tree: PerronTree, r: float, L: float,
                    full_circle: bool = False):
    """Packets for every covered direction: list of (WavePacket, leaf, k).

    The tree base line is embedded at height 0.6 L, centred at L/2, and
    scaled by 1/r^2.  Each tube centre sits half a tube length below its
    tracked base point, so the double reaches into the tree.  k is the
    rotation index of the tree copy handling the direction (always 0
    without full_circle).
    """
    lam = 1.0 / r ** 2
    origin = np.array([L / 2.0, 0.6 * L])
    if full_circle:
        n = int(2.0 * math.pi / r)
        angles = [(i + 0.5) * r for i in range(n)]
    else:
        n = int(_SECTOR / r)
        angles = [_SECTOR + (i + 0.5) * r for i in range(n)]
    out = []
    for phi in angles:
        psi = phi % math.pi
        if psi < _SECTOR:
            k = -1
        elif psi <= 2 * _SECTOR:
            k = 0
        else:
            k = 1
        phi0 = psi - k * _SECTOR
        t = _abscissa(phi0)
        for _ in range(4):
            try:
                seg, leaf = covering_segment(tree, t)
                break
            except Exception:
                t = Fraction(math.nextafter(float(t), 0.0))
        else:
            raise SpectralError(f"direction {phi} missed the sector")
        base = np.array([float(seg.q.x), float(seg.q.y)])
        n_hat = np.array([math.cos(phi0), math.sin(phi0)])
        center = (origin + lam * _rotate(base, k)
                  - (lam / 2.0) * _rotate(n_hat, k))
        out.append((WavePacket(FreqRect(phi, r), center), leaf, k))
    return out


def _norm_and_filtered(fhat: np.ndarray, N: int, L: float, p: float):
    """Consume the accumulated symbol array: input norm, then the
    filtered field's norm and occupancy map."""
    field = dft_inverse(GridField(2, N, N / L, fhat))
    in_norm = lp_norm(field, p)
    del field
    freqs = np.fft.fftfreq(N, d=L / N)
    sym = multiplier_symbol(MultiplierSpec.lowpass_unit(), [freqs, freqs])
    fhat *= sym
    del sym
    field = dft_inverse(GridField(2, N, N / L, fhat))
    out_norm = lp_norm(field, p)
    mag = np.abs(field.data)
    b = N // _HEATMAP_BINS
    heat = mag.reshape(_HEATMAP_BINS, b, _HEATMAP_BINS, b).mean(axis=(1, 3))
    return in_norm, out_norm, heat


def fefferman_experiment(tree: PerronTree, r: float, p: float,
                         N: int | None = None, L: float | None = None,
                         full_circle: bool = False) -> FeffermanReport:
    """Build the packet sum for the tree's directions at scale r and
    measure the L^p norm ratio across the unit low-pass filter."""
    if not p >= 1:
        raise SpectralError(f"p must be >= 1, got {p}")
    if N is None or L is None:
        N, L = minimal_grid(r)
    _check_grid(r, N, L)
    placements = plan_placements(tree, r, L, full_circle)
    freqs = np.fft.fftfreq(N, d=L / N)

    def run(job):
        packet, leaf, k = job
        ix, iy, block = packet_symbol_block(packet.theta, packet.y, N, L)
        q = (np.square(freqs[ix])[:, None] + np.square(freqs[iy])[None, :])
        power = np.abs(block) ** 2
        total = power.sum()
        kept = power[q <= 1.0].sum() / total if total > 0 else 0.0
        return ix, iy, block, leaf, k, float(total) / L ** 2, float(kept)

    fhat = np.zeros((N, N), dtype=complex)
    diags = []
    for i, ((packet, _, _), (ix, iy, block, leaf, k, pw, kept)) in enumerate(
            zip(placements, map_ordered(run, placements))):
        fhat[np.ix_(ix, iy)] += block
        diags.append(PacketDiagnostic(i, packet.theta.angle, leaf, k,
                                      packet.y, pw, kept))
    in_norm, out_norm, heat = _norm_and_filtered(fhat, N, L, p)
    return FeffermanReport(r, p, N, L, len(placements), in_norm, out_norm,
                           tuple(diags), heat)


def single_packet_ratio(r: float, p: float,
                        N: int | None = None, L: float | None = None) -> float:
    """Norm ratio for one packet alone: the no-pile-up control."""
    if not p >= 1:
        raise SpectralError(f"p must be >= 1, got {p}")
    if N is None or L is None:
        N, L = minimal_grid(r)
    _check_grid(r, N, L)
    packet = WavePacket(FreqRect(math.pi / 2, r), np.array([L / 2, L / 2]))
    fhat = np.zeros((N, N), dtype=complex)
    ix, iy, block = packet_symbol_block(packet.theta, packet.y, N, L)
    fhat[np.ix_(ix, iy)] = block
    in_norm, out_norm, _ = _norm_and_filtered(fhat, N, L, p)
    return out_norm / in_norm
