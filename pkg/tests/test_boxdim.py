"""Neighbourhood volume, dimension fit, and lower-bound check tests.

Closed-form neighbourhood areas (square, segment stadium, disc) anchor
the volume measurement; the dimension fixtures carry known exponents.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

import kakeyalab.boxdim as bd
from kakeyalab.boxdim import (
    BoxCountCurve,
    DimError,
    kakeya_bound_check,
    minkowski_estimate,
    neighborhood_volume_curve,
)
from kakeyalab.exactgeom.primitives import Point2
from kakeyalab.exactgeom.region import Region2
from kakeyalab.exactgeom.scalar import ExactScalar
from kakeyalab.perron import PerronSpec, build_perron_tree
from kakeyalab.tubelab.generate import parallel_lines_family


def rational_point(x, y):
    return Point2(ExactScalar(Fraction(x)), ExactScalar(Fraction(y)))


def unit_square():
    return Region2.from_polygon([
        rational_point(0, 0), rational_point(1, 0),
        rational_point(1, 1), rational_point(0, 1)])


def cantor_intervals(level):
    iv = [(Fraction(0), Fraction(1))]
    for _ in range(level):
        iv = [piece
              for a, b in iv
              for piece in ((a, a + (b - a) / 3), (b - (b - a) / 3, b))]
    return iv


@pytest.fixture(scope="module")
def tree_region():
    return build_perron_tree(PerronSpec.default(6)).region


class TestCurveValidation:
    def test_rejects_empty(self):
        with pytest.raises(DimError):
            BoxCountCurve(())

    def test_rejects_bad_delta(self):
        with pytest.raises(DimError):
            BoxCountCurve(((1.5, 1.0),))
        with pytest.raises(DimError):
            BoxCountCurve(((0.5, 1.0), (0.5, 1.0)))

    def test_rejects_bad_volume(self):
        with pytest.raises(DimError):
            BoxCountCurve(((0.5, 0.0),))
        with pytest.raises(DimError):
            BoxCountCurve(((0.5, 1.0), (0.25, 2.0)))

    def test_accessors(self):
        c = BoxCountCurve(((0.5, 2.0), (0.25, 1.0)))
        assert c.deltas == (0.5, 0.25)
        assert c.volumes == (2.0, 1.0)
        assert len(c) == 2


class TestVolumes:
    def test_square_matches_formula(self):
        curve = neighborhood_volume_curve(
            unit_square(), [2.0 ** -k for k in range(3, 10)])
        for d, v in curve.entries:
            assert abs(v - (1 + 2 * d) ** 2) <= 0.05 * (1 + 2 * d) ** 2

    def test_segment_matches_stadium_formula(self):
        pts = np.column_stack([np.linspace(0, 1, 1 << 13), np.zeros(1 << 13)])
        curve = neighborhood_volume_curve(pts, [2.0 ** -k for k in range(3, 10)])
        for d, v in curve.entries:
            exact = 2 * d + math.pi * d * d
            assert abs(v - exact) <= 0.05 * exact

    def test_disc_area_approaches_quarter_pi(self):
        denom = 1 << 20
        ring = [rational_point(Fraction(round(math.cos(a) * denom / 2), denom),
                               Fraction(round(math.sin(a) * denom / 2), denom))
                for a in np.linspace(0.0, 2 * math.pi, 512, endpoint=False)]
        curve = neighborhood_volume_curve(
            Region2.from_polygon(ring), [2.0 ** -k for k in range(4, 8)])
        for d, v in curve.entries:
            assert abs(v - math.pi * (0.5 + d) ** 2) <= 0.05 * v
        assert abs(curve.volumes[-1] - math.pi / 4) < 0.03

    def test_rejects_empty_inputs(self):
        with pytest.raises(DimError):
            neighborhood_volume_curve(np.zeros((0, 2)), [0.25])
        with pytest.raises(DimError):
            neighborhood_volume_curve(np.ones((3, 5)), [0.25])
        with pytest.raises(DimError):
            neighborhood_volume_curve(np.array([[np.inf, 0.0]]), [0.25])

    def test_rejects_bad_deltas(self):
        sq = unit_square()
        with pytest.raises(DimError):
            neighborhood_volume_curve(sq, [])
        with pytest.raises(DimError):
            neighborhood_volume_curve(sq, [0.25, 0.5])
        with pytest.raises(DimError):
            neighborhood_volume_curve(sq, [1.5])
        with pytest.raises(DimError):
            neighborhood_volume_curve(sq, [0.25], cell_factor=1.0)


class TestMinkowski:
    def test_square_dimension(self):
        # the coarse scales carry the (1+2d)^2 curvature, which biases
        # the least-squares slope low; the estimate still lands near 2
        curve = neighborhood_volume_curve(
            unit_square(), [2.0 ** -k for k in range(3, 10)])
        est = minkowski_estimate(curve, 2)
        assert 1.9 < est.dimension <= 2.0
        assert est.delta_range == (2.0 ** -4, 2.0 ** -8)

    def test_segment_dimension(self):
        pts = np.column_stack([np.linspace(0, 1, 1 << 13), np.zeros(1 << 13)])
        curve = neighborhood_volume_curve(pts, [2.0 ** -k for k in range(3, 10)])
        est = minkowski_estimate(curve, 2)
        assert abs(est.dimension - 1.0) < 0.05

    def test_cantor_product_dimension(self):
        iv = cantor_intervals(10)
        region = Region2([
            [rational_point(a, 0), rational_point(b, 0),
             rational_point(b, 1), rational_point(a, 1)] for a, b in iv])
        curve = neighborhood_volume_curve(region, [3.0 ** -k for k in range(2, 8)])
        est = minkowski_estimate(curve, 2)
        assert abs(est.dimension - (1 + math.log(2) / math.log(3))) < 0.05

    def test_perfect_power_law_has_zero_residual(self):
        ds = [2.0 ** -k for k in range(3, 10)]
        curve = BoxCountCurve(tuple((d, d ** 0.5) for d in ds))
        est = minkowski_estimate(curve, 2)
        assert abs(est.dimension - 1.5) < 1e-12
        assert est.residual < 1e-12

    def test_clamps_to_ambient_range(self):
        ds = [2.0 ** -k for k in range(3, 10)]
        curve = BoxCountCurve(tuple((d, d ** 3) for d in ds))
        assert minkowski_estimate(curve, 2).dimension == 0.0

    def test_validation(self):
        ds = [2.0 ** -k for k in range(3, 6)]
        short = BoxCountCurve(tuple((d, d) for d in ds))
        with pytest.raises(DimError):
            minkowski_estimate(short, 2)
        ok = BoxCountCurve(tuple((2.0 ** -k, 2.0 ** -k) for k in range(3, 8)))
        with pytest.raises(DimError):
            minkowski_estimate(ok, 4)
        with pytest.raises(DimError):
            minkowski_estimate(ok, 2, trim=2)


class TestKakeyaBound:
    def test_square_is_consistent(self):
        curve = neighborhood_volume_curve(
            unit_square(), [2.0 ** -k for k in range(3, 10)])
        rep = kakeya_bound_check(curve, 0.5)
        # order-one constant; d^-1/2 growth keeps the trend healthy
        assert rep.consistent
        assert 1.0 <= rep.c_epsilon <= 10.0
        assert rep.delta_at_min == 2.0 ** -3

    def test_perron_tree_is_consistent(self, tree_region):
        curve = neighborhood_volume_curve(
            tree_region, [2.0 ** -k for k in range(3, 9)])
        rep = kakeya_bound_check(curve, 0.5)
        assert rep.consistent
        assert rep.c_epsilon > 1.0

    def test_parallel_slab_decays(self):
        fam = parallel_lines_family(1 / 32)
        curve = neighborhood_volume_curve(fam, [2.0 ** -k for k in range(2, 6)])
        rep = kakeya_bound_check(curve, 0.5)
        assert not rep.consistent
        assert rep.ratios[-1] < 0.5 * rep.ratios[0]

    def test_validation(self):
        curve = BoxCountCurve(((0.5, 1.0), (0.25, 0.5)))
        for eps in (0.0, -0.5, 1.5):
            with pytest.raises(DimError):
                kakeya_bound_check(curve, eps)
        assert kakeya_bound_check(curve, 1.0).epsilon == 1.0


class TestInvariants:
    def test_volumes_monotone_on_tree(self, tree_region):
        curve = neighborhood_volume_curve(
            tree_region, [0.31, 0.17, 0.09, 0.05, 0.024])
        vols = curve.volumes
        assert all(a >= b for a, b in zip(vols, vols[1:]))

    def test_product_rule(self):
        iv = cantor_intervals(10)
        region = Region2([
            [rational_point(a, 0), rational_point(b, 0),
             rational_point(b, 1), rational_point(a, 1)] for a, b in iv])
        mids = np.array([[float(a + b) / 2, 0.0] for a, b in iv])
        ds = [3.0 ** -k for k in range(2, 8)]
        dim_prod = minkowski_estimate(neighborhood_volume_curve(region, ds), 2)
        dim_base = minkowski_estimate(neighborhood_volume_curve(mids, ds), 2)
        assert abs(dim_prod.dimension - dim_base.dimension - 1.0) < 0.1

    def test_halved_cell_stability(self):
        sq = unit_square()
        a = neighborhood_volume_curve(sq, [1 / 16, 1 / 32], cell_factor=4.0)
        b = neighborhood_volume_curve(sq, [1 / 16, 1 / 32], cell_factor=8.0)
        for va, vb in zip(a.volumes, b.volumes):
            assert abs(va - vb) < 0.05 * va

    def test_scan_path_agrees_with_exact(self, monkeypatch):
        # force the scanline raster onto a grid the exact path owns
        monkeypatch.setattr(bd, "_MAX_CELLS", 1)
        v = neighborhood_volume_curve(unit_square(), [1 / 8]).volumes[0]
        assert abs(v - (1 + 0.25) ** 2) <= 0.05 * (1.25) ** 2

    def test_deterministic_and_thread_invariant(self, monkeypatch, tree_region):
        ds = [2.0 ** -k for k in range(3, 7)]
        a = neighborhood_volume_curve(tree_region, ds)
        monkeypatch.setenv("KAKEYA_LAB_THREADS", "3")
        b = neighborhood_volume_curve(tree_region, ds)
        assert a.entries == b.entries
