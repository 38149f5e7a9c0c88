"""Tube family construction, volume estimation, and structural checks."""

import json
import math
from fractions import Fraction

import numpy as np
import pytest

from kakeyalab.rng import make_rng
from kakeyalab.tubelab import (
    DistinctReport,
    Tube,
    TubeError,
    TubeFamily,
    TubeIndex,
    Prism,
    direction_chord,
    essentially_distinct_check,
    family_bbox,
    family_from_json,
    family_to_json,
    family_total_volume,
    fatten,
    generate_directions,
    generate_family,
    kakeya_ratio,
    parallel_lines_family,
    points_in_tube,
    segment_distance,
    sticky_check,
    tube_volume,
    union_volume,
    wolff_axiom_check,
)


def overlap_fraction(t1: Tube, t2: Tube, n: int, seed: int) -> float:
    """Fraction of t1's volume inside t2, by rejection sampling.

    Deliberately shares no code with the library check: PCG stream,
    square-then-reject disc sampling, scalar membership arithmetic.
    """
    assert t1.dim == 3
    rng = np.random.default_rng(seed)
    w = np.asarray(t1.omega)
    seed_axis = np.zeros(3)
    seed_axis[np.argmin(np.abs(w))] = 1.0
    e1 = seed_axis - (seed_axis @ w) * w
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(w, e1)
    kept = []
    while sum(len(k) for k in kept) < n:
        xy = rng.uniform(-t1.delta, t1.delta, size=(2 * n, 2))
        kept.append(xy[np.einsum("ij,ij->i", xy, xy) <= t1.delta**2])
    xy = np.concatenate(kept)[:n]
    t = rng.uniform(0.0, t1.length, size=n)
    pts = (
        np.asarray(t1.a)
        + t[:, None] * w
        + xy[:, :1] * e1
        + xy[:, 1:] * e2
    )
    return float(points_in_tube(pts, t2).mean())


def make_dyadic_fixture(delta: float) -> TubeFamily:
    """Parallel vertical tubes on the full delta-grid of anchors.

    At every dyadic rho the greedy coarsening tiles the anchor square
    into exact (rho/delta)^2 blocks, so per-tube child counts are
    uniform: the canonical sticky example.
    """
    n = round(1.0 / delta)
    ez = np.array([0.0, 0.0, 1.0])
    tubes = [
        Tube(3, np.array([delta * j, delta * k, 0.0]), ez, delta)
        for j in range(1, n + 1)
        for k in range(1, n + 1)
    ]
    return TubeFamily(delta, tuple(tubes), "dyadic-fixture")


class TestTubeBasics:
    def test_volume_formulas(self):
        assert tube_volume(Tube(2, [0, 0], [1, 0], 0.25, 2.0)) == 2 * 0.25 * 2.0
        t3 = Tube(3, [0, 0, 0], [0, 0, 1], 0.1, 0.5)
        assert tube_volume(t3) == pytest.approx(math.pi * 0.01 * 0.5, rel=1e-15)

    def test_validation(self):
        with pytest.raises(TubeError):
            Tube(2, [0, 0], [1, 1], 0.1)  # not unit
        with pytest.raises(TubeError):
            Tube(2, [0, 0], [1, 0], 0.0)
        with pytest.raises(TubeError):
            Tube(2, [0, 0], [1, 0], 1.5)
        with pytest.raises(TubeError):
            Tube(3, [0, 0], [1, 0, 0], 0.1)  # anchor dim mismatch
        with pytest.raises(TubeError):
            Tube(2, [0, 0], [1, 0], 0.1, length=0.0)
        # radius 1 is the admitted ceiling (coarsest fattening scale)
        Tube(2, [0, 0], [1, 0], 1.0)

    def test_membership_no_end_caps(self):
        t = Tube(2, [0.0, 0.0], [1.0, 0.0], 0.1, 1.0)
        pts = np.array(
            [
                [0.5, 0.099],   # inside
                [0.5, 0.101],   # above the wall
                [-0.001, 0.0],  # behind the start face
                [1.001, 0.0],   # past the end face
                [1.0, 0.1],     # corner, closed set
            ]
        )
        assert points_in_tube(pts, t).tolist() == [True, False, False, False, True]

    def test_family_validation(self):
        t = Tube(2, [0, 0], [1, 0], 0.1)
        with pytest.raises(TubeError):
            TubeFamily(0.2, (t,))  # scale mismatch
        with pytest.raises(TubeError):
            TubeFamily(0.1, ())
        with pytest.raises(TubeError):
            TubeFamily(0.1, (t, Tube(3, [0, 0, 0], [0, 0, 1], 0.1)))


class TestSegmentDistance:
    def test_exact_cases(self):
        assert segment_distance([0, 0], [1, 0], [0.5, -1], [0.5, 1]) == 0.0
        assert segment_distance([0, 0], [1, 0], [0, 0.3], [1, 0.3]) == pytest.approx(0.3)
        assert segment_distance([0, 0], [1, 0], [2, 0], [3, 0]) == pytest.approx(1.0)
        # skew in 3D: unit lines along x and y offset in z
        assert segment_distance(
            [0, 0, 0], [1, 0, 0], [0.5, -1, 0.25], [0.5, 1, 0.25]
        ) == pytest.approx(0.25)

    def test_against_dense_sampling(self):
        rng = make_rng(71, 0)
        grid = np.linspace(0.0, 1.0, 201)
        for _ in range(40):
            p1, q1, p2, q2 = rng.uniform(-1, 1, size=(4, 3))
            d = segment_distance(p1, q1, p2, q2)
            a = p1 + grid[:, None] * (q1 - p1)
            b = p2 + grid[:, None] * (q2 - p2)
            brute = np.min(
                np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
            )
            assert d <= brute + 1e-12
            assert brute - d <= 2e-2  # grid resolution slack


class TestDirections2D:
    def test_degree_scale_count(self):
        dirs = generate_directions(math.pi / 180, 2)
        assert 170 <= len(dirs) <= 190

    def test_separation_exact(self):
        delta = math.pi / 180
        dirs = generate_directions(delta, 2)
        d2 = Fraction(delta) * Fraction(delta)
        for i in range(len(dirs)):
            ux, uy = Fraction(dirs[i][0]), Fraction(dirs[i][1])
            for j in range(i + 1, len(dirs)):
                vx, vy = Fraction(dirs[j][0]), Fraction(dirs[j][1])
                minus = (ux - vx) ** 2 + (uy - vy) ** 2
                plus = (ux + vx) ** 2 + (uy + vy) ** 2
                assert min(minus, plus) >= d2

    def test_maximal(self):
        delta = 0.05
        dirs = generate_directions(delta, 2)
        probe = np.linspace(0.0, math.pi, 100_000, endpoint=False)
        pts = np.stack([np.cos(probe), np.sin(probe)], axis=1)
        d2 = np.sum(pts**2, axis=1)[:, None] + np.sum(dirs**2, axis=1)[None, :]
        gap = np.sqrt(np.maximum(0, (d2 - 2 * np.abs(pts @ dirs.T)).min(axis=1)))
        assert gap.max() < delta

    def test_deterministic(self):
        a = generate_directions(0.03, 2)
        b = generate_directions(0.03, 2)
        assert np.array_equal(a, b)


class TestDirections3D:
    def test_count_window(self):
        dirs = generate_directions(0.1, 3)
        assert 100 <= len(dirs) <= int(2 * math.pi * 100)

    def test_separation_exact(self):
        delta = 0.2
        dirs = generate_directions(delta, 3)
        d2 = Fraction(delta) * Fraction(delta)
        frac = [[Fraction(x) for x in row] for row in dirs]
        for i in range(len(frac)):
            for j in range(i + 1, len(frac)):
                minus = sum((a - b) ** 2 for a, b in zip(frac[i], frac[j]))
                plus = sum((a + b) ** 2 for a, b in zip(frac[i], frac[j]))
                assert min(minus, plus) >= d2

    def test_maximal_dense_sampling(self):
        delta = 0.1
        dirs = generate_directions(delta, 3)
        rng = make_rng(1234, 0)
        pts = rng.normal(size=(100_000, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        pts[pts[:, 2] < 0] *= -1
        k2 = np.sum(dirs**2, axis=1)[None, :]
        worst = 0.0
        for a in range(0, len(pts), 8192):
            blk = pts[a : a + 8192]
            d2 = np.sum(blk**2, axis=1)[:, None] + k2
            near = d2 - 2.0 * np.abs(blk @ dirs.T)
            worst = max(worst, float(np.sqrt(np.maximum(near.min(axis=1), 0)).max()))
        assert worst < delta

    def test_unit_rows(self):
        dirs = generate_directions(0.15, 3)
        assert np.abs(np.linalg.norm(dirs, axis=1) - 1.0).max() < 1e-12


class TestPlacements:
    def test_bush_through_origin(self):
        fam = generate_family(0.1, 3, "bush", seed=5)
        assert fam.placement_tag == "bush"
        assert len(fam) == len(generate_directions(0.1, 3))
        origin = np.zeros((1, 3))
        for t in fam.tubes:
            assert np.array_equal(t.a, np.zeros(3))
            assert points_in_tube(origin, t)[0]

    def test_random_anchors_in_ball(self):
        fam = generate_family(0.05, 2, "random", seed=9)
        radii = [float(np.linalg.norm(t.a)) for t in fam.tubes]
        assert max(radii) <= 1.0
        # genuinely spread out, not clumped at the centre
        assert np.std(radii) > 0.05

    def test_random_seed_dependence(self):
        a = generate_family(0.1, 3, "random", seed=1)
        b = generate_family(0.1, 3, "random", seed=2)
        assert family_to_json(a) != family_to_json(b)
        again = generate_family(0.1, 3, "random", seed=1)
        assert family_to_json(a) == family_to_json(again)

    def test_perron_base_dim3_rejected(self):
        with pytest.raises(TubeError):
            generate_family(0.1, 3, "perron-base")

    def test_unknown_placement(self):
        with pytest.raises(TubeError):
            generate_family(0.1, 2, "spiral")

    def test_perron_base_direction_match(self):
        fam = generate_family(1 / 8, 2, "perron-base", tree_levels=3)
        dirs = generate_directions(1 / 8, 2)
        assert len(fam) == len(dirs)
        for t, w in zip(fam.tubes, dirs):
            assert direction_chord(t.omega, w) < 1e-9

    def test_perron_base_stays_near_tree(self):
        """Tube union against a grid oracle for the dilated tree region.

        Every occupied grid point must lie within delta (plus grid
        slack) of the assembled region, and the union area cannot
        exceed the dilated region's area by more than the band.
        """
        from kakeyalab.perron import PerronSpec, assemble_kakeya, build_perron_tree

        delta = 1 / 16
        m = 3
        fam = generate_family(delta, 2, "perron-base", tree_levels=m)
        region = assemble_kakeya(build_perron_tree(PerronSpec.default(m)))
        polys = [
            np.array([[float(v.x), float(v.y)] for v in poly])
            for poly in region.polygons
        ]

        index = TubeIndex(fam)
        lo, hi = family_bbox(fam)
        n = 220
        xs = np.linspace(lo[0], hi[0], n)
        ys = np.linspace(lo[1], hi[1], n)
        h = max((hi - lo) / (n - 1))
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        occupied = index.contains(pts)

        inside = np.zeros(len(pts), dtype=bool)
        near = np.full(len(pts), np.inf)
        for poly in polys:
            crossing = np.zeros(len(pts), dtype=bool)
            for k in range(len(poly)):
                x1, y1 = poly[k]
                x2, y2 = poly[(k + 1) % len(poly)]
                cond = (y1 > pts[:, 1]) != (y2 > pts[:, 1])
                with np.errstate(divide="ignore", invalid="ignore"):
                    xc = x1 + (pts[:, 1] - y1) * (x2 - x1) / (y2 - y1)
                crossing ^= cond & (pts[:, 0] < xc)
                # distance to the edge segment
                e = np.array([x2 - x1, y2 - y1])
                ee = e @ e
                twr = np.clip(((pts - [x1, y1]) @ e) / ee, 0.0, 1.0)
                foot = np.array([x1, y1]) + twr[:, None] * e
                near = np.minimum(near, np.linalg.norm(pts - foot, axis=1))
            inside |= crossing
        dist = np.where(inside, 0.0, near)
        slack = delta + h * 1.5
        assert (dist[occupied] <= slack).all()

    def test_tube_delta_below_one_for_generation(self):
        with pytest.raises(TubeError):
            generate_directions(1.0, 2)
        with pytest.raises(TubeError):
            generate_directions(0.0, 3)


class TestParallelLines:
    def test_counts_and_geometry(self):
        delta = 1 / 16
        fam = parallel_lines_family(delta)
        assert len(fam) == 256
        assert fam.dim == 3
        assert fam.placement_tag == "parallel-lines"
        for t in fam.tubes:
            assert t.a[1] == 0.0 and t.a[2] == 0.0
            end = t.b
            assert end[1] == pytest.approx(1.0, abs=1e-12)
            assert end[2] == 0.0
            assert t.length == pytest.approx(
                math.hypot(end[0] - t.a[0], 1.0), rel=1e-12
            )

    def test_non_integer_scale_rejected(self):
        with pytest.raises(TubeError):
            parallel_lines_family(1 / 3.5)
        with pytest.raises(TubeError):
            parallel_lines_family(0.9)


class TestUnionVolume:
    def test_single_tube_grid_and_mc(self):
        t = Tube(3, [0, 0, 0], [1, 0, 0], 0.125, 1.0)
        fam = TubeFamily(0.125, (t,))
        truth = tube_volume(t)
        g = union_volume(fam, "grid", resolution=96)
        assert g.method == "grid" and g.resolution == 96
        assert abs(g.value - truth) <= g.std_error + 1e-12
        mc = union_volume(fam, "monte-carlo", samples=200_000, seed=3)
        assert mc.method == "monte-carlo" and mc.samples == 200_000
        assert abs(mc.value - truth) <= 5 * mc.std_error

    def test_disjoint_tubes_additive(self):
        delta = 0.1
        tubes = (
            Tube(3, [0, 0, 0], [1, 0, 0], delta),
            Tube(3, [0, 0, 1], [1, 0, 0], delta),
            Tube(3, [0, 1, 0], [1, 0, 0], delta),
        )
        fam = TubeFamily(delta, tubes)
        total = family_total_volume(fam)
        g = union_volume(fam, "grid", resolution=128)
        lo, hi = family_bbox(fam)
        cell = (float(np.max(hi - lo)) / 128) ** 3
        assert abs(g.value - total) <= 2 * cell + g.std_error
        assert abs(kakeya_ratio(fam, g) - 1.0) <= (2 * cell + g.std_error) / total

    def test_union_between_max_and_sum(self):
        fam = generate_family(0.15, 2, "random", seed=21)
        est = union_volume(fam, "monte-carlo", samples=400_000, seed=4)
        biggest = max(tube_volume(t) for t in fam.tubes)
        assert est.value + 4 * est.std_error >= biggest
        assert est.value - 4 * est.std_error <= family_total_volume(fam)

    def test_methods_agree(self):
        fam = generate_family(0.2, 2, "bush", seed=0)
        g = union_volume(fam, "grid", resolution=256)
        mc = union_volume(fam, "monte-carlo", samples=400_000, seed=11)
        assert abs(g.value - mc.value) <= 3 * (g.std_error + mc.std_error)

    def test_mc_deterministic_and_thread_invariant(self, monkeypatch):
        fam = generate_family(0.2, 2, "bush", seed=0)
        a = union_volume(fam, "monte-carlo", samples=300_000, seed=7)
        monkeypatch.setenv("KAKEYA_LAB_THREADS", "4")
        b = union_volume(fam, "monte-carlo", samples=300_000, seed=7)
        assert a == b

    def test_bad_args(self):
        fam = generate_family(0.2, 2, "bush")
        with pytest.raises(TubeError):
            union_volume(fam, "quadrature")
        with pytest.raises(TubeError):
            union_volume(fam, "monte-carlo", samples=0)
        with pytest.raises(TubeError):
            union_volume(fam, "grid", resolution=1)

    def test_parallel_lines_ratio_small(self):
        delta = 1 / 16
        fam = parallel_lines_family(delta)
        est = union_volume(fam, "monte-carlo", samples=400_000, seed=2)
        assert kakeya_ratio(fam, est) <= 8 * delta


class TestEssentiallyDistinct:
    def test_identical_tubes_flagged(self):
        t = Tube(3, [0, 0, 0], [1, 0, 0], 0.1)
        fam = TubeFamily(0.1, (t, Tube(3, [0, 0, 0], [1, 0, 0], 0.1)))
        rep = essentially_distinct_check(fam, samples_per_pair=128, seed=0)
        assert not rep.ok
        assert rep.flagged[0].estimate == 1.0

    def test_far_pairs_skip_sampling(self):
        tubes = (
            Tube(2, [0, 0], [1, 0], 0.05),
            Tube(2, [0, 5], [1, 0], 0.05),
        )
        rep = essentially_distinct_check(TubeFamily(0.05, tubes))
        assert rep.n_pairs == 1 and rep.n_sampled == 0 and rep.ok

    def test_touching_parallel_not_flagged(self):
        delta = 0.1
        tubes = (
            Tube(3, [0, 0, 0], [1, 0, 0], delta),
            Tube(3, [0, 2 * delta, 0], [1, 0, 0], delta),
        )
        rep = essentially_distinct_check(TubeFamily(delta, tubes), 256, seed=1)
        assert rep.n_sampled == 1 and rep.ok

    def test_orthogonal_crossing_not_flagged(self):
        delta = 0.05
        tubes = (
            Tube(2, [-0.5, 0], [1, 0], delta),
            Tube(2, [0, -0.5], [0, 1], delta),
        )
        rep = essentially_distinct_check(TubeFamily(delta, tubes), 256, seed=1)
        assert rep.n_sampled == 1 and rep.ok

    def test_shared_anchor_minimal_separation_flagged(self):
        # Direction separation alone does not cap pairwise overlap: two
        # tubes a full delta apart in direction but sharing an anchor
        # diverge too slowly, and share roughly 0.69 of a tube.
        delta = 1 / 16
        theta = 2.0 * math.asin(delta / 2.0)
        w1 = (0.0, 1.0, 0.0)
        w2 = (math.sin(theta), math.cos(theta), 0.0)
        assert direction_chord(np.array(w1), np.array(w2)) == pytest.approx(delta)
        fam = TubeFamily(
            delta,
            (Tube(3, [0, 0, 0], w1, delta), Tube(3, [0, 0, 0], w2, delta)),
        )
        rep = essentially_distinct_check(fam, samples_per_pair=512, seed=3)
        assert len(rep.flagged) == 1
        assert overlap_fraction(fam.tubes[0], fam.tubes[1], 1 << 16, 9) > 0.6

    def test_separation_dominating_radius_clean(self):
        # The honest form of the distinctness guarantee: once direction
        # separation is a few multiples of the radius, the overlap of a
        # length-1 pair is below delta/sin(theta) ~ 1/4 everywhere, even
        # for the worst anchors (a bush).
        dirs = generate_directions(1 / 2, 3)
        tubes = tuple(Tube(3, [0.0, 0.0, 0.0], w, 1 / 8) for w in dirs)
        rep = essentially_distinct_check(
            TubeFamily(1 / 8, tubes, "bush"), samples_per_pair=64, seed=5
        )
        assert rep.n_sampled > 0
        assert rep.ok

    def test_random_family_flags_are_genuine_and_rare(self):
        # Random anchors occasionally land two minimally-separated tubes
        # on top of each other; the flags this raises are real overlaps,
        # not sampling noise, and they stay rare.
        flags = []
        n_pairs = 0
        for seed in range(100):
            fam = generate_family(1 / 8, 3, "random", seed=seed)
            rep = essentially_distinct_check(fam, samples_per_pair=32, seed=seed)
            n_pairs += rep.n_pairs
            flags.extend((fam, p) for p in rep.flagged)
        assert 0 < len(flags) < 1e-4 * n_pairs
        confirmed = 0
        for k, (fam, pair) in enumerate(flags):
            est = overlap_fraction(fam.tubes[pair.i], fam.tubes[pair.j], 8192, k)
            assert est > 0.4
            confirmed += est > 0.5
        assert confirmed >= 0.9 * len(flags)


class TestWolff:
    def test_dim2_rejected(self):
        fam = generate_family(0.2, 2, "bush")
        with pytest.raises(TubeError):
            wolff_axiom_check(fam)

    def test_hand_counted_prism(self):
        delta = 0.1
        tubes = (
            Tube(3, [0, 0, 0], [1, 0, 0], delta),
            Tube(3, [0, 0.2, 0], [1, 0, 0], delta),
            Tube(3, [0, 3, 0], [1, 0, 0], delta),
        )
        prism = Prism([0.5, 0.1, 0.0], [0.7, 0.5, 0.3], np.eye(3))
        assert prism.contains_tube(tubes[0])
        assert prism.contains_tube(tubes[1])
        assert not prism.contains_tube(tubes[2])

    def test_grazing_containment_margin(self):
        delta = 0.125
        t = Tube(3, [0, 0, 0], [1, 0, 0], delta)
        snug = Prism([0.5, 0.0, 0.0], [0.5, delta, delta], np.eye(3))
        assert snug.contains_tube(t)
        shifted = Tube(3, [0, 0, 1e-9], [1, 0, 0], delta)
        assert not snug.contains_tube(shifted)

    def test_random_family_no_violations(self):
        fam = generate_family(1 / 16, 3, "random", seed=13)
        rep = wolff_axiom_check(fam, n_prisms=2000, seed=13)
        assert rep.ok
        assert rep.n_checked >= 2000

    def test_parallel_lines_slab_flagged(self):
        delta = 1 / 32
        fam = parallel_lines_family(delta)
        rep = wolff_axiom_check(fam, n_prisms=500, seed=0)
        assert rep.slab.count == 1024
        assert rep.slab.ratio >= 10.0
        assert any(v.kind == "slab" for v in rep.violations)
        assert not rep.ok


class TestFatten:
    def test_rho_below_delta_rejected(self):
        fam = generate_family(0.2, 2, "bush")
        with pytest.raises(TubeError):
            fatten(fam, 0.1)

    def test_rho_equal_delta_keeps_all(self):
        fam = generate_family(0.2, 2, "bush", seed=3)
        res = fatten(fam, 0.2)
        assert res.kept_indices == tuple(range(len(fam)))
        assert res.assignment == tuple(range(len(fam)))
        assert res.family.delta == 0.2

    def test_fixture_partitions_into_blocks(self):
        delta = 1 / 16
        fam = make_dyadic_fixture(delta)
        res = fatten(fam, 4 * delta)
        assert len(res.kept_indices) == 16
        counts = np.bincount(res.assignment)
        assert (counts == 16).all()

    def test_assignment_matches_bruteforce(self):
        delta = 1 / 8
        fam = make_dyadic_fixture(delta)
        rho = 2 * delta
        kept = []
        assign = []
        for i, t in enumerate(fam.tubes):
            home = None
            for slot, k in enumerate(kept):
                u = fam.tubes[k]
                chord = direction_chord(t.omega, u.omega)
                off = t.a - u.a
                perp = off - (off @ u.omega) * u.omega
                if chord < rho and np.abs(perp[:2]).max() < rho:
                    home = slot
                    break
            if home is None:
                kept.append(i)
                home = len(kept) - 1
            assign.append(home)
        res = fatten(fam, rho)
        assert res.kept_indices == tuple(kept)
        assert res.assignment == tuple(assign)

    def test_kept_pairwise_not_close(self):
        fam = generate_family(0.1, 2, "random", seed=17)
        rho = 0.3
        res = fatten(fam, rho)
        ts = res.family.tubes
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                chord = direction_chord(ts[i].omega, ts[j].omega)
                off = ts[j].a - ts[i].a
                perp = off - (off @ ts[i].omega) * ts[i].omega
                assert not (chord < rho and float(np.abs(perp).max()) < rho)

    def test_bush_full_collapse_is_strong(self):
        """rho = 1 shrinks a bush to the handful of far-apart directions.

        A literal single survivor is impossible under the chord metric:
        perpendicular directions sit at distance sqrt(2) > 1, so two or
        three representatives always remain.
        """
        fam = generate_family(0.05, 2, "bush")
        res = fatten(fam, 1.0)
        assert 2 <= len(res.kept_indices) <= 3
        assert len(res.kept_indices) <= len(fam) // 20


class TestSticky:
    def test_fixture_sticky_all_dyadic_scales(self):
        fam = make_dyadic_fixture(1 / 16)
        rep = sticky_check(fam)
        assert [row.rho for row in rep.scales] == [
            1 / 16, 1 / 8, 1 / 4, 1 / 2, 1.0,
        ]
        assert rep.sticky
        for row in rep.scales:
            assert row.min_norm == row.max_norm == 1.0

    def test_parallel_lines_fails_somewhere(self):
        fam = parallel_lines_family(1 / 16)
        rep = sticky_check(fam)
        assert not rep.sticky

    def test_non_dyadic_needs_explicit_scales(self):
        fam = generate_family(0.3, 2, "bush")
        with pytest.raises(TubeError):
            sticky_check(fam)
        rep = sticky_check(fam, rhos=[0.3, 0.6])
        assert len(rep.scales) == 2

    def test_order_note_recorded(self):
        rep = sticky_check(make_dyadic_fixture(1 / 8))
        assert "order" in rep.order_note


class TestSerialization:
    def test_roundtrip_bytes(self):
        fam = generate_family(0.1, 3, "random", seed=42)
        text = family_to_json(fam)
        back = family_from_json(text)
        assert family_to_json(back) == text
        assert back.placement_tag == "random"
        assert len(back) == len(fam)
        for a, b in zip(fam.tubes, back.tubes):
            assert np.array_equal(a.a, b.a)
            assert np.array_equal(a.omega, b.omega)
            assert a.length == b.length

    def test_wire_shape(self):
        fam = TubeFamily(0.5, (Tube(2, [0, 0], [1, 0], 0.5),), "bush")
        doc = json.loads(family_to_json(fam))
        assert set(doc) == {"dim", "delta", "placement_tag", "tubes"}
        assert set(doc["tubes"][0]) == {"a", "omega", "len"}
