"""Lattice cut families, covering bounds, subdivision, and the gap optimizer."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hkvol.heis import HPoint, KoranyiBall, arr_dist, sigma_k_card
from hkvol.integrate import IntegrationSpec
from hkvol.powerdiag import gap_functional
from hkvol.tilings import (
    BallConfiguration,
    COVER_RAD4_BOUND,
    LOWER_CONST,
    UPPER_CONST,
    asymptotics_harness,
    build_pk,
    coverage_verify,
    estimate_vn,
    lattice_balls,
    lower_bound_check,
    power_mean_check,
    subdivide_scale,
    upper_bound_closed,
    wiener_subcover,
)


class TestLatticeFamily:
    @pytest.mark.parametrize("k", range(1, 9))
    def test_cut_count(self, k):
        assert len(build_pk(k).cuts) == k ** 4 + 2 * k ** 3 - 2 * k ** 2

    def test_delta_closed_form(self):
        for k in (1, 2, 3):
            assert build_pk(k).delta == pytest.approx(math.sqrt(5.0) / (math.sqrt(2.0) * k * k))

    def test_ball_radius(self):
        balls = lattice_balls(2)
        assert balls[0].radius == pytest.approx((2.5) ** 0.25 / 2.0)

    def test_upper_bound_value(self):
        assert upper_bound_closed(2) == pytest.approx(3.1045588330612803)
        assert upper_bound_closed(1) == pytest.approx(UPPER_CONST)

    def test_constants(self):
        assert UPPER_CONST == pytest.approx(5 * math.sqrt(5.0) * math.pi / (3 * math.sqrt(2.0)))
        assert LOWER_CONST == pytest.approx(4 * math.sqrt(2.0) / (math.pi ** 2 * 3 ** 7))
        assert COVER_RAD4_BOUND == pytest.approx(2.0 / math.pi ** 2)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_lattice_covers_box(self, k):
        cfg = BallConfiguration(tuple(lattice_balls(k)))
        ok, worst = coverage_verify(cfg)
        assert ok, f"worst margin {worst}"

    @pytest.mark.parametrize("k", [2, 3])
    def test_gap_below_closed_bound(self, k):
        cfg = BallConfiguration(tuple(lattice_balls(k)))
        res = gap_functional(cfg.balls, IntegrationSpec(samples=1 << 17, seed=31))
        assert res.value <= upper_bound_closed(k) + 3 * res.stderr


class TestLowerBound:
    def test_lattice_families(self):
        for k in (1, 2, 3):
            ok, s4 = lower_bound_check(BallConfiguration(tuple(lattice_balls(k))))
            assert ok and s4 >= COVER_RAD4_BOUND

    def test_non_covering_raises(self):
        tiny = BallConfiguration((KoranyiBall(HPoint(0.5 + 0.5j, 0.5), 0.05),))
        with pytest.raises(ValueError):
            lower_bound_check(tiny)


class TestPowerMean:
    @given(st.lists(st.floats(0.01, 100.0), min_size=1, max_size=20), st.floats(1.1, 6.0))
    @settings(max_examples=200, deadline=None)
    def test_inequality_holds(self, values, d):
        assert power_mean_check(values, d)

    def test_validation(self):
        with pytest.raises(ValueError):
            power_mean_check([], 2.0)
        with pytest.raises(ValueError):
            power_mean_check([1.0, -1.0], 2.0)
        with pytest.raises(ValueError):
            power_mean_check([1.0], 1.0)


class TestWienerSubcover:
    def test_disjoint_and_tripled_covers(self):
        balls = lattice_balls(3)
        kept_idx, ok, worst = wiener_subcover(balls, samples=1 << 13, seed=7)
        kept = [balls[i] for i in kept_idx]
        assert ok and worst >= 0
        # exact pairwise disjointness of the kept balls
        for i in range(len(kept)):
            for j in range(i + 1, len(kept)):
                d = arr_dist(kept[i].center.as_array(), kept[j].center.as_array()[None])[0]
                assert d > kept[i].radius + kept[j].radius

    def test_keeps_at_most_input(self):
        balls = lattice_balls(2)
        kept, ok, _ = wiener_subcover(balls, samples=1 << 12, seed=7)
        assert 1 <= len(kept) <= len(balls)


class TestSubdivide:
    def test_counts_and_radii(self):
        cfg = BallConfiguration(tuple(lattice_balls(2)))
        sub = subdivide_scale(cfg, 2)
        assert len(sub.balls) == 24 * len(cfg.balls)
        assert sub.balls[0].radius == pytest.approx(cfg.balls[0].radius / 2.0)

    def test_subdivided_single_ball_is_lattice(self):
        # subdividing the one-ball family by k reproduces the order-k family
        cfg = BallConfiguration(tuple(lattice_balls(1)))
        sub = subdivide_scale(cfg, 2)
        expect = lattice_balls(2)
        got = sorted((round(b.center.z1.real, 9), round(b.center.z1.imag, 9),
                      round(b.center.x2, 9), round(b.radius, 9)) for b in sub.balls)
        want = sorted((round(b.center.z1.real, 9), round(b.center.z1.imag, 9),
                       round(b.center.x2, 9), round(b.radius, 9)) for b in expect)
        assert got == want

    def test_subdivided_still_covers(self):
        cfg = BallConfiguration(tuple(lattice_balls(2)))
        sub = subdivide_scale(cfg, 2)
        ok, worst = coverage_verify(sub, samples=1 << 13)
        assert ok, f"worst margin {worst}"

    def test_union_bound_inequality(self):
        """The subdivided gap never exceeds (|lattice|/k^6) x the original gap:
        the copies overlap, so the union bound is an inequality, not an equality."""
        cfg = BallConfiguration(tuple(lattice_balls(2)))
        sub = subdivide_scale(cfg, 2)
        g0 = gap_functional(cfg.balls, IntegrationSpec(samples=1 << 17, seed=33))
        g1 = gap_functional(sub.balls, IntegrationSpec(samples=1 << 17, seed=34))
        bound = (24.0 / 64.0) * g0.value
        assert g1.value <= bound + 3 * (g1.stderr + (24.0 / 64.0) * g0.stderr)


class TestOptimizer:
    def test_small_run_feasible_and_deterministic(self):
        cfg_a, rec_a = estimate_vn(1, seed=0, budget=20)
        cfg_b, rec_b = estimate_vn(1, seed=0, budget=20)
        assert rec_a.gap == rec_b.gap
        ok, worst = coverage_verify(cfg_a)
        assert ok, worst
        assert rec_a.sqrt_n_gap == pytest.approx(math.sqrt(1) * rec_a.gap)

    def test_never_worse_than_lattice_start(self):
        cfg, rec = estimate_vn(24, seed=1, budget=30)
        lat = BallConfiguration(tuple(lattice_balls(2)))
        spec = IntegrationSpec(samples=1 << 17, seed=35)
        opt_gap = gap_functional(cfg.balls, spec)
        lat_gap = gap_functional(lat.balls, spec)
        assert opt_gap.value <= lat_gap.value + 1e-12

    def test_lower_bound_on_output(self):
        cfg, _ = estimate_vn(24, seed=2, budget=20)
        ok, s4 = lower_bound_check(cfg)
        assert ok and s4 >= COVER_RAD4_BOUND

    def test_rejects_bad_n(self):
        with pytest.raises(ValueError):
            estimate_vn(0)


class TestHarness:
    def test_records_shape(self):
        records = asymptotics_harness(k_max=2, seed=0, budget=10)
        assert [r.n for r in records] == [1, 24]
        for r in records:
            assert r.gap > 0 and r.gap_stderr > 0
            assert r.sqrt_n_gap == pytest.approx(math.sqrt(r.n) * r.gap)

    def test_rejects_small_kmax(self):
        with pytest.raises(ValueError):
            asymptotics_harness(k_max=1)
