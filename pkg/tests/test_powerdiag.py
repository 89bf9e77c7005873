"""Horizontal power function, diagram classification, gap functional, doubling."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hkvol.heis import HPoint, KoranyiBall, arr_group_mul, group_mul
from hkvol.integrate import IntegrationSpec
from hkvol.powerdiag import (
    Disk,
    HPowerDiagram,
    balls_bounding_box,
    doubling_check,
    doubling_factor,
    euclid_cell_classify,
    gap_functional,
    hpow,
    hpow_arr,
    pow_euclid,
    union_volume_consistency,
)
from hkvol.siegel import BoundaryPoint, Cut, cut_volume

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


def pts():
    return st.builds(lambda a, b, c: HPoint(complex(a, b), c), finite, finite, finite)


def balls():
    return st.builds(
        lambda a, b, c, r: KoranyiBall(HPoint(complex(a, b), c), r),
        finite, finite, finite, st.floats(0.1, 2.0),
    )


class TestHpow:
    def test_centered_ball_formula(self):
        # hpow(z, K(0, R)) = |z1|^2 - sqrt(R^4 - x2^2) inside the slab
        b = KoranyiBall(HPoint(0j, 0.0), 1.0)
        assert hpow(HPoint(0.5 + 0j, 0.0), b) == pytest.approx(0.25 - 1.0)
        assert hpow(HPoint(0j, 0.5), b) == pytest.approx(-math.sqrt(1 - 0.25))

    def test_outside_slab_infinite(self):
        b = KoranyiBall(HPoint(0j, 0.0), 1.0)
        assert hpow(HPoint(0j, 1.5), b) == math.inf
        arr = hpow_arr(np.array([[0.0, 0.0, 1.5]]), np.zeros((1, 3)), np.array([1.0]))
        assert np.isinf(arr[0, 0])

    @given(pts(), balls())
    @settings(max_examples=150, deadline=None)
    def test_membership_iff_nonpositive(self, p, b):
        h = hpow(p, b)
        inside = b.contains(p)
        if h <= -1e-9:
            assert inside
        if h >= 1e-9:
            assert not inside

    @given(pts(), pts(), balls())
    @settings(max_examples=100, deadline=None)
    def test_left_invariant(self, g, p, b):
        moved = KoranyiBall(group_mul(g, b.center), b.radius)
        h0 = hpow(p, b)
        h1 = hpow(group_mul(g, p), moved)
        if math.isinf(h0) or math.isinf(h1):
            assert math.isinf(h0) == math.isinf(h1)
        else:
            assert h1 == pytest.approx(h0, rel=1e-7, abs=1e-7)

    def test_arr_matches_scalar(self):
        rng = np.random.default_rng(2)
        P = rng.normal(size=(50, 3))
        C = rng.normal(size=(4, 3))
        R = rng.uniform(0.2, 2.0, size=4)
        H = hpow_arr(P, C, R)
        for i in range(50):
            for j in range(4):
                b = KoranyiBall(HPoint(complex(C[j, 0], C[j, 1]), C[j, 2]), R[j])
                expect = hpow(HPoint(complex(P[i, 0], P[i, 1]), P[i, 2]), b)
                if math.isinf(expect):
                    assert np.isinf(H[i, j])
                else:
                    assert H[i, j] == pytest.approx(expect)


class TestEuclidReference:
    def test_pow_euclid(self):
        d = Disk(0j, 2.0)
        assert pow_euclid(complex(3.0, 4.0), d) == pytest.approx(25.0 - 4.0)

    def test_classify_matches_bruteforce(self):
        disks = [Disk(0j, 1.0), Disk(1.5 + 0j, 1.2), Disk(0.5 + 1j, 0.8)]
        rng = np.random.default_rng(4)
        for _ in range(200):
            p = complex(*rng.uniform(-1, 2.5, size=2))
            powers = [pow_euclid(p, d) for d in disks]
            got = euclid_cell_classify(p, disks)
            if min(powers) > 0:
                assert got is None
            elif got is not None:
                assert powers[got] == pytest.approx(min(powers))


class TestDiagram:
    def setup_method(self):
        self.balls = (
            KoranyiBall(HPoint(0j, 0.0), 1.0),
            KoranyiBall(HPoint(1 + 0j, 0.0), 1.0),
        )
        self.diag = HPowerDiagram(self.balls)

    def test_classify_inside(self):
        assert self.diag.classify(HPoint(-0.5 + 0j, 0.0)) == 0
        assert self.diag.classify(HPoint(1.5 + 0j, 0.0)) == 1

    def test_classify_outside_none(self):
        assert self.diag.classify(HPoint(5 + 5j, 0.0)) is None

    def test_classify_arr_agrees(self):
        rng = np.random.default_rng(8)
        P = rng.uniform(-2, 3, size=(300, 3))
        cells = self.diag.classify_arr(P)
        for i in range(300):
            got = self.diag.classify(HPoint(complex(P[i, 0], P[i, 1]), P[i, 2]))
            assert (got if got is not None else -1) == cells[i]

    def test_cells_partition_union(self):
        # every point of the union lands in exactly one cell
        rng = np.random.default_rng(9)
        P = rng.uniform(-1.2, 2.2, size=(500, 3))
        H = hpow_arr(P, *_arrays(self.balls))
        in_union = np.min(H, axis=1) <= 0
        cells = self.diag.classify_arr(P)
        assert np.all((cells >= 0) == in_union | (cells >= 0))
        # classified points genuinely lie in their ball
        for i in np.nonzero(cells >= 0)[0]:
            assert self.balls[cells[i]].contains(HPoint(complex(P[i, 0], P[i, 1]), P[i, 2]))


def _arrays(balls):
    c = np.array([b.center.as_array() for b in balls])
    r = np.array([b.radius for b in balls])
    return c, r


class TestGapFunctional:
    def test_single_ball_closed_form(self):
        # the functional equals the 4-D volume of the cut over the ball
        r = 1.3
        ball = KoranyiBall(HPoint(0.2 + 0.1j, -0.4), r)
        res = gap_functional([ball], IntegrationSpec(samples=1 << 18, seed=21))
        assert res.within(cut_volume(r * r), nsigma=4)

    def test_grid_matches_mc(self):
        ball = KoranyiBall(HPoint(0j, 0.0), 1.0)
        mc = gap_functional([ball], IntegrationSpec(samples=1 << 18, seed=22))
        grid = gap_functional([ball], IntegrationSpec(method="grid", samples=80 ** 3, seed=0))
        assert grid.value == pytest.approx(mc.value, rel=0.02)

    def test_monotone_in_radius(self):
        spec = IntegrationSpec(samples=1 << 17, seed=23)
        small = gap_functional([KoranyiBall(HPoint(0j, 0.0), 0.8)], spec)
        big = gap_functional([KoranyiBall(HPoint(0j, 0.0), 1.2)], spec)
        assert big.value > small.value

    def test_accepts_diagram(self):
        ball = KoranyiBall(HPoint(0j, 0.0), 1.0)
        spec = IntegrationSpec(samples=1 << 16, seed=24)
        a = gap_functional([ball], spec)
        b = gap_functional(HPowerDiagram((ball,)), spec)
        assert a.value == b.value


class TestConsistencyAndDoubling:
    def test_union_volume_consistency(self):
        cuts = [
            Cut(BoundaryPoint(0j, 0.0), 1.0),
            Cut(BoundaryPoint(0.6 + 0.2j, 0.3), 0.7),
        ]
        v4, v3 = union_volume_consistency(cuts, IntegrationSpec(samples=1 << 18, seed=25))
        sigma = math.hypot(v4.stderr, v3.stderr)
        assert abs(v4.value - v3.value) <= 4 * sigma

    def test_doubling_factor(self):
        assert doubling_factor(1.0) == pytest.approx(8.0)
        assert doubling_factor(0.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("t", [0.5, 4.0])
    def test_doubling_check(self, t):
        cuts = [Cut(BoundaryPoint(0j, 0.0), 1.0), Cut(BoundaryPoint(1 + 0j, 0.5), 0.8)]
        ok, big, base = doubling_check(cuts, t, IntegrationSpec(samples=1 << 17, seed=26))
        assert ok
        assert big.value <= doubling_factor(t) * base.value * (1 + 1e-9) + 3 * (
            big.stderr + doubling_factor(t) * base.stderr
        )

    def test_doubling_range_validation(self):
        cuts = [Cut(BoundaryPoint(0j, 0.0), 1.0)]
        with pytest.raises(ValueError):
            doubling_check(cuts, 17.0, IntegrationSpec(samples=1 << 12, seed=0))


class TestBoundingBox:
    def test_covers_every_ball(self):
        balls = [
            KoranyiBall(HPoint(0j, 0.0), 1.0),
            KoranyiBall(HPoint(2 + 1j, -0.5), 0.5),
        ]
        lo, hi = balls_bounding_box(balls)
        for b in balls:
            blo, bhi = b.bounding_box()
            assert np.all(lo <= blo) and np.all(hi >= bhi)
