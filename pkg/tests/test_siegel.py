"""Model domain, cuts, closed-form volumes, and the 4-D union sampler."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hkvol.heis import HPoint
from hkvol.integrate import IntegrationSpec
from hkvol.siegel import (
    BoundaryPoint,
    Cut,
    FPolyhedron,
    SiegelDomain,
    ball_rvolume,
    cut_bounding_box,
    cut_projection,
    cut_volume,
    cut_volume_closed,
    gap_volume_mc,
    koranyi_ball_volume_closed,
    union_cut_volume_mc,
)

finite = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)
lams = st.floats(0.2, 5.0, allow_nan=False, allow_infinity=False)


def boundary_pts():
    return st.builds(lambda a, b, c: BoundaryPoint(complex(a, b), c), finite, finite, finite)


class TestDomain:
    def test_rho_and_membership(self):
        dom = SiegelDomain(1.0)
        assert dom.rho(1 + 0j, 2j) == pytest.approx(-1.0)
        assert dom.contains(1 + 0j, 2j)
        assert not dom.contains(1 + 0j, 0.5j)

    def test_lift_on_boundary(self):
        dom = SiegelDomain(2.0)
        w = BoundaryPoint(1 + 1j, 0.3)
        z1, z2 = dom.lift(w)
        assert dom.rho(z1, z2) == pytest.approx(0.0, abs=1e-12)

    @given(boundary_pts(), finite, finite, st.floats(0.01, 4.0), lams)
    @settings(max_examples=100, deadline=None)
    def test_f_is_leray_multiple(self, w, a, b, y2, lam):
        dom = SiegelDomain(lam)
        z1, z2 = complex(a, b), complex(a - b, lam * abs(complex(a, b)) ** 2 + y2)
        f = dom.f(z1, z2, w)
        l = dom.cauchy_leray(z1, z2, w)
        assert f == pytest.approx(-2j * lam * l, rel=1e-9, abs=1e-9)

    @given(boundary_pts(), finite, finite, st.floats(0.01, 4.0), lams)
    @settings(max_examples=100, deadline=None)
    def test_xi_map_conjugates_f(self, w, a, b, y2, lam):
        # |f_lam(z, w)| = |f_1(Xi z, Xi w)| with the source mapped through Xi
        dom, one = SiegelDomain(lam), SiegelDomain(1.0)
        z1, z2 = complex(a, b), complex(a - b, lam * abs(complex(a, b)) ** 2 + y2)
        zz1, zz2 = dom.xi_map(z1, z2)
        w_img = BoundaryPoint(lam * w.w1, lam * w.u2)
        assert one.f(zz1, zz2, w_img) == pytest.approx(dom.f(z1, z2, w), rel=1e-9, abs=1e-9)

    def test_xi_preserves_boundary(self):
        dom = SiegelDomain(0.5)
        w = BoundaryPoint(2 - 1j, 0.7)
        z1, z2 = dom.xi_map(*dom.lift(w))
        assert SiegelDomain(1.0).rho(z1, z2) == pytest.approx(0.0, abs=1e-12)


class TestClosedForms:
    @pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
    def test_cut_volume(self, delta):
        assert cut_volume(delta) == pytest.approx(2.0 * math.pi / 3.0 * delta ** 3)

    def test_ball_rvolume(self):
        assert ball_rvolume(1.0) == pytest.approx(math.pi ** 2 / 2.0)
        assert ball_rvolume(2.0) == pytest.approx(math.pi ** 2 / 2.0 * 16.0)

    def test_aliases(self):
        assert cut_volume_closed is cut_volume
        assert koranyi_ball_volume_closed is ball_rvolume

    def test_validation(self):
        with pytest.raises(ValueError):
            cut_volume(0.0)
        with pytest.raises(ValueError):
            ball_rvolume(-1.0)


class TestProjection:
    @given(boundary_pts(), st.floats(0.05, 3.0), finite, finite, finite)
    @settings(max_examples=150, deadline=None)
    def test_cut_membership_equals_ball_membership(self, w, delta, a, b, x2):
        """At lam = 1, |f| <= delta on the vertical fiber over p iff p is in the
        gauge ball of radius sqrt(delta) around the source."""
        dom = SiegelDomain(1.0)
        cut = Cut(w, delta)
        ball = cut_projection(cut)
        p = HPoint(complex(a, b), x2)
        # point of the boundary fiber over p: y2 = |z1|^2
        z1 = p.z1
        z2 = complex(p.x2, abs(z1) ** 2)
        in_cut = abs(dom.f(z1, z2, w)) <= delta
        assert in_cut == ball.contains(p)

    def test_projection_radius(self):
        cut = Cut(BoundaryPoint(1 + 2j, 0.5), 0.49)
        ball = cut_projection(cut)
        assert ball.radius == pytest.approx(0.7)
        assert ball.center.z1 == 1 + 2j and ball.center.x2 == 0.5


class TestBoundingBox:
    @given(boundary_pts(), st.floats(0.05, 2.0))
    @settings(max_examples=30, deadline=None)
    def test_box_contains_cut_samples(self, w, delta):
        dom = SiegelDomain(1.0)
        cut = Cut(w, delta)
        lo, hi = cut_bounding_box(cut)
        rng = np.random.default_rng(7)
        pts = rng.uniform(size=(2000, 4)) * (hi - lo) * 1.6 + lo - 0.3 * (hi - lo)
        z1 = pts[:, 0] + 1j * pts[:, 1]
        z2 = pts[:, 2] + 1j * pts[:, 3]
        w1, w2 = dom.lift(w)
        f = dom.f(z1, z2, w)
        inside = (np.abs(f) <= delta) & (np.abs(z1) ** 2 < z2.imag)
        assert np.all(pts[inside] >= lo - 1e-9)
        assert np.all(pts[inside] <= hi + 1e-9)


class TestGapVolume:
    @pytest.mark.parametrize("delta", [0.5, 1.0, 2.0])
    def test_single_cut_matches_closed_form(self, delta):
        cut = Cut(BoundaryPoint(0.3 - 0.1j, 0.2), delta)
        mc = union_cut_volume_mc([cut], IntegrationSpec(samples=1 << 18, seed=11))
        assert mc.within(cut_volume(delta), nsigma=4)

    def test_lam_rescaling(self):
        cut = Cut(BoundaryPoint(0.5 + 0j, 0.0), 1.0)
        spec = IntegrationSpec(samples=1 << 18, seed=13)
        v2 = union_cut_volume_mc([cut], spec, SiegelDomain(2.0))
        assert v2.within(cut_volume(1.0) / 16.0, nsigma=4)

    def test_union_subadditive_and_exceeds_max(self):
        cuts = [
            Cut(BoundaryPoint(0j, 0.0), 1.0),
            Cut(BoundaryPoint(0.4 + 0j, 0.0), 1.0),
        ]
        spec = IntegrationSpec(samples=1 << 18, seed=17)
        union = union_cut_volume_mc(cuts, spec)
        single = cut_volume(1.0)
        assert union.value > single  # sources differ, union strictly bigger
        assert union.value < 2 * single + 5 * union.stderr

    def test_deterministic(self):
        cut = Cut(BoundaryPoint(0j, 0.0), 1.0)
        spec = IntegrationSpec(samples=1 << 16, seed=3)
        a = union_cut_volume_mc([cut], spec)
        b = union_cut_volume_mc([cut], spec)
        assert a.value == b.value


class TestPolyhedron:
    def test_delta_is_max_cut_size(self):
        poly = FPolyhedron(
            SiegelDomain(1.0),
            (Cut(BoundaryPoint(0j, 0.0), 0.5), Cut(BoundaryPoint(1 + 0j, 0.0), 1.5)),
        )
        assert poly.delta == pytest.approx(1.5)

    def test_membership_partition(self):
        dom = SiegelDomain(1.0)
        poly = FPolyhedron(dom, (Cut(BoundaryPoint(0j, 0.0), 1.0),))
        z_deep = (0j, 100j)  # far from the cut, inside the domain
        z_gap = (0j, 0.1j)  # right above the source
        assert poly.contains(*z_deep) and not poly.in_gap(*z_deep)
        assert poly.in_gap(*z_gap) and not poly.contains(*z_gap)
        z_out = (0j, -1j)
        assert not poly.contains(*z_out) and not poly.in_gap(*z_out)
