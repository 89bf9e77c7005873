"""Siegel upper half space, boundary cuts, and f-polyhedra.

The model domain is S_lam = {(z1, z2) in C^2 : lam |z1|^2 < Im z2} with
defining function rho(z) = lam |z1|^2 - Im z2.  Its boundary carries a
Heisenberg group structure through the lift (w1, u2) -> (w1, u2 + i lam |w1|^2).

The support-type function

    f(z, w) = lam (z2 - conj(w2)) - 2 i lam^2 z1 conj(w1),   w on the boundary,

vanishes exactly on the complex tangent line at w; the cut C(w, delta) is the
sublevel set {z in closure(S_lam) : |f(z, w)| <= delta} and an f-polyhedron is
what remains of the domain after removing finitely many cuts.

For lam = 1 the cut at w projects vertically onto the closed Koranyi ball of
radius sqrt(delta) about (w1, u2), and vol C(w, delta) = (2 pi / 3) delta^3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .heis import HPoint, KoranyiBall
from .integrate import IntegrationSpec, MCResult, mc_mean

__all__ = [
    "SiegelDomain",
    "BoundaryPoint",
    "Cut",
    "FPolyhedron",
    "cut_volume",
    "cut_volume_closed",
    "ball_rvolume",
    "koranyi_ball_volume_closed",
    "cut_projection",
    "cut_bounding_box",
    "gap_volume_mc",
    "union_cut_volume_mc",
]


@dataclass(frozen=True)
class SiegelDomain:
    """S_lam = {lam |z1|^2 < Im z2}."""

    lam: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValueError("lam must be finite and positive")

    def rho(self, z1: complex, z2: complex) -> float:
        return self.lam * abs(z1) ** 2 - z2.imag

    def contains(self, z1: complex, z2: complex) -> bool:
        return self.rho(z1, z2) < 0

    def lift(self, w: "BoundaryPoint") -> tuple[complex, complex]:
        """Boundary point of S_lam above (w1, u2)."""
        return (w.w1, w.u2 + 1j * self.lam * abs(w.w1) ** 2)

    def xi_map(self, z1: complex, z2: complex) -> tuple[complex, complex]:
        """Biholomorphism (z1, z2) -> (lam z1, lam z2) from S_lam onto S_1.

        Its real Jacobian determinant is lam^4.
        """
        return (self.lam * z1, self.lam * z2)

    def f(self, z1: complex, z2: complex, w: "BoundaryPoint") -> complex:
        w1, w2 = self.lift(w)
        lam = self.lam
        return lam * (z2 - w2.conjugate()) - 2j * lam * lam * z1 * w1.conjugate()

    def cauchy_leray(self, z1: complex, z2: complex, w: "BoundaryPoint") -> complex:
        """sum_j drho/dz_j (w) (z_j - w_j); satisfies f = -2 i lam * this."""
        w1, w2 = self.lift(w)
        return self.lam * w1.conjugate() * (z1 - w1) + 0.5j * (z2 - w2)


@dataclass(frozen=True)
class BoundaryPoint:
    """Heisenberg coordinates (w1, u2) of a boundary point; w2 = u2 + i lam |w1|^2."""

    w1: complex
    u2: float

    def as_hpoint(self) -> HPoint:
        return HPoint(self.w1, self.u2)


@dataclass(frozen=True)
class Cut:
    """C(source, size) = {z in the closed domain : |f(z, source)| <= size}."""

    source: BoundaryPoint
    size: float

    def __post_init__(self):
        if not (math.isfinite(self.size) and self.size > 0):
            raise ValueError("cut size must be finite and positive")


@dataclass(frozen=True)
class FPolyhedron:
    """Domain minus finitely many cuts: {z in Omega : |f(z, w_j)| > delta_j for all j}."""

    domain: SiegelDomain
    cuts: tuple[Cut, ...]

    def __post_init__(self):
        object.__setattr__(self, "cuts", tuple(self.cuts))
        if not self.cuts:
            raise ValueError("an f-polyhedron needs at least one cut")

    @property
    def delta(self) -> float:
        """Maximal cut size."""
        return max(c.size for c in self.cuts)

    def contains(self, z1: complex, z2: complex) -> bool:
        if not self.domain.contains(z1, z2):
            return False
        return all(abs(self.domain.f(z1, z2, c.source)) > c.size for c in self.cuts)

    def in_gap(self, z1: complex, z2: complex) -> bool:
        """Is z in the removed region Omega minus the polyhedron?"""
        if not self.domain.contains(z1, z2):
            return False
        return any(abs(self.domain.f(z1, z2, c.source)) <= c.size for c in self.cuts)

    def rescaled_to_unit(self) -> "FPolyhedron":
        """Image under xi_map, an f-polyhedron of S_1 with the same cut sizes."""
        lam = self.domain.lam
        cuts = tuple(
            Cut(BoundaryPoint(lam * c.source.w1, lam * c.source.u2), c.size) for c in self.cuts
        )
        return FPolyhedron(SiegelDomain(1.0), cuts)


def cut_volume(delta: float) -> float:
    """Closed-form volume (2 pi / 3) delta^3 of a single cut (any lam = 1 source)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    return 2.0 * math.pi / 3.0 * delta ** 3


def ball_rvolume(radius: float) -> float:
    """Haar volume (pi^2 / 2) radius^4 of a Koranyi ball."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    return 0.5 * math.pi ** 2 * radius ** 4


# aliases emphasizing that these are the closed forms backing the MC oracles
cut_volume_closed = cut_volume
koranyi_ball_volume_closed = ball_rvolume


def cut_projection(cut: Cut) -> KoranyiBall:
    """Vertical projection of a lam = 1 cut: the ball K((w1, u2), sqrt(delta)).

    On S_1, Im f(z, w) = (Im z2 - |z1|^2) + |z1 - w1|^2 and
    Re f(z, w) = x2 - u2 + 2 Im(z1 conj(w1)), so |f| <= delta forces the
    Heisenberg projection of z into this gauge ball, with equality of regions
    on the boundary.
    """
    return KoranyiBall(cut.source.as_hpoint(), math.sqrt(cut.size))


def cut_bounding_box(cut: Cut) -> np.ndarray:
    """(2, 4) real [lo, hi] box containing a lam = 1 cut; coords (x1, y1, x2, y2).

    From the decomposition of f: |z1 - w1| <= sqrt(delta),
    |Im z2 - |z1|^2| <= delta, and |Re f| <= delta.
    """
    d = cut.size
    w1 = cut.source.w1
    u2 = cut.source.u2
    s = math.sqrt(d)
    sq2 = math.sqrt(2.0) * s  # max |z1 - w1| within the z1 square
    hw = d + 2.0 * sq2 * abs(w1)
    y2_lo = max(0.0, abs(w1) - sq2) ** 2
    y2_hi = (abs(w1) + sq2) ** 2 + d
    return np.array(
        [
            [w1.real - s, w1.imag - s, u2 - hw, y2_lo],
            [w1.real + s, w1.imag + s, u2 + hw, y2_hi],
        ]
    )


def _cut_arrays(poly: FPolyhedron):
    w1 = np.array([c.source.w1 for c in poly.cuts], dtype=complex)
    u2 = np.array([c.source.u2 for c in poly.cuts], dtype=float)
    d = np.array([c.size for c in poly.cuts], dtype=float)
    return w1, u2, d


def _abs_f_unit(pts: np.ndarray, w1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    """|f(z, w_j)| on S_1 for points (n, 4) against sources (m,): (n, m) array."""
    z1 = pts[:, 0] + 1j * pts[:, 1]
    re = pts[:, 2][:, None] - u2[None, :] + 2.0 * (z1[:, None] * w1[None, :].conj()).imag
    t = pts[:, 3] - (pts[:, 0] ** 2 + pts[:, 1] ** 2)
    im = t[:, None] + np.abs(z1[:, None] - w1[None, :]) ** 2
    return np.hypot(re, im)


def gap_volume_mc(poly: FPolyhedron, spec: IntegrationSpec) -> MCResult:
    """4-D volume of Omega intersected with the union of cuts.

    Importance sampler over the union of per-cut bounding boxes with
    multiplicity weights; exact for the support of the integrand since every
    cut lies inside its box.  For lam != 1 the estimate is carried out on the
    xi_map image and rescaled by lam^-4.
    """
    lam = poly.domain.lam
    unit = poly if lam == 1.0 else poly.rescaled_to_unit()
    w1, u2, d = _cut_arrays(unit)
    boxes = np.array([cut_bounding_box(c) for c in unit.cuts])  # (m, 2, 4)
    vols = np.prod(boxes[:, 1, :] - boxes[:, 0, :], axis=1)
    total = float(np.sum(vols))
    prob = vols / total

    def sample_eval(rng: np.random.Generator, n: int) -> np.ndarray:
        idx = rng.choice(len(vols), size=n, p=prob)
        lo, hi = boxes[idx, 0, :], boxes[idx, 1, :]
        pts = rng.uniform(size=(n, 4)) * (hi - lo) + lo
        absf = _abs_f_unit(pts, w1, u2)
        in_domain = pts[:, 3] > pts[:, 0] ** 2 + pts[:, 1] ** 2
        hit = in_domain & np.any(absf <= d[None, :], axis=1)
        # multiplicity = number of boxes covering the point
        mult = np.zeros(n, dtype=float)
        if np.any(hit):
            sub = pts[hit]
            inside = np.all(
                (sub[:, None, :] >= boxes[None, :, 0, :]) & (sub[:, None, :] <= boxes[None, :, 1, :]),
                axis=2,
            )
            mult[hit] = np.sum(inside, axis=1)
        out = np.zeros(n)
        out[hit] = total / mult[hit]
        return out

    res = mc_mean(sample_eval, spec)
    scale = lam ** -4
    return MCResult(res.value * scale, res.stderr * scale, res.samples)


def union_cut_volume_mc(cuts, spec: IntegrationSpec, domain: SiegelDomain | None = None) -> MCResult:
    """Convenience wrapper: volume of the union of the given cuts inside the domain."""
    poly = FPolyhedron(domain or SiegelDomain(1.0), tuple(cuts))
    return gap_volume_mc(poly, spec)
