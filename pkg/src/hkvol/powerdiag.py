"""Power diagrams for Koranyi balls (and their Euclidean prototype).

The horizontal power of a point z with respect to the gauge ball K(0, R) is

    hpow(z, K(0, R)) = |z1|^2 - sqrt(R^4 - x2^2)   if |x2| <= R^2,
                       +infinity                    otherwise,

extended to arbitrary centers by left invariance:
hpow(z, K(c, R)) = hpow(inv(c) * z, K(0, R)).  A point lies in the closed
ball exactly when its horizontal power is <= 0.  Integrating the excess
max(0, max_j -hpow_j) in the three Heisenberg coordinates recovers the 4-D
volume of the union of boundary cuts whose projections are the given balls
(a ball of radius R corresponds to a cut of size R^2); this is what
``gap_functional`` computes.  Cells of the diagram are the loci where one
ball strictly
minimizes the horizontal power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .heis import HPoint, KoranyiBall, dilate_about, group_inv, group_mul
from .integrate import IntegrationSpec, MCResult, mc_mean
from .siegel import FPolyhedron, SiegelDomain, cut_projection, gap_volume_mc

__all__ = [
    "Disk",
    "pow_euclid",
    "euclid_cell_classify",
    "hpow",
    "hpow_arr",
    "HPowerDiagram",
    "balls_bounding_box",
    "gap_functional",
    "union_volume_consistency",
    "doubling_factor",
    "doubling_check",
    "hpow_dilation_residual",
]


# ---------------------------------------------------------------------------
# Euclidean prototype


@dataclass(frozen=True)
class Disk:
    center: complex
    radius: float


def pow_euclid(z: complex, disk: Disk) -> float:
    """Classical power |z - c|^2 - r^2."""
    return abs(z - disk.center) ** 2 - disk.radius ** 2


def euclid_cell_classify(z: complex, disks) -> int | None:
    """Index of the strict power minimizer among disks containing z, else None."""
    vals = [pow_euclid(z, d) for d in disks]
    if min(vals) > 0:
        return None
    i = int(np.argmin(vals))
    if vals.count(vals[i]) > 1:
        return None
    return i


# ---------------------------------------------------------------------------
# horizontal power


def hpow(z: HPoint, ball: KoranyiBall) -> float:
    """Horizontal power of z with respect to a gauge ball (math.inf off the slab)."""
    loc = group_mul(group_inv(ball.center), z)
    r4 = ball.radius ** 4
    if abs(loc.x2) > ball.radius ** 2:
        return math.inf
    return abs(loc.z1) ** 2 - math.sqrt(max(r4 - loc.x2 ** 2, 0.0))


def hpow_arr(pts: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """(n, m) horizontal powers of points (n, 3) against balls (m, 3)/(m,)."""
    pts = np.asarray(pts, dtype=float)
    centers = np.asarray(centers, dtype=float).reshape(-1, 3)
    radii = np.asarray(radii, dtype=float).ravel()
    dx = pts[:, None, 0] - centers[None, :, 0]
    dy = pts[:, None, 1] - centers[None, :, 1]
    x2 = (
        pts[:, None, 2]
        - centers[None, :, 2]
        + 2.0 * (centers[None, :, 0] * pts[:, None, 1] - centers[None, :, 1] * pts[:, None, 0])
    )
    disc = radii[None, :] ** 4 - x2 * x2
    out = np.where(disc >= 0.0, dx * dx + dy * dy - np.sqrt(np.maximum(disc, 0.0)), np.inf)
    return out


@dataclass(frozen=True)
class HPowerDiagram:
    """A finite family of gauge balls with power-diagram classification."""

    balls: tuple[KoranyiBall, ...]

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))
        if not self.balls:
            raise ValueError("diagram needs at least one ball")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        centers = np.array([b.center.as_array() for b in self.balls])
        radii = np.array([b.radius for b in self.balls])
        return centers, radii

    def classify(self, z: HPoint) -> int | None:
        """Cell index of z, or None if z is outside the union or on a wall."""
        vals = [hpow(z, b) for b in self.balls]
        if min(vals) > 0:
            return None
        i = int(np.argmin(vals))
        if vals.count(vals[i]) > 1:
            return None
        return i

    def classify_arr(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized classify; -1 encodes None (outside union or tied)."""
        h = hpow_arr(pts, *self.arrays())
        idx = np.argmin(h, axis=1)
        best = h[np.arange(len(h)), idx]
        ties = np.sum(h == best[:, None], axis=1) > 1
        out = np.where((best <= 0) & ~ties, idx, -1)
        return out.astype(int)


def balls_bounding_box(balls) -> np.ndarray:
    """(2, 3) Euclidean box containing every ball."""
    boxes = np.array([b.bounding_box() for b in balls])
    return np.array([boxes[:, 0, :].min(axis=0), boxes[:, 1, :].max(axis=0)])


def gap_functional(balls, spec: IntegrationSpec) -> MCResult:
    """Integral of max(0, max_j -hpow_j) over the union's bounding box.

    Equals the 4-D volume of the union of boundary cuts projecting onto the
    balls.  Monte Carlo by default, midpoint-rule grid when
    spec.method == "grid".
    """
    if isinstance(balls, HPowerDiagram):
        balls = balls.balls
    balls = tuple(balls)
    centers = np.array([b.center.as_array() for b in balls])
    radii = np.array([b.radius for b in balls])
    lo, hi = balls_bounding_box(balls)
    vol_box = float(np.prod(hi - lo))

    # Cap the (points x balls) work matrix at ~2^23 entries.
    chunk_pts = max(1, (1 << 23) // max(len(balls), 1))

    def integrand(pts: np.ndarray) -> np.ndarray:
        out = np.empty(len(pts))
        for start in range(0, len(pts), chunk_pts):
            sub = pts[start : start + chunk_pts]
            h = hpow_arr(sub, centers, radii)
            out[start : start + chunk_pts] = np.maximum(0.0, -np.min(h, axis=1))
        return out

    if spec.method == "grid":
        res = spec.grid_resolution or max(int(round(spec.samples ** (1.0 / 3.0))), 2)
        axes = [lo[i] + (hi[i] - lo[i]) * (np.arange(res) + 0.5) / res for i in range(3)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
        total = 0.0
        for chunk in np.array_split(mesh, max(len(mesh) // (1 << 16), 1)):
            total += float(np.sum(integrand(chunk)))
        return MCResult(total / len(mesh) * vol_box, 0.0, len(mesh))

    def sample_eval(rng: np.random.Generator, n: int) -> np.ndarray:
        pts = rng.uniform(size=(n, 3)) * (hi - lo) + lo
        return integrand(pts) * vol_box

    return mc_mean(sample_eval, spec)


def union_volume_consistency(cuts, spec: IntegrationSpec) -> tuple[MCResult, MCResult]:
    """Dual-route volume check for lam = 1 cuts.

    Returns the 4-D Monte-Carlo volume of the union of cuts and the 3-D gap
    functional of the projected gauge balls; the two agree because each cut is
    a vertical translate family over its projection.
    """
    poly = FPolyhedron(SiegelDomain(1.0), tuple(cuts))
    v4 = gap_volume_mc(poly, spec)
    balls = [cut_projection(c) for c in poly.cuts]
    v3 = gap_functional(balls, spec)
    return v4, v3


def doubling_factor(t: float) -> float:
    """Volume growth bound for cut enlargement delta -> (1 + t) delta."""
    return (1.0 + t) ** 3


def doubling_check(cuts, t: float, spec: IntegrationSpec):
    """Verify vol(union of (1+t)-enlarged cuts) <= (1+t)^3 vol(union of cuts).

    Both sides are evaluated through the gap functional of the projected
    balls (enlarging delta scales the projected radius by sqrt(1 + t)).
    Returns (ok, enlarged, base) with MCResult values; ok allows 3 sigma of
    combined Monte-Carlo error.
    """
    if not 0 <= t <= 16:
        raise ValueError("t must lie in [0, 16]")
    base_balls = [cut_projection(c) for c in cuts]
    big_balls = [
        KoranyiBall(b.center, b.radius * math.sqrt(1.0 + t)) for b in base_balls
    ]
    base = gap_functional(base_balls, spec)
    big = gap_functional(big_balls, IntegrationSpec(spec.method, spec.samples, spec.seed + 1, spec.grid_resolution))
    slack = 3.0 * math.hypot(base.stderr, big.stderr)
    ok = big.value <= doubling_factor(t) * base.value + slack
    return ok, big, base


def hpow_dilation_residual(z: HPoint, ball: KoranyiBall, xi: float) -> float:
    """Residual of hpow(dilate_about(c, xi, z), K(c, R)) = xi^2 hpow(z, K(c, R / xi))."""
    lhs = hpow(dilate_about(ball.center, xi, z), ball)
    rhs = xi * xi * hpow(z, KoranyiBall(ball.center, ball.radius / xi))
    if math.isinf(lhs) or math.isinf(rhs):
        return 0.0 if lhs == rhs else math.inf
    return abs(lhs - rhs)
