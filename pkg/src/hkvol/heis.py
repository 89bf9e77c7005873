"""First Heisenberg group: group law, Koranyi gauge, dilations, boxes, lattices.

Points live in C x R.  A point (z1, x2) is stored either as an ``HPoint``
(scalar API) or as rows of an (N, 3) float array ``[x1, y1, x2]`` for
vectorized work.  The group law is

    (z1, x2) * (w1, u2) = (z1 + w1, x2 + u2 + 2 Im(z1 conj(w1)))

and the Koranyi gauge is (|z1|^4 + x2^2)^(1/4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "HPoint",
    "HBox",
    "KoranyiBall",
    "group_mul",
    "group_inv",
    "gauge",
    "dist",
    "dilate",
    "dilate_about",
    "arr_from_points",
    "arr_group_mul",
    "arr_group_inv",
    "arr_gauge",
    "arr_dist",
    "arr_dilate",
    "sigma_k_lattice",
    "sigma_k_card",
]


@dataclass(frozen=True)
class HPoint:
    """A point (z1, x2) of the Heisenberg group C x R."""

    z1: complex
    x2: float

    def __post_init__(self):
        z1 = complex(self.z1)
        x2 = float(self.x2)
        if not (math.isfinite(z1.real) and math.isfinite(z1.imag) and math.isfinite(x2)):
            raise ValueError("HPoint coordinates must be finite")
        object.__setattr__(self, "z1", z1)
        object.__setattr__(self, "x2", x2)

    def as_array(self) -> np.ndarray:
        return np.array([self.z1.real, self.z1.imag, self.x2])


def group_mul(a: HPoint, b: HPoint) -> HPoint:
    """Heisenberg product a * b."""
    twist = 2.0 * (a.z1 * b.z1.conjugate()).imag
    return HPoint(a.z1 + b.z1, a.x2 + b.x2 + twist)


def group_inv(a: HPoint) -> HPoint:
    """Group inverse; componentwise negation."""
    return HPoint(-a.z1, -a.x2)


def gauge(a: HPoint) -> float:
    """Koranyi gauge (|z1|^4 + x2^2)^(1/4)."""
    return (abs(a.z1) ** 4 + a.x2 ** 2) ** 0.25


def dist(a: HPoint, b: HPoint) -> float:
    """Left-invariant Koranyi distance gauge(inv(a) * b)."""
    return gauge(group_mul(group_inv(a), b))


def dilate(xi: float, a: HPoint) -> HPoint:
    """Anisotropic dilation (z1, x2) -> (xi z1, xi^2 x2)."""
    return HPoint(xi * a.z1, xi * xi * a.x2)


def dilate_about(w: HPoint, xi: float, a: HPoint) -> HPoint:
    """Dilation centered at w: w * dilate(xi, inv(w) * a)."""
    return group_mul(w, dilate(xi, group_mul(group_inv(w), a)))


# ---------------------------------------------------------------------------
# vectorized variants on (N, 3) arrays [x1, y1, x2]


def arr_from_points(points) -> np.ndarray:
    return np.array([[p.z1.real, p.z1.imag, p.x2] for p in points], dtype=float).reshape(-1, 3)


def arr_group_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Rowwise product a * b with numpy broadcasting."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., 0] = a[..., 0] + b[..., 0]
    out[..., 1] = a[..., 1] + b[..., 1]
    # 2 Im(z1 conj(w1)) = 2 (y1_a x1_b - x1_a y1_b)
    out[..., 2] = a[..., 2] + b[..., 2] + 2.0 * (a[..., 1] * b[..., 0] - a[..., 0] * b[..., 1])
    return out


def arr_group_inv(a: np.ndarray) -> np.ndarray:
    return -np.asarray(a, dtype=float)


def arr_gauge(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    r2 = a[..., 0] ** 2 + a[..., 1] ** 2
    return (r2 * r2 + a[..., 2] ** 2) ** 0.25


def arr_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return arr_gauge(arr_group_mul(arr_group_inv(a), b))


def arr_dilate(xi: float, a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = a * xi
    out[..., 2] = a[..., 2] * (xi * xi)
    return out


# ---------------------------------------------------------------------------
# boxes


@dataclass(frozen=True)
class HBox:
    """Group translate of a standard box.

    With ``hat=False`` the local region is
    I^r = {0 <= x1 <= r, 0 <= y1 <= r, 0 <= x2 <= r^2};
    with ``hat=True`` it is the concentric enlargement obtained from I^{2r}
    by the Euclidean shift -(r/2 + i r/2, 3 r^2 / 2), i.e.
    -r/2 <= x1, y1 <= 3r/2 and -3r^2/2 <= x2 <= 5r^2/2.

    Membership is always tested in local coordinates inv(anchor) * a, so the
    box is the left translate of the local region by ``anchor``.
    """

    anchor: HPoint
    side: float
    hat: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.side) and self.side > 0):
            raise ValueError("box side must be finite and positive")

    def local_bounds(self) -> np.ndarray:
        """(2, 3) array of [lo, hi] per local coordinate (closed box)."""
        r = self.side
        if self.hat:
            return np.array([[-r / 2, -r / 2, -1.5 * r * r],
                             [1.5 * r, 1.5 * r, 2.5 * r * r]])
        return np.array([[0.0, 0.0, 0.0], [r, r, r * r]])

    def contains(self, a: HPoint) -> bool:
        loc = group_mul(group_inv(self.anchor), a).as_array()
        lo, hi = self.local_bounds()
        return bool(np.all(loc >= lo) and np.all(loc <= hi))

    def contains_arr(self, pts: np.ndarray) -> np.ndarray:
        loc = arr_group_mul(arr_group_inv(self.anchor.as_array()), np.asarray(pts, dtype=float))
        lo, hi = self.local_bounds()
        return np.all((loc >= lo) & (loc <= hi), axis=-1)

    def volume(self) -> float:
        lo, hi = self.local_bounds()
        return float(np.prod(hi - lo))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform samples as an (n, 3) array (Haar = Lebesgue in these coords)."""
        lo, hi = self.local_bounds()
        loc = rng.uniform(size=(n, 3)) * (hi - lo) + lo
        return arr_group_mul(self.anchor.as_array(), loc)

    def grid(self, pts_local: np.ndarray) -> np.ndarray:
        """Translate local-coordinate points into the box."""
        return arr_group_mul(self.anchor.as_array(), np.asarray(pts_local, dtype=float))


@dataclass(frozen=True)
class KoranyiBall:
    """Closed gauge ball {a : dist(center, a) <= radius}."""

    center: HPoint
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError("radius must be finite and positive")

    def contains(self, a: HPoint) -> bool:
        return dist(self.center, a) <= self.radius

    def contains_arr(self, pts: np.ndarray) -> np.ndarray:
        return arr_dist(self.center.as_array(), np.asarray(pts, dtype=float)) <= self.radius

    def rvolume(self) -> float:
        """Haar volume (pi^2 / 2) radius^4."""
        return 0.5 * math.pi ** 2 * self.radius ** 4

    def bounding_box(self) -> np.ndarray:
        """(2, 3) Euclidean [lo, hi] box containing the ball."""
        c = self.center
        r = self.radius
        cx, cy = c.z1.real, c.z1.imag
        # |x2 - c.x2 + 2 Im(z1 conj(c.z1))| <= r^2 and |z1 - c.z1| <= r
        hw = r * r + 2.0 * r * abs(c.z1)
        return np.array([[cx - r, cy - r, c.x2 - hw], [cx + r, cy + r, c.x2 + hw]])


# ---------------------------------------------------------------------------
# lattices


def sigma_k_card(k: int) -> int:
    """Number of admissible lattice triples for subdivision order k."""
    return k ** 4 + 2 * k ** 3 - 2 * k * k


def sigma_k_lattice(k: int) -> list[HPoint]:
    """Lattice points v_pqr = (p/k + i q/k, r/k^2) with 0 <= p, q <= k-1 and
    -2q <= r <= k^2 - 1 + 2p.

    The left translates v * I^(1/k) tile a neighborhood of I^1; the triple
    count is k^4 + 2k^3 - 2k^2.
    """
    if k < 1:
        raise ValueError("k must be a positive integer")
    pts = []
    for p in range(k):
        for q in range(k):
            for r in range(-2 * q, k * k + 2 * p):
                pts.append(HPoint(complex(p / k, q / k), r / (k * k)))
    assert len(pts) == sigma_k_card(k)
    return pts
