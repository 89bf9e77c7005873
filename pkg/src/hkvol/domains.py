"""Defining functions of strongly pseudoconvex domains and boundary maps.

A ``DefiningFunction`` bundles rho with its first and second derivatives,
either as analytic closures or by central finite differences.  On top of it
live the Levi polynomial and Cauchy-Leray linear part, the bordered-Hessian
determinant M(rho), the boundary density and surface integral built from
M(rho)^(1/3) / |grad rho| (normalized so the integral is invariant under
rho -> c rho), the curvature quotient lambda(q) = 4 M / |grad rho|^3, and the
quadratic holomorphic change of variables that kills the holomorphic Hessian
at a normalized boundary point.

Points are complex pairs (z1, z2); real 4-vectors (x1, y1, x2, y2) appear in
gradient outputs and parametrizations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DefiningFunction",
    "ball_rho",
    "siegel_rho",
    "cvx_model_rho",
    "polynomial_rho",
    "BoundaryFrame",
    "boundary_frame",
    "levi_polynomial",
    "cauchy_leray",
    "levi_lower_bound_probe",
    "m_determinant",
    "fefferman_density",
    "lambda_q",
    "QuadratureSpec",
    "SphereBoundary",
    "StarBoundary",
    "fefferman_integral",
    "convexify",
    "PhiMap",
]


def _c2r(z1: complex, z2: complex) -> np.ndarray:
    return np.array([z1.real, z1.imag, z2.real, z2.imag])


def _r2c(p) -> tuple[complex, complex]:
    return complex(p[0], p[1]), complex(p[2], p[3])


class DefiningFunction:
    """rho together with derivative access.

    Parameters
    ----------
    evaluate : callable (z1, z2) -> float
    wirtinger : optional callable -> (rho_z1, rho_z2) complex pair
    complex_hessian : optional callable -> 2x2 array d^2 rho / dz_j dzbar_k
    holomorphic_hessian : optional callable -> 2x2 array d^2 rho / dz_j dz_k
    h : finite-difference step used for any derivative not supplied
    """

    def __init__(self, evaluate, wirtinger=None, complex_hessian=None,
                 holomorphic_hessian=None, h: float = 1e-4, name: str = ""):
        self._eval = evaluate
        self._wirt = wirtinger
        self._chess = complex_hessian
        self._hhess = holomorphic_hessian
        self.h = float(h)
        self.name = name
        self.mode = "analytic" if (wirtinger and complex_hessian and holomorphic_hessian) \
            else "finite-difference"

    # -- evaluation ---------------------------------------------------------

    def value(self, z1: complex, z2: complex) -> float:
        return float(self._eval(complex(z1), complex(z2)))

    def value4(self, p) -> float:
        return self.value(*_r2c(p))

    # -- first derivatives --------------------------------------------------

    def gradient(self, z1: complex, z2: complex) -> np.ndarray:
        """Real gradient (d/dx1, d/dy1, d/dx2, d/dy2)."""
        if self._wirt is not None:
            rz1, rz2 = self._wirt(z1, z2)
            return np.array([2 * rz1.real, -2 * rz1.imag, 2 * rz2.real, -2 * rz2.imag])
        p = _c2r(z1, z2)
        g = np.empty(4)
        for i in range(4):
            e = np.zeros(4)
            e[i] = self.h
            g[i] = (self.value4(p + e) - self.value4(p - e)) / (2 * self.h)
        return g

    def wirtinger(self, z1: complex, z2: complex) -> np.ndarray:
        """(rho_z1, rho_z2) with rho_z = (rho_x - i rho_y) / 2."""
        if self._wirt is not None:
            return np.asarray(self._wirt(z1, z2), dtype=complex)
        g = self.gradient(z1, z2)
        return np.array([(g[0] - 1j * g[1]) / 2, (g[2] - 1j * g[3]) / 2])

    # -- second derivatives -------------------------------------------------

    def _real_hessian(self, z1: complex, z2: complex) -> np.ndarray:
        p = _c2r(z1, z2)
        h = self.h
        H = np.empty((4, 4))
        for i in range(4):
            for j in range(i, 4):
                ei = np.zeros(4); ei[i] = h
                ej = np.zeros(4); ej[j] = h
                if i == j:
                    H[i, i] = (self.value4(p + ei) - 2 * self.value4(p) + self.value4(p - ei)) / h**2
                else:
                    H[i, j] = H[j, i] = (
                        self.value4(p + ei + ej) - self.value4(p + ei - ej)
                        - self.value4(p - ei + ej) + self.value4(p - ei - ej)
                    ) / (4 * h**2)
        return H

    def complex_hessian(self, z1: complex, z2: complex) -> np.ndarray:
        """2x2 matrix of d^2 rho / dz_j dzbar_k (Hermitian for real rho)."""
        if self._chess is not None:
            return np.asarray(self._chess(z1, z2), dtype=complex)
        H = self._real_hessian(z1, z2)
        return self._combine(H, mixed=False)

    def holomorphic_hessian(self, z1: complex, z2: complex) -> np.ndarray:
        """2x2 symmetric matrix of d^2 rho / dz_j dz_k."""
        if self._hhess is not None:
            return np.asarray(self._hhess(z1, z2), dtype=complex)
        H = self._real_hessian(z1, z2)
        return self._combine(H, mixed=True)

    @staticmethod
    def _combine(H: np.ndarray, mixed: bool) -> np.ndarray:
        # index map: z_j -> (x_j, y_j) = (2j, 2j+1)
        out = np.empty((2, 2), dtype=complex)
        for j in range(2):
            for k in range(2):
                xx = H[2 * j, 2 * k]
                yy = H[2 * j + 1, 2 * k + 1]
                xy = H[2 * j, 2 * k + 1]
                yx = H[2 * j + 1, 2 * k]
                if mixed:
                    out[j, k] = 0.25 * ((xx - yy) - 1j * (xy + yx))
                else:
                    out[j, k] = 0.25 * ((xx + yy) + 1j * (xy - yx))
        return out

    # -- misc ---------------------------------------------------------------

    def is_strictly_psh(self, z1: complex, z2: complex) -> bool:
        ev = np.linalg.eigvalsh(self.complex_hessian(z1, z2))
        return bool(np.all(ev > 0))

    def scaled(self, c: float) -> "DefiningFunction":
        """The defining function c * rho (same zero set for c > 0)."""
        wirt = (lambda z1, z2: c * self.wirtinger(z1, z2)) if self._wirt else None
        ch = (lambda z1, z2: c * self.complex_hessian(z1, z2)) if self._chess else None
        hh = (lambda z1, z2: c * self.holomorphic_hessian(z1, z2)) if self._hhess else None
        return DefiningFunction(
            lambda z1, z2: c * self._eval(z1, z2), wirt, ch, hh, h=self.h,
            name=f"{c}*{self.name}" if self.name else "",
        )


# ---------------------------------------------------------------------------
# built-in domains


def ball_rho(radius: float = 1.0) -> DefiningFunction:
    """rho = |z1|^2 + |z2|^2 - R^2 for the ball of radius R."""
    r2 = radius * radius
    return DefiningFunction(
        lambda z1, z2: abs(z1) ** 2 + abs(z2) ** 2 - r2,
        wirtinger=lambda z1, z2: (z1.conjugate(), z2.conjugate()),
        complex_hessian=lambda z1, z2: np.eye(2, dtype=complex),
        holomorphic_hessian=lambda z1, z2: np.zeros((2, 2), dtype=complex),
        name=f"ball({radius})",
    )


def siegel_rho(lam: float = 1.0) -> DefiningFunction:
    """rho = lam |z1|^2 - Im z2."""
    return DefiningFunction(
        lambda z1, z2: lam * abs(z1) ** 2 - z2.imag,
        wirtinger=lambda z1, z2: (lam * z1.conjugate(), 0.5j),
        complex_hessian=lambda z1, z2: np.array([[lam, 0], [0, 0]], dtype=complex),
        holomorphic_hessian=lambda z1, z2: np.zeros((2, 2), dtype=complex),
        name=f"siegel({lam})",
    )


def cvx_model_rho(lam: float, mu: complex = 0j, nu: float = 0.0,
                  beta: complex = 0j) -> DefiningFunction:
    """rho = -Im z2 + lam |z1|^2 + 2 Re(mu z1 zbar2) + nu |z2|^2 + 2 Re(beta z1^2).

    With beta = 0 this is the convexified normal form (no holomorphic
    quadratic part); a nonzero beta adds one for exercising ``convexify``.
    """
    mu = complex(mu)
    beta = complex(beta)

    def ev(z1, z2):
        return (-z2.imag + lam * abs(z1) ** 2 + 2 * (mu * z1 * z2.conjugate()).real
                + nu * abs(z2) ** 2 + 2 * (beta * z1 * z1).real)

    return DefiningFunction(
        ev,
        wirtinger=lambda z1, z2: (
            lam * z1.conjugate() + mu * z2.conjugate() + 2 * beta * z1,
            0.5j + mu.conjugate() * z1.conjugate() + nu * z2.conjugate(),
        ),
        complex_hessian=lambda z1, z2: np.array([[lam, mu], [mu.conjugate(), nu]], dtype=complex),
        holomorphic_hessian=lambda z1, z2: np.array([[2 * beta, 0], [0, 0]], dtype=complex),
        name=f"cvx(lam={lam},mu={mu},nu={nu},beta={beta})",
    )


def polynomial_rho(terms) -> DefiningFunction:
    """rho(z) = sum over terms of Re(c * z1^a zbar1^b z2^p zbar2^q).

    ``terms`` is an iterable of dicts {"coef": [re, im], "powers": [a, b, p, q]};
    derivatives are finite-difference.
    """
    parsed = []
    for t in terms:
        c = complex(t["coef"][0], t["coef"][1] if len(t["coef"]) > 1 else 0.0)
        a, b, p, q = (int(v) for v in t["powers"])
        if min(a, b, p, q) < 0:
            raise ValueError("powers must be nonnegative")
        parsed.append((c, a, b, p, q))

    def ev(z1, z2):
        tot = 0.0
        for c, a, b, p, q in parsed:
            tot += (c * z1**a * z1.conjugate()**b * z2**p * z2.conjugate()**q).real
        return tot

    return DefiningFunction(ev, name="polynomial")


# ---------------------------------------------------------------------------
# pointwise boundary quantities


def cauchy_leray(rho: DefiningFunction, z, w) -> complex:
    """Linear part sum_j rho_zj(w) (z_j - w_j)."""
    rz = rho.wirtinger(*w)
    return complex(rz[0] * (z[0] - w[0]) + rz[1] * (z[1] - w[1]))


def levi_polynomial(rho: DefiningFunction, z, w) -> complex:
    """Cauchy-Leray part plus half the holomorphic second-order term."""
    d = np.array([z[0] - w[0], z[1] - w[1]], dtype=complex)
    Q = rho.holomorphic_hessian(*w)
    return cauchy_leray(rho, z, w) + 0.5 * complex(d @ Q @ d)


def levi_lower_bound_probe(rho: DefiningFunction, boundary_samples, tau: float,
                           pairs_per_point: int = 50, seed: int = 3):
    """Empirical constant c = max |z - w|^2 / |levi_polynomial(z, w)|.

    For each boundary sample w, draws nearby points z in the closed domain
    with |z - w| <= tau and takes the worst quotient.  Returns (c, (z, w)).
    Raises if some pair has a vanishing Levi polynomial with z != w.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    c_best, pair_best = 0.0, None
    for w in boundary_samples:
        pw = _c2r(*w)
        for _ in range(pairs_per_point):
            step = rng.normal(size=4)
            step *= rng.uniform() * tau / np.linalg.norm(step)
            pz = pw + step
            z = _r2c(pz)
            if rho.value(*z) > 0 or np.allclose(pz, pw):
                continue
            p = levi_polynomial(rho, z, w)
            d2 = float(np.sum(step * step))
            if abs(p) == 0.0:
                raise ArithmeticError(f"Levi polynomial vanishes at z={z}, w={w}")
            q = d2 / abs(p)
            if q > c_best:
                c_best, pair_best = q, (z, w)
    return c_best, pair_best


def m_determinant(rho: DefiningFunction, z1: complex, z2: complex) -> float:
    """M(rho) = -det of the bordered complex Hessian [[rho, rho_zbark], [rho_zj, rho_zjzbark]]."""
    rz = rho.wirtinger(z1, z2)
    H = rho.complex_hessian(z1, z2)
    B = np.empty((3, 3), dtype=complex)
    B[0, 0] = rho.value(z1, z2)
    B[0, 1:] = rz.conjugate()  # rho_zbar_k = conj(rho_z_k) for real rho
    B[1:, 0] = rz
    B[1:, 1:] = H
    det = np.linalg.det(B)
    if abs(det.imag) > 1e-10:
        raise ArithmeticError(f"bordered determinant has imaginary residue {det.imag:.3e}")
    return -det.real


def _grad_norm(rho: DefiningFunction, z1: complex, z2: complex) -> float:
    return float(np.linalg.norm(rho.gradient(z1, z2)))


def fefferman_density(rho: DefiningFunction, z1: complex, z2: complex) -> float:
    """Boundary density D(q) = 4^(2/3) M(rho)(q)^(1/3) / |grad rho(q)|.

    Normalization fixed so that D is invariant under rho -> c rho (M scales
    as c^3 times |grad|-cubed bookkeeping; the quotient is exactly invariant),
    and the unit ball gives D = 4^(2/3) / 2.
    """
    M = m_determinant(rho, z1, z2)
    if M <= 0:
        raise ValueError(f"M(rho) must be positive at a strongly pseudoconvex point (got {M:.3e})")
    return 4.0 ** (2.0 / 3.0) * M ** (1.0 / 3.0) / _grad_norm(rho, z1, z2)


def lambda_q(rho: DefiningFunction, z1: complex, z2: complex) -> float:
    """Curvature quotient 4 M(rho)(q) / |grad rho(q)|^3; equals lam for the
    Siegel function at 0 and 1/2 for the unit ball."""
    M = m_determinant(rho, z1, z2)
    if M <= 0:
        raise ValueError(f"M(rho) must be positive (got {M:.3e})")
    return 4.0 * M / _grad_norm(rho, z1, z2) ** 3


@dataclass(frozen=True)
class BoundaryFrame:
    q: tuple[complex, complex]
    unit_normal: np.ndarray
    grad_norm: float
    M: float
    lambda_q: float


def boundary_frame(rho: DefiningFunction, z1: complex, z2: complex) -> BoundaryFrame:
    """Assemble the pointwise frame data at a boundary point (|rho| <= 1e-10)."""
    val = rho.value(z1, z2)
    if abs(val) > 1e-10:
        raise ValueError(f"point is not on the boundary: rho = {val:.3e}")
    g = rho.gradient(z1, z2)
    gn = float(np.linalg.norm(g))
    if gn == 0.0:
        raise ValueError("gradient vanishes; not a regular boundary point")
    M = m_determinant(rho, z1, z2)
    return BoundaryFrame((z1, z2), g / gn, gn, M, 4.0 * M / gn ** 3)


# ---------------------------------------------------------------------------
# boundary quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    """Tensor quadrature resolution: Gauss-Legendre on non-periodic axes,
    equal-weight (trapezoid) on periodic axes."""

    nodes: int = 24

    def __post_init__(self):
        if self.nodes < 2:
            raise ValueError("need at least 2 nodes per axis")


class SphereBoundary:
    """S^3 of radius R: (u0, u1, u2) in [0,1]^3 -> (R sin(chi) e^{i phi1}, R cos(chi) e^{i phi2})
    with chi = u0 pi/2; axes 1 and 2 periodic."""

    periodic = (False, True, True)

    def __init__(self, radius: float = 1.0):
        self.radius = radius

    def point(self, u0: float, u1: float, u2: float) -> tuple[complex, complex]:
        chi = 0.5 * math.pi * u0
        return (
            self.radius * math.sin(chi) * complex(math.cos(2 * math.pi * u1), math.sin(2 * math.pi * u1)),
            self.radius * math.cos(chi) * complex(math.cos(2 * math.pi * u2), math.sin(2 * math.pi * u2)),
        )


class StarBoundary:
    """Boundary of a domain star-shaped about ``center``: radial Newton solve
    of rho(center + r(omega) omega) = 0 along sphere directions."""

    periodic = (False, True, True)

    def __init__(self, rho: DefiningFunction, center=(0j, 0j), r0: float = 1.0):
        self.rho = rho
        self.center = np.array(_c2r(*center))
        self.r0 = r0

    def point(self, u0: float, u1: float, u2: float) -> tuple[complex, complex]:
        chi = 0.5 * math.pi * u0
        omega = np.array([
            math.sin(chi) * math.cos(2 * math.pi * u1),
            math.sin(chi) * math.sin(2 * math.pi * u1),
            math.cos(chi) * math.cos(2 * math.pi * u2),
            math.cos(chi) * math.sin(2 * math.pi * u2),
        ])
        r = self.r0
        for _ in range(60):
            p = self.center + r * omega
            val = self.rho.value4(p)
            der = float(self.rho.gradient(*_r2c(p)) @ omega)
            if der == 0.0:
                raise ArithmeticError("radial derivative vanished in boundary solve")
            step = val / der
            r -= step
            if abs(step) < 1e-13 * max(1.0, abs(r)):
                return _r2c(self.center + r * omega)
        raise ArithmeticError("radial boundary solve did not converge")


def _axis_nodes(n: int, periodic: bool):
    if periodic:
        x = (np.arange(n) + 0.5) / n
        w = np.full(n, 1.0 / n)
    else:
        x, w = np.polynomial.legendre.leggauss(n)
        x = 0.5 * (x + 1.0)
        w = 0.5 * w
    return x, w


def fefferman_integral(rho: DefiningFunction, boundary, quad: QuadratureSpec = QuadratureSpec(),
                       fd_step: float = 1e-5) -> float:
    """Surface integral of the boundary density over a parametrized boundary.

    The Euclidean area element is sqrt(det Gram) of finite-difference tangent
    vectors of the parametrization; nodes follow the QuadratureSpec rule.
    """
    n = quad.nodes
    axes = [_axis_nodes(n, p) for p in boundary.periodic]

    def embed(u):
        return np.array(_c2r(*boundary.point(*u)))

    total = []
    for i0, x0 in enumerate(axes[0][0]):
        for i1, x1 in enumerate(axes[1][0]):
            for i2, x2 in enumerate(axes[2][0]):
                u = np.array([x0, x1, x2])
                T = np.empty((3, 4))
                for a in range(3):
                    e = np.zeros(3)
                    e[a] = fd_step
                    T[a] = (embed(u + e) - embed(u - e)) / (2 * fd_step)
                gram = T @ T.T
                area = math.sqrt(max(np.linalg.det(gram), 0.0))
                if area == 0.0:
                    continue
                q = boundary.point(*u)
                w = axes[0][1][i0] * axes[1][1][i1] * axes[2][1][i2]
                total.append(w * area * fefferman_density(rho, *q))
    return math.fsum(total)


# ---------------------------------------------------------------------------
# Narasimhan convexification


class PhiMap:
    """Holomorphic quadratic map Phi(w) = (w1, w2 - i Q(w)) with
    Q(w) = sum_jk rho_zjzk(0) w_j w_k; kills the holomorphic quadratic part
    of rho at the origin and has identity real Jacobian there."""

    def __init__(self, Q: np.ndarray):
        self.Q = np.asarray(Q, dtype=complex)

    def forward(self, z1: complex, z2: complex) -> tuple[complex, complex]:
        w = np.array([z1, z2], dtype=complex)
        return z1, z2 - 1j * complex(w @ self.Q @ w)

    def inverse(self, z1: complex, z2: complex) -> tuple[complex, complex]:
        # solve w2 = z2 + i Q(z1, w2); Q is quadratic in w2 so Newton is safe
        w2 = z2
        for _ in range(60):
            w = np.array([z1, w2], dtype=complex)
            g = w2 - z2 - 1j * complex(w @ self.Q @ w)
            dg = 1.0 - 1j * complex(2.0 * (self.Q[1, 1] * w2) + (self.Q[0, 1] + self.Q[1, 0]) * z1)
            w2 = w2 - g / dg
            if abs(g) < 1e-14:
                return z1, w2
        raise ArithmeticError("PhiMap inversion did not converge")

    def pushforward_rho(self, rho: DefiningFunction) -> DefiningFunction:
        """rho composed with the inverse map (finite-difference derivatives)."""
        return DefiningFunction(
            lambda z1, z2: rho.value(*self.inverse(z1, z2)),
            h=rho.h,
            name=f"convexified({rho.name})",
        )


def convexify(rho: DefiningFunction, tol: float = 1e-8) -> PhiMap:
    """Quadratic change of variables at a normalized boundary point.

    Preconditions (checked to ``tol``): rho(0) = 0, grad rho(0) = (0, 0, 0, -1)
    (unit outward normal along -i in z2).  The returned map satisfies
    Phi(0) = 0, real Jacobian identity at 0, and the transformed rho has
    vanishing holomorphic Hessian at 0.
    """
    val = rho.value(0j, 0j)
    g = rho.gradient(0j, 0j)
    if abs(val) > tol:
        raise ValueError(f"rho(0) = {val:.3e}, not a boundary point")
    if np.linalg.norm(g - np.array([0.0, 0.0, 0.0, -1.0])) > tol:
        raise ValueError(f"gradient at 0 is {g}, expected (0, 0, 0, -1)")
    return PhiMap(rho.holomorphic_hessian(0j, 0j))
