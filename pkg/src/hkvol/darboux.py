"""Numeric contact straightening for convexified boundary graphs.

Work on the graph coordinates z' = (x1, y1, x2) of a boundary given by
rho(z1, x2 + i F(z1, x2)) = 0.  The boundary contact form pulled back to
these coordinates is

    theta_rho = (-1/r_y2) [ (r_y2 r_y1 + r_x1 r_x2) dx1
                          - (r_y2 r_x1 - r_y1 r_x2) dy1
                          + (r_y2^2 + r_x2^2) dx2 ],

with r_* the partials of rho evaluated at the graph point.  The kernel field

    v = r_x2 d/dx1 - r_y2 d/dy1 - r_x1 d/dx2

is integrated to a flow gamma; Gamma(a, b, c) = gamma((a, 0, c); b)
straightens v, and with (X1, T, X2) = Gamma^{-1} the coefficients
omega_1, omega_2 of theta_rho = omega_1 dX1 + omega_2 dX2 come out in closed
form from the columns of Jac Gamma.  Setting Y1 = omega_1/omega_2,

    Pi = (X1, -Y1/(4 lam), X2 + X1 Y1 / 2),    alpha = 1/omega_2

satisfies Pi^* theta_{model} = alpha theta_rho, where theta_{model} =
-2 lam y1 dx1 + 2 lam x1 dy1 + dx2 is the form of the quadric graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .domains import DefiningFunction, levi_polynomial

__all__ = [
    "OdeSpec",
    "graph_height",
    "theta_coefficients",
    "model_theta_coefficients",
    "StraightenedMap",
    "straighten_flow",
    "contact_residual",
    "jacobian_fd",
    "ThetaComposite",
    "theta_composite",
    "probe_report",
]


@dataclass(frozen=True)
class OdeSpec:
    """Flow and root-finding tolerances for the straightening pipeline."""

    rtol: float = 1e-12
    atol: float = 1e-12
    newton_tol: float = 1e-11
    newton_max_iter: int = 50
    fd_step: float = 1e-4
    method: str = "DOP853"


def graph_height(rho: DefiningFunction, x1: float, y1: float, x2: float,
                 tol: float = 1e-13, y2_init: float | None = None) -> float:
    """Solve rho(z1, x2 + i y2) = 0 for y2 (Newton with damping)."""
    z1 = complex(x1, y1)
    y2 = abs(z1) ** 2 if y2_init is None else y2_init
    for _ in range(80):
        val = rho.value(z1, complex(x2, y2))
        der = rho.gradient(z1, complex(x2, y2))[3]
        if der == 0.0:
            raise ArithmeticError("rho_y2 = 0: graph is vertical here")
        step = val / der
        # damped to stay safe far from the root
        if abs(step) > 1.0:
            step = math.copysign(1.0, step)
        y2 -= step
        if abs(step) < tol:
            return y2
    raise ArithmeticError("graph-height Newton did not converge")


def _graph_partials(rho: DefiningFunction, p3) -> np.ndarray:
    """4-vector of rho partials at the graph point above (x1, y1, x2)."""
    x1, y1, x2 = p3
    y2 = graph_height(rho, x1, y1, x2)
    return rho.gradient(complex(x1, y1), complex(x2, y2))


def theta_coefficients(rho: DefiningFunction, p3) -> np.ndarray:
    """(3,) coefficients of theta_rho at (x1, y1, x2) in dx1, dy1, dx2."""
    rx1, ry1, rx2, ry2 = _graph_partials(rho, p3)
    if ry2 == 0.0:
        raise ArithmeticError("rho_y2 = 0: contact form undefined here")
    return (-1.0 / ry2) * np.array([
        ry2 * ry1 + rx1 * rx2,
        -(ry2 * rx1 - ry1 * rx2),
        ry2 ** 2 + rx2 ** 2,
    ])


def model_theta_coefficients(lam: float, p3) -> np.ndarray:
    """theta of the quadric graph: -2 lam y1 dx1 + 2 lam x1 dy1 + dx2."""
    x1, y1, _ = p3
    return np.array([-2.0 * lam * y1, 2.0 * lam * x1, 1.0])


def _field(rho: DefiningFunction, p3) -> np.ndarray:
    rx1, _, rx2, ry2 = _graph_partials(rho, p3)
    return np.array([rx2, -ry2, -rx1])


def jacobian_fd(fn, p: np.ndarray, h: float = 1e-4) -> np.ndarray:
    """Richardson-extrapolated central-difference Jacobian (O(h^4))."""
    p = np.asarray(p, dtype=float)
    f0 = np.asarray(fn(p), dtype=float)
    J = np.empty((len(f0), len(p)))
    for i in range(len(p)):
        e = np.zeros(len(p))
        e[i] = h
        d1 = (np.asarray(fn(p + e)) - np.asarray(fn(p - e))) / (2 * h)
        d2 = (np.asarray(fn(p + 2 * e)) - np.asarray(fn(p - 2 * e))) / (4 * h)
        J[:, i] = (4.0 * d1 - d2) / 3.0
    return J


class StraightenedMap:
    """Callable results of the contact straightening for one (rho, lam)."""

    def __init__(self, rho: DefiningFunction, lam: float, radius: float, ode: OdeSpec):
        self.rho = rho
        self.lam = lam
        self.radius = radius
        self.ode = ode

    # -- flow and Gamma -----------------------------------------------------

    def flow(self, p3, t: float) -> np.ndarray:
        if t == 0.0:
            return np.asarray(p3, dtype=float)
        sol = solve_ivp(
            lambda s, y: _field(self.rho, y), (0.0, t), np.asarray(p3, dtype=float),
            method=self.ode.method, rtol=self.ode.rtol, atol=self.ode.atol,
        )
        if not sol.success:
            raise ArithmeticError(f"flow integration failed: {sol.message}")
        return sol.y[:, -1]

    def gamma_map(self, q: np.ndarray) -> np.ndarray:
        """Gamma(a, b, c) = flow of (a, 0, c) for time b."""
        a, b, c = q
        return self.flow(np.array([a, 0.0, c]), b)

    def _gamma_jac_columns(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """d Gamma / da and d Gamma / dc by central differences."""
        h = self.ode.fd_step
        cols = []
        for i in (0, 2):
            e = np.zeros(3)
            e[i] = h
            d1 = (self.gamma_map(q + e) - self.gamma_map(q - e)) / (2 * h)
            d2 = (self.gamma_map(q + 2 * e) - self.gamma_map(q - 2 * e)) / (4 * h)
            cols.append((4.0 * d1 - d2) / 3.0)
        return cols[0], cols[1]

    def gamma_inverse(self, p3: np.ndarray) -> np.ndarray:
        """Newton inversion of Gamma; the middle column of Jac Gamma is the
        field itself, so only two columns need differencing."""
        q = np.asarray(p3, dtype=float).copy()
        target = np.asarray(p3, dtype=float)
        for _ in range(self.ode.newton_max_iter):
            val = self.gamma_map(q)
            err = val - target
            if np.max(np.abs(err)) < self.ode.newton_tol:
                return q
            ca, cc = self._gamma_jac_columns(q)
            J = np.column_stack([ca, _field(self.rho, val), cc])
            step = np.linalg.solve(J, err)
            # line-searched damping
            lamb = 1.0
            base = float(np.linalg.norm(err))
            for _ in range(8):
                trial = q - lamb * step
                if float(np.linalg.norm(self.gamma_map(trial) - target)) < base:
                    q = trial
                    break
                lamb *= 0.5
            else:
                q = q - step
        raise ArithmeticError("Gamma inversion did not converge")

    # -- omega and Pi -------------------------------------------------------

    def _omegas(self, p3: np.ndarray, q: np.ndarray) -> tuple[float, float]:
        """omega_1, omega_2 at z' = p3 with q = Gamma^{-1}(p3)."""
        rx1, ry1, rx2, ry2 = _graph_partials(self.rho, p3)
        ca, cc = self._gamma_jac_columns(q)
        A = ry2 * ry1 + rx1 * rx2          # dx1 coefficient block
        B = ry2 ** 2 + rx2 ** 2            # dx2 coefficient block
        den = ry2 * ry2                    # rho_y2 * (rho_y2 pulled back): same point
        w1 = (-ca[0] * ry2 * A + ca[1] * (rx1 * B - rx2 * A) - ca[2] * ry2 * B) / den
        w2 = (-cc[0] * ry2 * A + cc[1] * (rx1 * B - rx2 * A) - cc[2] * ry2 * B) / den
        return float(w1), float(w2)

    def pi_alpha(self, p3) -> tuple[np.ndarray, float]:
        """(Pi(z'), alpha(z'))."""
        p3 = np.asarray(p3, dtype=float)
        q = self.gamma_inverse(p3)
        x1c, _, x2c = q
        w1, w2 = self._omegas(p3, q)
        if abs(w2) < 1e-10:
            raise ArithmeticError("omega_2 vanished; straightening broke down")
        y1c = w1 / w2
        pi = np.array([x1c, -y1c / (4.0 * self.lam), x2c + 0.5 * x1c * y1c])
        return pi, 1.0 / w2

    def pi(self, p3) -> np.ndarray:
        return self.pi_alpha(p3)[0]

    def alpha(self, p3) -> float:
        return self.pi_alpha(p3)[1]


def straighten_flow(rho: DefiningFunction, lam: float, radius: float = 0.2,
                    ode: OdeSpec = OdeSpec()) -> StraightenedMap:
    """Build the straightening Pi and multiplier alpha for a convexified rho.

    ``rho`` should define a graph through 0 with rho_y2(0) = -1 and no
    holomorphic quadratic part (the normal form); ``lam`` is the Levi
    eigenvalue in the z1 direction.  ``radius`` documents the neighborhood
    the caller intends to probe; the maps are lazy and evaluated per point.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    g = rho.gradient(0j, 0j)
    if abs(g[3] + 1.0) > 1e-8 or max(abs(g[0]), abs(g[1]), abs(g[2])) > 1e-8:
        raise ValueError(f"rho is not in normalized graph form at 0 (grad = {g})")
    return StraightenedMap(rho, lam, radius, ode)


def contact_residual(sm: StraightenedMap, p3) -> float:
    """| (Jac Pi)^T theta_model(Pi(z')) - alpha(z') theta_rho(z') | at z'."""
    p3 = np.asarray(p3, dtype=float)
    pi_p, alpha = sm.pi_alpha(p3)
    J = jacobian_fd(sm.pi, p3, h=sm.ode.fd_step)
    lhs = J.T @ model_theta_coefficients(sm.lam, pi_p)
    rhs = alpha * theta_coefficients(sm.rho, p3)
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# composite boundary map


class ThetaComposite:
    """Theta_q for a normalized rho: graph chart -> straightened graph chart.

    Theta = G_model o (Pi x id) o G_rho^{-1}, where G_rho(x1, y1, x2, y2) =
    (x1, y1, x2, F_rho(x1, y1, x2) + y2) trades the height above the graph
    for the last coordinate.  For the quadric model itself Theta is the
    identity.
    """

    def __init__(self, rho: DefiningFunction, sm: StraightenedMap):
        self.rho = rho
        self.sm = sm
        self.lam = sm.lam

    def forward(self, z1: complex, z2: complex) -> tuple[complex, complex]:
        x1, y1, x2, y2 = z1.real, z1.imag, z2.real, z2.imag
        height = y2 - graph_height(self.rho, x1, y1, x2)
        pi_p, _ = self.sm.pi_alpha(np.array([x1, y1, x2]))
        w1 = complex(pi_p[0], pi_p[1])
        model_f = self.lam * abs(w1) ** 2
        return w1, complex(pi_p[2], model_f + height)


def theta_composite(rho: DefiningFunction, lam: float | None = None,
                    radius: float = 0.2, ode: OdeSpec = OdeSpec()) -> ThetaComposite:
    """Composite map for a rho already in normalized convexified form at 0.

    When ``lam`` is omitted it is read off the (1,1) entry of the complex
    Hessian at the origin.
    """
    if lam is None:
        lam = float(rho.complex_hessian(0j, 0j)[0, 0].real)
    sm = straighten_flow(rho, lam, radius, ode)
    return ThetaComposite(rho, sm)


def _leray_model(lam: float, z, w) -> complex:
    """Linear form of the quadric model: lam wbar1 (z1 - w1) + (i/2)(z2 - w2)."""
    return lam * w[0].conjugate() * (z[0] - w[0]) + 0.5j * (z[1] - w[1])


def probe_report(theta: ThetaComposite, radius: float, n_pairs: int = 30, seed: int = 5):
    """Compare the Levi polynomial of rho with the model linear form after Theta.

    Samples pairs (z, w) with |z|, |w| <= radius, rho <= 0, w near the
    boundary, and reports the worst relative discrepancy

        |p(z, w) - l_model(Theta z, Theta w)| / (|p| + |l_model|)

    together with the spread of |det Jac Theta| (volume distortion) at the
    sampled points.  Returns a dict {"ratio": ..., "distortion_lo": ...,
    "distortion_hi": ..., "pairs": ...}.
    """
    rho = theta.rho
    rng = np.random.Generator(np.random.Philox(seed))

    def theta4(p):
        w1, w2 = theta.forward(complex(p[0], p[1]), complex(p[2], p[3]))
        return np.array([w1.real, w1.imag, w2.real, w2.imag])

    worst = 0.0
    dets = []
    done = 0
    while done < n_pairs:
        x1, y1 = rng.uniform(-radius, radius, size=2) * 0.7
        x2 = rng.uniform(-radius, radius) * 0.7
        f = graph_height(rho, x1, y1, x2)
        w = (complex(x1, y1), complex(x2, f))  # boundary source
        dz = rng.uniform(-radius, radius, size=4) * 0.4
        z = (w[0] + complex(dz[0], dz[1]), w[1] + complex(dz[2], dz[3]))
        if rho.value(*z) > 0:
            continue
        p_val = levi_polynomial(rho, z, w)
        tz, tw = theta.forward(*z), theta.forward(*w)
        l_val = _leray_model(theta.lam, tz, tw)
        denom = abs(p_val) + abs(l_val)
        if denom < 1e-14:
            continue
        worst = max(worst, abs(p_val - l_val) / denom)
        if len(dets) < 5:  # Jacobians are costly; a few suffice for the diagnostic
            pw = np.array([w[0].real, w[0].imag, w[1].real, w[1].imag])
            dets.append(abs(np.linalg.det(jacobian_fd(theta4, pw, h=1e-4))))
        done += 1
    return {
        "ratio": worst,
        "distortion_lo": float(min(dets)),
        "distortion_hi": float(max(dets)),
        "pairs": n_pairs,
    }
