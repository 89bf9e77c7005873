"""Worked examples: lemniscate-type planar domains, bidisc cuts, cut nesting.

Trend verdicts use the least-squares slope of log(statistic) against log(n)
over the last third of the points: slope <= -0.1 reads "converging-zero",
|slope| < 0.1 reads "converging-positive" (the scaled statistic has leveled
off at a positive value), anything else is "inconclusive".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .integrate import IntegrationSpec, mc_mean
from .siegel import BoundaryPoint, SiegelDomain

__all__ = [
    "TrendReport",
    "lemniscate_gap_area",
    "lemniscate_demo",
    "bidisc_gap_mc",
    "bidisc_demo",
    "cut_nesting_check",
    "ShrinkReport",
    "delta_shrink_check",
]


@dataclass(frozen=True)
class TrendReport:
    n_values: tuple[int, ...]
    statistic: tuple[float, ...]
    verdict: str
    details: dict = field(default_factory=dict, compare=False)

    @staticmethod
    def from_series(n_values, statistic, details=None) -> "TrendReport":
        n_values = tuple(int(n) for n in n_values)
        statistic = tuple(float(s) for s in statistic)
        if len(n_values) != len(statistic) or len(n_values) < 2:
            raise ValueError("need at least two aligned (n, statistic) points")
        tail = max(2, -(-len(n_values) // 3))  # ceil(len/3), at least 2
        x = np.log(np.array(n_values[-tail:], dtype=float))
        y = np.log(np.array(statistic[-tail:], dtype=float))
        slope = float(np.polyfit(x, y, 1)[0])
        if slope <= -0.1:
            verdict = "converging-zero"
        elif slope < 0.1:
            verdict = "converging-positive"
        else:
            verdict = "inconclusive"
        d = dict(details or {})
        d["slope"] = slope
        return TrendReport(n_values, statistic, verdict, d)


# ---------------------------------------------------------------------------
# lemniscate-type planar domains


def _lemniscate_min_dist(r: np.ndarray, theta: np.ndarray, n: int) -> np.ndarray:
    """Distance from r e^{i theta} to the nearest 2n-th root of unity.

    The roots sit at angles k pi / n, so only the angular offset to the
    nearest root matters: dist^2 = r^2 + 1 - 2 r cos(offset).
    """
    step = math.pi / n
    off = np.abs(theta - np.round(theta / step) * step)
    return np.sqrt(np.maximum(r * r + 1.0 - 2.0 * r * np.cos(off), 0.0))


def lemniscate_gap_area(n: int, radial: int = 2000, angular: int = 4000) -> float:
    """Area of the unit disc minus P_n by polar midpoint quadrature.

    P_n keeps the points of the disc at distance > pi/n from every 2n-th
    root of unity (one peak-set cut of radius pi/n per root).
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    r = (np.arange(radial) + 0.5) / radial
    th = (np.arange(angular) + 0.5) * (2.0 * math.pi / angular)
    rr, tt = np.meshgrid(r, th, indexing="ij")
    gap = _lemniscate_min_dist(rr, tt, n) <= math.pi / n
    # polar area element r dr dtheta
    return float(np.sum(rr[gap]) * (1.0 / radial) * (2.0 * math.pi / angular))


def lemniscate_sandwich(n: int, samples: int = 10**4, seed: int = 9):
    """Sampled check of {|z| < 1 - pi/n} subset P_n subset {|z| < 1 - sqrt(3) pi/(2n)}.

    Returns (inner_ok, outer_ok, worst_inner_margin, worst_outer_margin).
    """
    rng = np.random.Generator(np.random.Philox(seed))
    delta = math.pi / n
    # inner: points strictly inside the small disc must lie in P_n
    r_in = (1.0 - delta) * np.sqrt(rng.uniform(size=samples)) * (1.0 - 1e-12)
    th = rng.uniform(0.0, 2.0 * math.pi, size=samples)
    d = _lemniscate_min_dist(r_in, th, n)
    inner_margin = float(np.min(d - delta))
    # outer: points of P_n must lie inside the bigger disc
    r = np.sqrt(rng.uniform(size=4 * samples))
    th2 = rng.uniform(0.0, 2.0 * math.pi, size=4 * samples)
    in_pn = _lemniscate_min_dist(r, th2, n) > delta
    outer_margin = float(np.min((1.0 - math.sqrt(3.0) * math.pi / (2 * n)) - r[in_pn]))
    return inner_margin > 0.0, outer_margin > 0.0, inner_margin, outer_margin


def lemniscate_demo(n_list=(4, 8, 16, 32), radial: int = 2000, angular: int = 4000) -> TrendReport:
    """n * gap-area trend for the root-of-unity cut domains."""
    stats, details = [], {"gap_area": [], "sandwich": []}
    for n in n_list:
        area = lemniscate_gap_area(n, radial, angular)
        stats.append(n * area)
        details["gap_area"].append(area)
        details["sandwich"].append(lemniscate_sandwich(n))
    return TrendReport.from_series(n_list, stats, details)


# ---------------------------------------------------------------------------
# bidisc


def bidisc_gap_mc(m: int, c: float = 1.0, spec: IntegrationSpec | None = None):
    """Volume of the near-boundary region cut out of the bidisc.

    Sources are the m x m grid (e^{2 pi i a / m}, e^{2 pi i b / m}) on the
    distinguished boundary, the peak function is
    f(z, w) = (1 - z1 conj(w1)) (1 - z2 conj(w2)), and each cut has size
    c / m^2.  Returns an MCResult for vol{z in D^2 : some |f(z, w)| <= delta}.
    """
    spec = spec or IntegrationSpec(samples=1 << 19, seed=17)
    delta = c / (m * m)
    ang = 2.0 * math.pi * np.arange(m) / m
    w1 = np.exp(1j * ang)

    def sample_eval(rng: np.random.Generator, k: int) -> np.ndarray:
        z1 = np.sqrt(rng.uniform(size=k)) * np.exp(1j * rng.uniform(0, 2 * math.pi, size=k))
        z2 = np.sqrt(rng.uniform(size=k)) * np.exp(1j * rng.uniform(0, 2 * math.pi, size=k))
        f1 = np.abs(1.0 - z1[:, None] * w1[None, :].conj())  # (k, m)
        f2 = np.abs(1.0 - z2[:, None] * w1[None, :].conj())
        best = f1.min(axis=1) * f2.min(axis=1)  # min over the product grid factorizes
        return np.where(best <= delta, math.pi ** 2, 0.0)

    return mc_mean(sample_eval, spec)


def bidisc_demo(m_list=(2, 4, 8, 16), c: float = 1.0,
                spec: IntegrationSpec | None = None) -> TrendReport:
    """sqrt(n) * gap trend for the m x m bidisc scheme (n = m^2)."""
    n_values, stats, details = [], [], {"gap": [], "stderr": []}
    for m in m_list:
        res = bidisc_gap_mc(m, c, spec)
        n_values.append(m * m)
        stats.append(m * res.value)
        details["gap"].append(res.value)
        details["stderr"].append(res.stderr)
    return TrendReport.from_series(n_values, stats, details)


# ---------------------------------------------------------------------------
# cut nesting


def cut_nesting_check(f, g, eps: float, n_samples: int = 300, seed: int = 21,
                      domain: SiegelDomain | None = None):
    """Check the cut-nesting transcription for two peak-type functions.

    Wherever the closeness hypothesis |f - g| <= eps (|f| + |g|) holds on
    sampled (z, w), verify |f| <= ehat |g| and |g| <= ehat |f| with
    ehat = (1 + eps)/(1 - eps), and the nested memberships
    |g| <= delta => |f| <= ehat delta => |g| <= ehat^2 delta at a sampled
    delta.  Points failing the hypothesis are reported separately (they
    falsify the premise, not the nesting).
    """
    if not 0 <= eps < 1.0 / 3.0:
        raise ValueError("eps must lie in [0, 1/3)")
    dom = domain or SiegelDomain(1.0)
    ehat = (1.0 + eps) / (1.0 - eps) if eps > 0 else 1.0
    rng = np.random.Generator(np.random.Philox(seed))
    hypothesis_failures, violations, checked = [], [], 0
    for _ in range(n_samples):
        w = BoundaryPoint(complex(*rng.uniform(-1, 1, 2)), float(rng.uniform(-1, 1)))
        z1 = complex(*rng.uniform(-1, 1, 2))
        y2 = abs(z1) ** 2 * dom.lam + rng.uniform(0, 2)
        z = (z1, complex(rng.uniform(-1, 1), y2))
        fv, gv = f(dom, z, w), g(dom, z, w)
        af, ag = abs(fv), abs(gv)
        if abs(fv - gv) > eps * (af + ag):
            hypothesis_failures.append((z, w))
            continue
        checked += 1
        tol = 1e-12 * max(1.0, af, ag)
        if af > ehat * ag + tol or ag > ehat * af + tol:
            violations.append((z, w, "transcription"))
            continue
        delta = float(rng.uniform(0.5, 2.0)) * max(ag, 1e-6)
        if ag <= delta and af > ehat * delta + tol:
            violations.append((z, w, "first inclusion"))
        if af <= ehat * delta and ag > ehat * ehat * delta + tol:
            violations.append((z, w, "second inclusion"))
    return {
        "checked": checked,
        "hypothesis_failures": hypothesis_failures,
        "violations": violations,
        "ok": not violations,
    }


# ---------------------------------------------------------------------------
# delta shrink


@dataclass(frozen=True)
class ShrinkReport:
    ok: bool
    inconclusive: bool
    deltas: tuple[float, ...]
    gap_correlation: float | None

    def __bool__(self) -> bool:
        return self.ok


def delta_shrink_check(polyhedra, gaps=None) -> ShrinkReport:
    """Finite-sequence surrogate for "maximal cut size goes to zero".

    ok requires delta(P_last) < delta(P_first); when measured gaps are
    supplied they must be decreasing for the check to be conclusive, and the
    delta-gap correlation is reported.
    """
    deltas = tuple(p.delta for p in polyhedra)
    if len(deltas) < 2:
        raise ValueError("need at least two polyhedra")
    corr = None
    inconclusive = False
    if gaps is not None:
        gaps = tuple(float(gv) for gv in gaps)
        if len(gaps) != len(deltas):
            raise ValueError("gaps must align with the polyhedra")
        if any(b >= a for a, b in zip(gaps, gaps[1:])):
            inconclusive = True
        if len(set(deltas)) > 1 and len(set(gaps)) > 1:
            corr = float(np.corrcoef(deltas, gaps)[0, 1])
    ok = deltas[-1] < deltas[0] and not inconclusive
    return ShrinkReport(ok, inconclusive, deltas, corr)
