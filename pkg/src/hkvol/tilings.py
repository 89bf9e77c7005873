"""Lattice cut families, covering bounds, and the best-cover optimizer.

``build_pk(k)`` removes one cut per lattice tile: the source sits at the
center of the tile v_pqr * I^(1/k) and the cut size sqrt(5) / (sqrt(2) k^2)
is exactly what it takes for the projected gauge ball (radius
(5/2)^(1/4) / k) to reach the corners of its tile.  The resulting family
covers the unit box and the total removed 4-D volume is bounded in closed
form.

``estimate_vn`` searches over n-ball coverings of the unit box for a small
gap functional; it initializes from the largest lattice family that fits,
then alternates an exact greedy radius-shrink pass (on a fixed quasi-random
probe set) with simulated-annealing moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .heis import (
    HBox,
    HPoint,
    KoranyiBall,
    arr_dilate,
    arr_dist,
    arr_group_mul,
    sigma_k_card,
    sigma_k_lattice,
)
from .integrate import IntegrationSpec, MCResult, sobol_unit
from .powerdiag import balls_bounding_box, gap_functional, hpow_arr
from .siegel import BoundaryPoint, Cut, FPolyhedron, SiegelDomain, cut_projection, cut_volume

__all__ = [
    "UPPER_CONST",
    "LOWER_CONST",
    "COVER_RAD4_BOUND",
    "BallConfiguration",
    "build_pk",
    "lattice_balls",
    "upper_bound_closed",
    "coverage_verify",
    "lower_bound_check",
    "power_mean_check",
    "wiener_subcover",
    "subdivide_scale",
    "AsymptoticRecord",
    "estimate_vn",
    "asymptotics_harness",
]

# exact endpoints of the normalized-gap bracket
UPPER_CONST = 5.0 * math.sqrt(5.0) * math.pi / (3.0 * math.sqrt(2.0))
LOWER_CONST = 4.0 * math.sqrt(2.0) / (math.pi ** 2 * 3 ** 7)
# any family of gauge balls covering the unit box satisfies sum radius^4 >= this
COVER_RAD4_BOUND = 2.0 / math.pi ** 2

UNIT_BOX = HBox(HPoint(0j, 0.0), 1.0)


def build_pk(k: int) -> FPolyhedron:
    """Lattice f-polyhedron: one cut of size sqrt(5)/(sqrt(2) k^2) per tile."""
    delta = math.sqrt(5.0) / (math.sqrt(2.0) * k * k)
    mid = HPoint(complex(0.5 / k, 0.5 / k), 0.5 / (k * k))
    cuts = []
    for v in sigma_k_lattice(k):
        u = arr_group_mul(v.as_array(), mid.as_array())
        cuts.append(Cut(BoundaryPoint(complex(u[0], u[1]), float(u[2])), delta))
    return FPolyhedron(SiegelDomain(1.0), tuple(cuts))


def lattice_balls(k: int) -> list[KoranyiBall]:
    """Projected gauge balls of build_pk(k); radius (5/2)^(1/4) / k."""
    return [cut_projection(c) for c in build_pk(k).cuts]


def upper_bound_closed(k: int) -> float:
    """Sum of closed-form cut volumes of build_pk(k):
    (5 sqrt(5) pi / (3 sqrt(2))) (k^4 + 2 k^3 - 2 k^2) / k^6.
    """
    delta = math.sqrt(5.0) / (math.sqrt(2.0) * k * k)
    return sigma_k_card(k) * cut_volume(delta)


# ---------------------------------------------------------------------------
# ball configurations over a target box


def _probe_points(box: HBox, n: int, seed: int) -> np.ndarray:
    """Quasi-random probe of the box plus its corner/edge/face lattice.

    The 27 points of the {lo, mid, hi}^3 local lattice are appended because
    box corners are where coverings are tight.
    """
    lo, hi = box.local_bounds()
    u = sobol_unit(3, n, seed=seed)
    local = lo + u * (hi - lo)
    marks = np.array(np.meshgrid(*[[0.0, 0.5, 1.0]] * 3, indexing="ij")).reshape(3, -1).T
    local = np.vstack([local, lo + marks * (hi - lo)])
    return box.grid(local)


@dataclass(frozen=True)
class BallConfiguration:
    """Finitely many gauge balls meant to cover a target box."""

    balls: tuple[KoranyiBall, ...]
    target: HBox = UNIT_BOX

    def __post_init__(self):
        object.__setattr__(self, "balls", tuple(self.balls))
        if not self.balls:
            raise ValueError("configuration needs at least one ball")

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        centers = np.array([b.center.as_array() for b in self.balls])
        radii = np.array([b.radius for b in self.balls])
        return centers, radii

    def sum_rad4(self) -> float:
        return math.fsum(b.radius ** 4 for b in self.balls)

    def balls_meet_target(self, samples: int = 1 << 12, seed: int = 7) -> bool:
        """Sampled check that every ball intersects the target box."""
        pts = _probe_points(self.target, samples, seed)
        for b in self.balls:
            if self.target.contains(b.center):
                continue
            if not np.any(b.contains_arr(pts)):
                return False
        return True

    def gap(self, spec: IntegrationSpec) -> MCResult:
        return gap_functional(self.balls, spec)


def coverage_verify(cfg: BallConfiguration, samples: int = 1 << 14, seed: int = 7):
    """(ok, worst_margin): does every probe point of the target lie in some ball?

    The probe is a fixed scrambled-Sobol set (deterministic in ``seed``)
    augmented with the corner/edge/face lattice of the box; the margin at a
    point is max_j (radius_j - dist_j), so coverage holds when the worst
    margin is nonnegative.
    """
    pts = _probe_points(cfg.target, samples, seed)
    centers, radii = cfg.arrays()
    margins = _cover_margins(pts, centers, radii)
    worst = float(np.min(np.max(margins, axis=1)))
    # small negative slack absorbs roundoff at probe points sitting exactly
    # on a ball boundary
    tol = 1e-9 * max(float(np.max(radii)), 1.0)
    return worst >= -tol, worst


def _cover_margins(pts: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """(n, m) matrix radius_j - dist(center_j, p_i)."""
    d = np.empty((len(pts), len(centers)))
    for j in range(len(centers)):
        d[:, j] = radii[j] - arr_dist(centers[j], pts)
    return d


def lower_bound_check(cfg: BallConfiguration, samples: int = 1 << 14, seed: int = 7):
    """Check sum radius^4 >= 2 / pi^2 for a configuration covering its box.

    Returns (ok, sum_rad4).  Raises for configurations that fail the sampled
    coverage check: the bound only says anything about genuine coverings.
    """
    covers, worst = coverage_verify(cfg, samples, seed)
    if not covers:
        raise ValueError(f"configuration does not cover its target (worst margin {worst:.3g})")
    s4 = cfg.sum_rad4()
    return s4 >= COVER_RAD4_BOUND * (1.0 - 1e-12), s4


def power_mean_check(values, d: float) -> bool:
    """Power-mean inequality mean(v^(d+1))^(1/(d+1)) >= mean(v^(d-1))^(1/(d-1)).

    Holds for every list of positive reals and d > 1 (Jensen).
    """
    v = np.asarray(values, dtype=float)
    if v.size == 0 or np.any(v <= 0):
        raise ValueError("values must be a nonempty list of positive reals")
    if d <= 1:
        raise ValueError("need d > 1")
    hi = float(np.mean(v ** (d + 1.0)) ** (1.0 / (d + 1.0)))
    lo = float(np.mean(v ** (d - 1.0)) ** (1.0 / (d - 1.0)))
    return hi >= lo * (1.0 - 1e-12)


def wiener_subcover(balls, samples: int = 1 << 13, seed: int = 11):
    """Greedy disjoint subfamily whose tripled balls cover the original union.

    Balls are scanned by decreasing radius; one is kept when its closed ball
    is gauge-disjoint from every ball already kept (center distance strictly
    greater than the radius sum, an exact certificate).  The covering claim
    union K_j  subset  union 3 K_kept is then checked on points sampled from
    the original union.  Returns (kept_indices, ok, worst_margin).
    """
    balls = list(balls)
    order = sorted(range(len(balls)), key=lambda i: -balls[i].radius)
    kept: list[int] = []
    for i in order:
        bi = balls[i]
        ok = True
        for j in kept:
            bj = balls[j]
            if arr_dist(bi.center.as_array(), bj.center.as_array()[None, :])[0] <= bi.radius + bj.radius:
                ok = False
                break
        if ok:
            kept.append(i)
    # sampled check of the tripling property
    rng = np.random.Generator(np.random.Philox(seed))
    per = max(samples // len(balls), 1)
    pts = []
    for b in balls:
        lo, hi = b.bounding_box()
        cand = rng.uniform(size=(4 * per, 3)) * (hi - lo) + lo
        cand = cand[b.contains_arr(cand)][:per]
        pts.append(cand)
    pts = np.vstack(pts)
    centers = np.array([balls[j].center.as_array() for j in kept])
    radii = np.array([3.0 * balls[j].radius for j in kept])
    margins = _cover_margins(pts, centers, radii)
    worst = float(np.min(np.max(margins, axis=1)))
    return kept, worst >= 0.0, worst


def subdivide_scale(cfg: BallConfiguration, k: int) -> BallConfiguration:
    """Push the configuration into every tile of the order-k lattice.

    Each ball (c, r) is mapped to (v * dilate(1/k, c), r / k) for every
    lattice point v; the image family covers the unit box whenever the
    original does, and the card(lattice)/k^6 scaling of per-ball gap volumes
    gives the expected gap ratio.
    """
    centers, radii = cfg.arrays()
    small = arr_dilate(1.0 / k, centers)
    out = []
    for v in sigma_k_lattice(k):
        moved = arr_group_mul(v.as_array(), small)
        for row, r in zip(moved, radii):
            out.append(KoranyiBall(HPoint(complex(row[0], row[1]), row[2]), r / k))
    return BallConfiguration(tuple(out), cfg.target)


# ---------------------------------------------------------------------------
# optimizer


@dataclass(frozen=True)
class AsymptoticRecord:
    """One optimized covering: ball count, gap estimate, and the scaled value."""

    n: int
    gap: float
    gap_stderr: float
    sqrt_n_gap: float


def _shrink_pass(centers: np.ndarray, radii: np.ndarray, probe: np.ndarray, pad: float = 1.0 + 1e-9):
    """Exact greedy radius shrink against the probe set.

    For each ball in turn, the minimal admissible radius is the largest
    probe distance among points no other ball covers.  Balls made redundant
    are parked on a probe point with a small radius (so they still meet the
    target box).  Modifies centers and radii in place.
    """
    n, m = len(probe), len(centers)
    tol = 1e-9 * max(float(np.max(radii)), 1.0)
    dist = np.empty((n, m))
    for j in range(m):
        dist[:, j] = arr_dist(centers[j], probe)

    # Phase 1: park balls whose every probe point is covered by another ball.
    # Smallest first, so cheap balls are discarded before valuable ones.
    for j in np.argsort(radii):
        margins = radii[None, :] - dist
        margins[:, j] = -np.inf
        if np.all(np.max(margins, axis=1) >= -tol):
            centers[j] = probe[(j * 37) % n]
            radii[j] = 1e-3
            dist[:, j] = arr_dist(centers[j], probe)

    # Phase 2: shrink each survivor onto its private probe points.  Those
    # points lie inside the ball (nothing else covers them), so radii never
    # grow and every probe point stays covered throughout.
    for j in np.argsort(-radii):
        margins = radii[None, :] - dist
        margins[:, j] = -np.inf
        uncovered = np.max(margins, axis=1) < -tol
        if np.any(uncovered):
            needed = float(np.max(dist[uncovered, j])) * pad
            radii[j] = max(min(needed, radii[j]), 1e-6)
    return radii


def _objective(centers, radii, eval_pts, box_vol):
    h = hpow_arr(eval_pts, centers, radii)
    return float(np.mean(np.maximum(0.0, -np.min(h, axis=1)))) * box_vol


def _initial_family(n: int) -> tuple[np.ndarray, np.ndarray]:
    k = 1
    while sigma_k_card(k + 1) <= n:
        k += 1
    balls = lattice_balls(k)
    centers = np.array([b.center.as_array() for b in balls])
    radii = np.array([b.radius for b in balls])
    extra = n - len(balls)
    if extra > 0:
        centers = np.vstack([centers, centers[:extra]])
        radii = np.concatenate([radii, radii[:extra]])
    return centers, radii


def estimate_vn(
    n: int,
    seed: int = 0,
    budget: int = 200,
    probe_samples: int = 1 << 14,
    final_spec: IntegrationSpec | None = None,
) -> tuple[BallConfiguration, AsymptoticRecord]:
    """Search for an n-ball covering of the unit box with a small gap functional.

    Start from the largest lattice family with at most n balls (padded with
    duplicates), run a greedy radius-shrink pass, then ``budget`` annealing
    moves (center jitter / radius rescale, coverage-preserving, common random
    numbers for the objective), and a final shrink.  The reported gap is a
    fresh Monte-Carlo estimate with a seed independent of the search.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, 0xB0A))))
    centers, radii = _initial_family(n)
    probe = _probe_points(UNIT_BOX, probe_samples, seed=7)
    _shrink_pass(centers, radii, probe)

    # fixed evaluation cloud over a frozen bounding box (common random numbers)
    balls0 = [KoranyiBall(HPoint(complex(c[0], c[1]), c[2]), r) for c, r in zip(centers, radii)]
    lo, hi = balls_bounding_box(balls0)
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    box_vol = float(np.prod(hi - lo))
    eval_pts = lo + sobol_unit(3, 1 << 14, seed=seed + 13) * (hi - lo)

    cover_tol = 1e-9 * max(float(np.max(radii)), 1.0)

    def covered(c, r):
        m = np.full(len(probe), -np.inf)
        for j in range(len(c)):
            m = np.maximum(m, r[j] - arr_dist(c[j], probe))
        worst = float(np.min(m))
        return worst >= -cover_tol

    def refit(c, r, j):
        """Set radius j to exactly cover the probe points no other ball covers.

        Returns False when the new radius would exceed the jittered ball's old
        reach so much that the move is pointless; coverage holds by
        construction otherwise.
        """
        m = np.full(len(probe), -np.inf)
        for i in range(len(c)):
            if i != j:
                m = np.maximum(m, r[i] - arr_dist(c[i], probe))
        private = m < -cover_tol
        if not np.any(private):
            r[j] = 1e-3
            c[j] = probe[(j * 37) % len(probe)]
            return True
        r[j] = float(np.max(arr_dist(c[j], probe[private]))) * (1.0 + 1e-9)
        return True

    best = _objective(centers, radii, eval_pts, box_vol)
    temp0 = 0.05 * max(best, 1e-12)
    cur_c, cur_r, cur = centers.copy(), radii.copy(), best
    best_c, best_r = cur_c.copy(), cur_r.copy()
    for step in range(budget):
        temp = temp0 * (1.0 - step / max(budget, 1))
        j = int(rng.integers(len(cur_r)))
        c, r = cur_c.copy(), cur_r.copy()
        move = rng.uniform()
        if move < 0.55:
            # relocate-and-refit: jitter the center, then give the ball the
            # smallest radius that still covers its private probe points
            jitter = rng.normal(scale=0.15 * r[j], size=3)
            jitter[2] *= r[j]  # vertical direction scales quadratically
            c[j] = arr_group_mul(c[j], jitter)
            refit(c, r, j)
        elif move < 0.9:
            r[j] *= float(rng.uniform(0.9, 1.1))
            if not covered(c, r):
                continue
        else:
            # teleport onto a random probe point of the target box and refit
            c[j] = probe[int(rng.integers(len(probe)))]
            refit(c, r, j)
        val = _objective(c, r, eval_pts, box_vol)
        if val < cur or rng.uniform() < math.exp(-(val - cur) / max(temp, 1e-15)):
            cur_c, cur_r, cur = c, r, val
            if val < best:
                best, best_c, best_r = val, c.copy(), r.copy()
    _shrink_pass(best_c, best_r, probe)

    balls = tuple(
        KoranyiBall(HPoint(complex(c[0], c[1]), c[2]), float(r)) for c, r in zip(best_c, best_r)
    )
    cfg = BallConfiguration(balls)
    spec = final_spec or IntegrationSpec(samples=1 << 20, seed=seed + 0x5EED)
    res = cfg.gap(spec)
    rec = AsymptoticRecord(n=n, gap=res.value, gap_stderr=res.stderr, sqrt_n_gap=math.sqrt(n) * res.value)
    return cfg, rec


def asymptotics_harness(k_max: int = 4, seed: int = 0, budget: int = 200) -> list[AsymptoticRecord]:
    """Optimized records for n = card(lattice at k), k = 1..k_max."""
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    out = []
    for k in range(1, k_max + 1):
        _, rec = estimate_vn(sigma_k_card(k), seed=seed + k, budget=budget)
        out.append(rec)
    return out
