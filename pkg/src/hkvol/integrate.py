"""Integration back end: spec object, seeded batch Monte Carlo, Sobol points.

All estimators are deterministic functions of their ``IntegrationSpec``:
a master 64-bit seed is expanded via ``numpy.random.SeedSequence.spawn`` into
per-batch seeds, batches are evaluated independently, and the batch means are
reduced with compensated (math.fsum) summation, so results are reproducible
bit-for-bit and independent of batch scheduling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

__all__ = ["IntegrationSpec", "MCResult", "mc_mean", "sobol_unit", "batch_sizes"]

_BATCH = 1 << 18  # samples per batch


@dataclass(frozen=True)
class IntegrationSpec:
    """How to carry out a volume/functional estimate.

    method: "monte-carlo" or "grid".
    samples: total Monte-Carlo draws (or total grid points for "grid").
    seed: master seed (unsigned 64-bit).
    grid_resolution: optional per-axis resolution override for "grid".
    """

    method: str = "monte-carlo"
    samples: int = 1 << 20
    seed: int = 0
    grid_resolution: int | None = None

    def __post_init__(self):
        if self.method not in ("monte-carlo", "grid"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if self.samples <= 0:
            raise ValueError("samples must be positive")
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def to_json(self) -> str:
        d = {"method": self.method, "samples": self.samples, "seed": self.seed}
        if self.grid_resolution is not None:
            d["grid_resolution"] = self.grid_resolution
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "IntegrationSpec":
        d = json.loads(text)
        return cls(
            method=d.get("method", "monte-carlo"),
            samples=int(d.get("samples", 1 << 20)),
            seed=int(d.get("seed", 0)),
            grid_resolution=d.get("grid_resolution"),
        )


@dataclass(frozen=True)
class MCResult:
    """Estimate with its standard error and sample count."""

    value: float
    stderr: float
    samples: int

    def within(self, target: float, nsigma: float = 3.0) -> bool:
        return abs(self.value - target) <= nsigma * self.stderr


def batch_sizes(total: int, batch: int = _BATCH) -> list[int]:
    sizes = [batch] * (total // batch)
    if total % batch:
        sizes.append(total % batch)
    return sizes


def mc_mean(sample_eval, spec: IntegrationSpec) -> MCResult:
    """Monte-Carlo mean of ``sample_eval(rng, n) -> (n,) array``.

    The callable draws its own points from ``rng`` and returns one integrand
    value per point.  Batches use seeds spawned deterministically from
    ``spec.seed``; sums are reduced with math.fsum.
    """
    sizes = batch_sizes(spec.samples)
    seqs = np.random.SeedSequence(spec.seed).spawn(len(sizes))
    sums, sqsums = [], []
    for n, seq in zip(sizes, seqs):
        vals = np.asarray(sample_eval(np.random.Generator(np.random.Philox(seq)), n), dtype=float)
        sums.append(float(np.sum(vals)))
        sqsums.append(float(np.sum(vals * vals)))
    n_tot = spec.samples
    mean = math.fsum(sums) / n_tot
    var = max(math.fsum(sqsums) / n_tot - mean * mean, 0.0)
    return MCResult(mean, math.sqrt(var / n_tot), n_tot)


def sobol_unit(dim: int, n: int, seed: int = 0) -> np.ndarray:
    """(n, dim) scrambled Sobol points in the unit cube; deterministic in seed."""
    eng = qmc.Sobol(d=dim, scramble=True, seed=seed)
    return eng.random(n)
