"""Online randomized rounding of the fractional ``z`` into an integral cache.

Each step boosts ``z`` to ``z' = min(1, alpha * z)`` with
``alpha = ln(4 C N^2 mu^2)`` and gives every resident page an eviction trial
with probability ``(z' - D_p) / (1 - D_p)``, where ``D_p`` is the value of ``z'``
the page had at its previous trial.  A page therefore ends each step missing
with probability at least ``z'``.  If the cache is still infeasible, pages are
evicted greedily by marginal cover per unit cost until ``g(outside) >= N``.

Randomness is counter based: trial ``(t, p)`` of a run with seed ``s`` reads
entry ``[t - 1, p]`` of a Philox stream keyed by ``s``, so results do not depend
on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

import numpy as np

from .errors import InputError, InvariantError
from .fractional import FracReport, run_fractional
from .model import Instance, cover_demand, iter_bits


def compute_alpha(instance: Instance, N: Optional[int] = None, m: Optional[int] = None) -> float:
    from .model import mu as mu_of

    N = cover_demand(instance) if N is None else N
    m = mu_of(instance) if m is None else m
    if N < 1:
        raise InputError("no cover demand: rounding is unnecessary and alpha is undefined")
    C = instance.cost_ratio
    return math.log(4 * float(C) * N * N * m * m)


def repair_tiebreak(instance: Instance, outside: int, exclude: int = 0) -> int:
    """Removable cached page with the largest ``g_F(p) / c(p)``, ties to the lowest id."""
    best = None
    gF = instance.g(outside)
    for p in range(instance.n):
        if outside >> p & 1 or exclude >> p & 1 or not instance.removable(p):
            continue
        gain = instance.g(outside | 1 << p) - gF
        if gain <= 0:
            continue
        score = Fraction(gain, instance.costs[p])
        if best is None or score > best[0]:
            best = (score, p)
    if best is None:
        raise InvariantError("repair", "no page with positive marginal cover is left to evict")
    return best[1]


@dataclass
class RoundingTrial:
    seed: int
    cost: int
    repairs: int
    evictions: list  # (t, page, "trial" | "repair")
    missing: np.ndarray  # bool, (T, n): page outside the cache at the end of step t


def boosted_z(frac: FracReport, alpha: float) -> np.ndarray:
    return np.minimum(1.0, alpha * np.array(frac.z_history))


def run_rounding_trial(instance: Instance, trace: list, zprime: np.ndarray, seed: int) -> RoundingTrial:
    n = instance.n
    T = len(trace)
    N = cover_demand(instance)
    uniforms = np.random.Generator(np.random.Philox(key=seed)).random((T, n))
    costs = instance.costs
    removable = [instance.removable(p) for p in range(n)]
    full = instance.full
    cache = 0
    delta = [0.0] * n
    cost = 0
    repairs = 0
    evictions = []
    missing = np.zeros((T, n), dtype=bool)
    for t, pt in enumerate(trace, start=1):
        cache |= 1 << pt
        delta[pt] = 0.0
        zp = zprime[t - 1]
        u = uniforms[t - 1]
        for p in range(n):
            target = float(zp[p])
            if delta[p] < 1.0:
                prob = (target - delta[p]) / (1.0 - delta[p])
                if cache >> p & 1 and removable[p] and p != pt and u[p] < prob:
                    cache &= ~(1 << p)
                    cost += costs[p]
                    evictions.append((t, p, "trial"))
            delta[p] = target
        while instance.g(full & ~cache) < N:
            p = repair_tiebreak(instance, full & ~cache, exclude=1 << pt)
            cache &= ~(1 << p)
            cost += costs[p]
            repairs += 1
            evictions.append((t, p, "repair"))
        if not instance.feasible(cache):
            raise InvariantError("rounding-feasible", f"seed={seed} t={t}: cache {cache:#x} infeasible")
        for p in iter_bits(full & ~cache):
            missing[t - 1, p] = True
    return RoundingTrial(seed, cost, repairs, evictions, missing)


@dataclass
class RoundingSummary:
    frac: FracReport
    alpha: float
    zprime: np.ndarray
    trials: list

    @property
    def costs(self) -> np.ndarray:
        return np.array([tr.cost for tr in self.trials], dtype=float)

    @property
    def mean_cost(self) -> float:
        return float(self.costs.mean())

    @property
    def std_cost(self) -> float:
        return float(self.costs.std())

    def missing_frequency(self) -> np.ndarray:
        return np.mean([tr.missing for tr in self.trials], axis=0)


def run_rounding(
    instance: Instance,
    trace: Iterable[int],
    seed: int,
    trials: int = 1,
    frac: Optional[FracReport] = None,
) -> RoundingSummary:
    """Run ``trials`` independent roundings with seeds ``seed, seed + 1, ...``.

    The fractional solution is computed once (it is deterministic) unless supplied.
    """
    trace = list(trace)
    frac = frac or run_fractional(instance, trace)
    if frac.N == 0:
        zprime = np.zeros((len(trace), instance.n))
        alpha = 0.0
    else:
        alpha = compute_alpha(instance, frac.N, frac.mu)
        zprime = boosted_z(frac, alpha)
    runs = [run_rounding_trial(instance, trace, zprime, seed + i) for i in range(trials)]
    return RoundingSummary(frac, alpha, zprime, runs)
