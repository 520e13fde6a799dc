"""Exact offline optimum by dynamic programming over cache contents.

Transitions are lazy: from cache ``A`` the next cache is a maximal feasible
subset of ``A + p_t`` that keeps ``p_t`` and every unremovable resident.  Keeping
a page longer never costs more than evicting it now (the eviction can always
be postponed to the next step), so restricting to maximal subsets loses no
optimum.  Evictions are charged when they happen; pages left in the cache at
the end are free.

Pages that will never be requested again only matter through ``f``.  For
cardinality and linear specs such pages are interchangeable when they share
size, cost and removability, and states differing only in which of them are
resident are merged.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

from .errors import InstanceError, ResourceLimitError
from .model import Cardinality, Instance, Linear, build_request_index, iter_bits, max_n, mu


@dataclass(frozen=True)
class OptResult:
    cost: int
    schedule: list  # cache mask after each step


def maximal_feasible_subsets(instance: Instance, pool: int, must: int) -> list[int]:
    """All inclusion-maximal feasible ``B`` with ``must <= B <= pool``, ascending."""
    if not instance.feasible(must):
        return []
    if instance.feasible(pool):
        return [pool]
    optional = list(iter_bits(pool & ~must))
    out = []

    def walk(i: int, cur: int, skipped: int) -> None:
        if i == len(optional):
            if all(not instance.feasible(cur | 1 << e) for e in iter_bits(skipped)):
                out.append(cur)
            return
        bit = 1 << optional[i]
        if instance.feasible(cur | bit):
            walk(i + 1, cur | bit, skipped)
        walk(i + 1, cur, skipped | bit)

    walk(0, must, 0)
    return sorted(out)


def _check_guard(instance: Instance) -> None:
    limit = max_n()
    if isinstance(instance.spec, (Cardinality, Linear)):
        if mu(instance) > limit:
            raise ResourceLimitError(f"offline DP refused: mu = {mu(instance)} > {limit} (set NLPAGE_MAX_N)")
    elif instance.n > limit:
        raise ResourceLimitError(f"offline DP refused: n = {instance.n} > {limit} (set NLPAGE_MAX_N)")


def _signature(instance: Instance, p: int):
    size = instance.spec.sizes[p] if isinstance(instance.spec, Linear) else 1
    return (size, instance.costs[p], instance.removable(p))


def opt_dp(instance: Instance, trace: Iterable[int]) -> OptResult:
    _check_guard(instance)
    trace = list(trace)
    index = build_request_index(trace, instance.n)
    symmetric = isinstance(instance.spec, (Cardinality, Linear))
    costs = instance.costs
    unremovable = instance.unremovable

    def key(mask: int, t: int):
        if not symmetric:
            return mask
        live = 0
        dead = Counter()
        for p in iter_bits(mask):
            if index.next_request(p, t) is None:
                dead[_signature(instance, p)] += 1
            else:
                live |= 1 << p
        return live, tuple(sorted(dead.items()))

    # layer: key -> (cost, mask, parent key)
    layers: list[dict] = []
    frontier = {key(0, 0): (0, 0, None)}
    for t, pt in enumerate(trace, start=1):
        nxt: dict = {}
        for k_prev in sorted(frontier, key=lambda kk: frontier[kk][1]):
            cost, A, _ = frontier[k_prev]
            pool = A | 1 << pt
            must = (A & unremovable) | 1 << pt
            for B in maximal_feasible_subsets(instance, pool, must):
                c = cost + sum(costs[p] for p in iter_bits(A & ~B))
                kb = key(B, t)
                best = nxt.get(kb)
                if best is None or (c, B) < (best[0], best[1]):
                    nxt[kb] = (c, B, k_prev)
        if not nxt:
            raise InstanceError(f"t={t}: request cannot be served without evicting unremovable pages")
        layers.append(nxt)
        frontier = nxt
    final_key = min(frontier, key=lambda kk: (frontier[kk][0], frontier[kk][1]))
    total = frontier[final_key][0]
    schedule = []
    kk = final_key
    for layer in reversed(layers):
        _c, mask, parent = layer[kk]
        schedule.append(mask)
        kk = parent
    schedule.reverse()
    return OptResult(total, schedule)


def ratio(alg_cost: Union[int, Fraction, float], opt_cost: Union[int, Fraction, float]) -> Optional[Union[Fraction, float]]:
    """``alg / opt``; 1 when both are zero and ``None`` (undefined) when only ``opt`` is."""
    if opt_cost < 0:
        raise ValueError("optimum cost must be nonnegative")
    if opt_cost == 0:
        return Fraction(1) if alg_cost == 0 else None
    if isinstance(alg_cost, float) or isinstance(opt_cost, float):
        return alg_cost / opt_cost
    return Fraction(alg_cost) / Fraction(opt_cost)
