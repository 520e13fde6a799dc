"""Slow, obviously-correct reference implementations used only by the tests.

They work on frozensets of page ids and plain Python loops, sharing no code
with the library beyond the instance's ``f``.
"""
from __future__ import annotations

import itertools
from functools import lru_cache


def subsets(pages):
    pages = sorted(pages)
    for r in range(len(pages) + 1):
        for combo in itertools.combinations(pages, r):
            yield frozenset(combo)


def to_mask(s) -> int:
    return sum(1 << p for p in s)


def f_of(inst, s) -> int:
    return inst.spec.value(to_mask(s))


def feasible(inst, s) -> bool:
    return f_of(inst, s) <= inst.k


def minimally_infeasible(inst):
    out = []
    for s in subsets(range(inst.n)):
        if not feasible(inst, s) and all(feasible(inst, s - {p}) for p in s):
            out.append(s)
    return out


def width(inst):
    mins = minimally_infeasible(inst)
    return max(len(s) for s in mins) - 1 if mins else None


def max_feasible(inst) -> int:
    return max(len(s) for s in subsets(range(inst.n)) if feasible(inst, s))


def q_brute(inst, s) -> int:
    s = frozenset(s)
    return min(len(drop) for drop in subsets(s) if feasible(inst, s - drop))


def opt_brute(inst, trace) -> int:
    """Full DP over every feasible cache containing the request (no laziness)."""
    n = inst.n
    removable = [inst.removable(p) for p in range(n)]

    @lru_cache(maxsize=None)
    def best(t: int, cache: frozenset) -> float:
        if t == len(trace):
            return 0
        pt = trace[t]
        pool = cache | {pt}
        must = {p for p in cache if not removable[p]} | {pt}
        out = float("inf")
        for extra in subsets(pool - must):
            nxt = frozenset(must) | extra
            if not feasible(inst, nxt):
                continue
            cost = sum(inst.costs[p] for p in cache - nxt)
            out = min(out, cost + best(t + 1, nxt))
        return out

    return best(0, frozenset())


def feasible_trajectory(inst, trace, rng):
    """A random cache trajectory, feasible at every step and always holding the request."""
    cache = frozenset()
    out = []
    for pt in trace:
        pool = sorted(cache | {pt})
        rng.shuffle(pool)
        nxt = {pt}
        for p in pool:
            if p != pt and rng.random() < 0.7 and feasible(inst, nxt | {p}):
                nxt.add(p)
        if not feasible(inst, nxt):
            raise AssertionError("request does not fit alone")
        cache = frozenset(nxt)
        out.append(cache)
    return out


def integral_x(trace, trajectory, n):
    """Eviction indicators x_p(j) = 1 when p leaves the cache during its j-th interval."""
    x = {}
    counts = [0] * n
    prev = frozenset()
    for pt, cache in zip(trace, trajectory):
        counts[pt] += 1
        for p in prev - cache:
            if p != pt:
                x[(p, counts[p])] = 1
        prev = cache
    return x
