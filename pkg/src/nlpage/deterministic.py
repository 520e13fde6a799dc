"""Deterministic primal-dual paging with exact rational duals.

On each request the page is fetched; while the cache is infeasible a minimally
infeasible set ``Q`` containing the request is peeled out of the cache and its
dual variable is raised.  All pages of ``Q`` other than the request gain dual
mass at the same rate, so the raise is done in one step of size equal to the
smallest remaining slack ``c(p) - Y_p``.  Pages whose slack hits zero are evicted.

Because at most ``|Q| - 1 <= width`` pages are charged per unit of dual, the
eviction cost never exceeds ``width * dual``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .errors import InputError, InstanceError
from .model import Instance, RequestIndex, build_request_index, iter_bits, peel_min_infeasible


@dataclass
class DetRunReport:
    instance: Instance
    index: RequestIndex
    evictions: list  # (t, page)
    x: dict  # (page, j) -> Fraction(1)
    entries: list  # (t, Q mask, amount)
    snapshots: list  # cache mask after each step

    @property
    def cost(self) -> int:
        return sum(self.instance.costs[p] for _t, p in self.evictions)

    @property
    def dual(self) -> Fraction:
        return sum((a for _t, _q, a in self.entries), Fraction(0))


class DeterministicPager:
    """Online form of the algorithm; feed requests one at a time via :meth:`request`."""

    def __init__(self, instance: Instance, exact: bool = False):
        self.instance = instance
        self.exact = exact
        self.t = 0
        self.cache = 0
        self.counts = [0] * instance.n
        self.Y = [Fraction(0)] * instance.n  # dual mass of each page's current interval
        self.x: dict = {}
        self.entries: list = []
        self.evictions: list = []
        self.snapshots: list = []

    def _peel(self, pt: int) -> int:
        inst = self.instance
        if self.exact:
            return peel_min_infeasible(inst, self.cache, pt, exact=True)
        n = inst.n
        for start in range(n):
            order = [(start + i) % n for i in range(n)]
            Q = peel_min_infeasible(inst, self.cache, pt, order=order)
            if Q & inst.removable_mask & ~(1 << pt):
                return Q
        raise InstanceError(f"t={self.t}: every minimally infeasible set holds only unremovable pages")

    def request(self, pt: int) -> list[int]:
        """Serve one request and return the pages evicted, in ascending id."""
        inst = self.instance
        if not 0 <= pt < inst.n:
            raise InputError(f"unknown page id {pt}")
        self.t += 1
        self.counts[pt] += 1
        self.Y[pt] = Fraction(0)
        self.cache |= 1 << pt
        evicted = []
        while not inst.feasible(self.cache):
            Q = self._peel(pt)
            if self.exact and not Q & inst.removable_mask & ~(1 << pt):
                raise InstanceError(f"t={self.t}: minimum set holds only unremovable pages")
            charged = [p for p in iter_bits(Q & ~(1 << pt)) if inst.removable(p)]
            delta = min(inst.costs[p] - self.Y[p] for p in charged)
            self.entries.append((self.t, Q, delta))
            for p in charged:
                self.Y[p] += delta
            for p in charged:
                if self.Y[p] == inst.costs[p]:
                    self.x[(p, self.counts[p])] = Fraction(1)
                    self.cache &= ~(1 << p)
                    self.evictions.append((self.t, p))
                    evicted.append(p)
        self.snapshots.append(self.cache)
        return evicted


def run_deterministic(instance: Instance, trace: Iterable[int], exact: bool = False) -> DetRunReport:
    trace = list(trace)
    index = build_request_index(trace, instance.n)
    pager = DeterministicPager(instance, exact=exact)
    for p in trace:
        pager.request(p)
    return DetRunReport(instance, index, pager.evictions, pager.x, pager.entries, pager.snapshots)


def competitive_certificate(report: DetRunReport, ell: Optional[int]) -> bool:
    """``cost <= ell * dual`` in exact arithmetic; an undefined width admits only zero cost."""
    if ell is None:
        return report.cost == 0
    return report.cost <= ell * report.dual
