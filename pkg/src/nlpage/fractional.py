"""Online fractional algorithm for paging with a supermodular ``f`` (submodular cover ``g``).

At each time step, while some covering constraint
``sum_{p != p_t} x_p * g_Q(p) >= N - g(Q)`` is violated by a set ``Q`` that
contains every fully evicted page, the dual variable of that constraint is
raised and every other page's eviction variable grows exponentially in its
accumulated dual mass::

    x_p = (exp(ln(mu + 1) * Y_p / c(p)) - 1) / mu

A companion solution ``z`` keeps only coarse values: it moves in steps of
``2 * theta`` with ``theta = 1 / (4 N mu)`` and jumps to 1 once ``x_p >= 1/4``;
``x`` itself jumps to 1 once it reaches 1/2.  Hence every ``z`` entry is 0, 1, or
lies in ``[theta, 1/2]``, and ``z <= 4 x`` pointwise.

The continuous raise is simulated event by event: crossing 1/2 has a closed
form, constraint satisfaction is located by bisection (stopping on the
satisfied side).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import InputError, InstanceError, ResourceLimitError
from .lp import EPS_FEAS, Ledger
from .model import Instance, RequestIndex, build_request_index, cover_demand, is_submodular, max_n, mu

EPS_EVENT = 1e-9


@dataclass
class FracReport:
    instance: Instance
    index: RequestIndex
    mu: int
    N: int
    x: dict = field(default_factory=dict)
    z: dict = field(default_factory=dict)
    ledger: Optional[Ledger] = None
    dual: float = 0.0
    z_history: list = field(default_factory=list)  # per step: z of each page's current interval
    raises: int = 0

    @property
    def entries(self) -> list:
        return self.ledger.entries

    @property
    def cost_x(self) -> float:
        return sum(v * self.instance.costs[p] for (p, _j), v in self.x.items())

    @property
    def cost_z(self) -> float:
        return sum(v * self.instance.costs[p] for (p, _j), v in self.z.items())

    @property
    def theta(self) -> float:
        return 1.0 / (4 * self.N * self.mu) if self.N and self.mu else 0.0


def growth(Y, cost, m: int, rate: float):
    return (np.exp(rate * Y / cost) - 1.0) / m


def find_minimal_violated_set(instance: Instance, values: np.ndarray, pt: int, eps: float = EPS_FEAS) -> Optional[int]:
    """Smallest (then lowest-mask) violated set containing every fully evicted page.

    ``values`` holds the effective eviction variable of every page at the
    current time (1 for pages not requested yet); the requested page is ignored.
    """
    N = cover_demand(instance)
    if N == 0:
        return None
    vals = np.asarray(values, dtype=float).copy()
    vals[pt] = 0.0
    lhs = vals @ instance.g_marginals
    rhs = N - instance.g_table
    forced = sum(1 << p for p in range(instance.n) if p != pt and vals[p] >= 1.0)
    masks = np.arange(1 << instance.n)
    bad = (lhs < rhs - eps) & ((masks & forced) == forced)
    if not bad.any():
        return None
    cand = np.flatnonzero(bad)
    best = cand[np.lexsort((cand, instance.popcounts[cand]))[0]]
    return int(best)


def z_from_x(x: float, theta: float) -> float:
    if x >= 0.25:
        return 1.0
    if x <= 0.0:
        return 0.0
    return 2 * theta * math.floor(x / theta + 1e-12)


class FractionalSolver:
    def __init__(self, instance: Instance, trace: Iterable[int], eps_event: float = EPS_EVENT, check_submodular: bool = True):
        if instance.n > max_n():
            raise ResourceLimitError(f"fractional solver enumerates subsets: n = {instance.n} > {max_n()} (set NLPAGE_MAX_N)")
        self.instance = instance
        self.trace = list(trace)
        self.index = build_request_index(self.trace, instance.n)
        if check_submodular and not is_submodular(instance.g_table):
            raise InputError("the fractional algorithm needs a submodular cover function g (supermodular f)")
        self.eps_event = eps_event
        self.mu = mu(instance)
        self.N = cover_demand(instance)
        self.rate = math.log(self.mu + 1)
        self.report = FracReport(instance, self.index, self.mu, self.N, ledger=Ledger(instance, self.index))
        n = instance.n
        self.xcur = np.zeros(n)
        self.zcur = np.zeros(n)
        self.requested = np.zeros(n, dtype=bool)
        self.costs = np.array(instance.costs, dtype=float)
        self.half_Y = self.costs * math.log(self.mu / 2 + 1) / self.rate if self.mu else self.costs

    def effective(self) -> np.ndarray:
        return np.where(self.requested, self.xcur, 1.0)

    def _Y(self, p: int, t: int) -> float:
        return self.report.ledger.y(p, self.index.r(p, t))

    def _store(self, p: int, t: int) -> None:
        j = self.index.r(p, t)
        if self.xcur[p] > 0:
            self.report.x[(p, j)] = float(self.xcur[p])
        if self.zcur[p] > 0:
            self.report.z[(p, j)] = float(self.zcur[p])

    def step(self, t: int) -> None:
        inst = self.instance
        pt = self.index.page_at(t)
        self.requested[pt] = True
        self.xcur[pt] = 0.0
        self.zcur[pt] = 0.0
        if self.N > 0:
            while True:
                Q = find_minimal_violated_set(inst, self.effective(), pt)
                if Q is None:
                    break
                self._raise(t, pt, Q)
        self.report.z_history.append(np.where(self.requested, self.zcur, 0.0))

    def _raise(self, t: int, pt: int, Q: int) -> None:
        inst = self.instance
        rep = self.report
        n = inst.n
        growers = [p for p in range(n) if p != pt and not Q >> p & 1]
        live = np.array([p for p in growers if inst.removable(p)], dtype=np.int64)
        if live.size == 0:
            raise InstanceError(f"t={t}: violated constraint can only be met by evicting unremovable pages")
        gQ = inst.g_marginals[:, Q].astype(float)
        rhs = self.N - int(inst.g_table[Q])
        vals = self.effective()
        vals[pt] = 0.0
        base = float(vals @ gQ)
        Y0 = np.array([self._Y(p, t) for p in live])
        c = self.costs[live]
        x0 = self.xcur[live]
        w = gQ[live]

        def lhs(delta: float) -> float:
            return base + float(((growth(Y0 + delta, c, self.mu, self.rate) - x0) * w).sum())

        to_half = self.half_Y[live] - Y0
        d_half = float(to_half.min())
        if lhs(d_half) >= rhs:
            lo, hi = 0.0, d_half
            while hi - lo > self.eps_event:
                mid = (lo + hi) / 2
                if lhs(mid) >= rhs:
                    hi = mid
                else:
                    lo = mid
            delta, snapped = hi, np.zeros(live.size, dtype=bool)
        else:
            delta = d_half
            snapped = to_half <= d_half + 1e-12
        rep.ledger.add(t, inst.full & ~Q, delta)
        rep.dual += delta * rhs
        rep.raises += 1
        newx = growth(Y0 + delta, c, self.mu, self.rate)
        theta = rep.theta
        for i, p in enumerate(live):
            p = int(p)
            if snapped[i] or newx[i] >= 0.5:
                self.xcur[p] = 1.0
                self.zcur[p] = 1.0
            else:
                self.xcur[p] = max(self.xcur[p], float(newx[i]))
                self.zcur[p] = max(self.zcur[p], z_from_x(self.xcur[p], theta))
            self._store(p, t)

    def run(self) -> FracReport:
        for t in range(1, self.index.T + 1):
            self.step(t)
        return self.report


def run_fractional(instance: Instance, trace: Iterable[int], eps_event: float = EPS_EVENT) -> FracReport:
    return FractionalSolver(instance, trace, eps_event).run()
