"""Online fractional algorithm for the covering LP with constraints
``sum_{p in S - p_t} x_p >= q(S)`` over infeasible sets ``S`` containing ``p_t``.

While some such ``S`` with no fully evicted page is violated, its dual
variable is raised and each page of ``S - p_t`` grows as
``x_p = (exp(rate * Y_p / c(p)) - 1) / mu``, capped at 1.  ``rate`` defaults
to ``ln(mu + 1)``, which makes ``x_p = 1`` coincide with ``Y_p = c(p)``;
``ln(n + 1)`` can be selected instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import InputError, InstanceError, ResourceLimitError
from .lp import EPS_FEAS, Ledger
from .model import Instance, RequestIndex, build_request_index, max_n, mu

EPS_EVENT = 1e-9
RATES = ("mu", "n")


@dataclass
class StrongerReport:
    instance: Instance
    index: RequestIndex
    mu: int
    rate: float
    x: dict = field(default_factory=dict)
    ledger: Optional[Ledger] = None
    dual: float = 0.0
    raised_sets: list = field(default_factory=list)  # (t, S, q(S)) per raise

    @property
    def entries(self) -> list:
        return self.ledger.entries

    @property
    def cost_x(self) -> float:
        return sum(v * self.instance.costs[p] for (p, _j), v in self.x.items())


def find_violated_q_constraint(instance: Instance, values: np.ndarray, pt: int, eps: float = EPS_FEAS) -> Optional[tuple[int, int]]:
    """Smallest (then lowest-mask) violated ``(S, q(S))`` whose pages other than ``p_t`` are not fully evicted."""
    vals = np.asarray(values, dtype=float).copy()
    vals[pt] = 0.0
    masks = np.arange(1 << instance.n)
    open_pages = sum(1 << p for p in range(instance.n) if vals[p] < 1.0) | 1 << pt
    sums = instance.bit_matrix @ vals
    q = instance.q_table
    bad = (
        ~instance.feasible_table
        & ((masks >> pt) & 1 == 1)
        & ((masks & ~open_pages) == 0)
        & (sums < q - eps)
    )
    if not bad.any():
        return None
    cand = np.flatnonzero(bad)
    S = int(cand[np.lexsort((cand, instance.popcounts[cand]))[0]])
    return S, int(q[S])


class StrongerSolver:
    def __init__(self, instance: Instance, trace: Iterable[int], eps_event: float = EPS_EVENT, rate: str = "mu"):
        if rate not in RATES:
            raise InputError(f"growth rate must be one of {RATES}")
        if instance.n > max_n():
            raise ResourceLimitError(f"stronger solver enumerates subsets: n = {instance.n} > {max_n()} (set NLPAGE_MAX_N)")
        self.instance = instance
        self.index = build_request_index(list(trace), instance.n)
        self.eps_event = eps_event
        self.mu = mu(instance)
        self.rate = math.log((self.mu if rate == "mu" else instance.n) + 1)
        self.report = StrongerReport(instance, self.index, self.mu, self.rate, ledger=Ledger(instance, self.index))
        n = instance.n
        self.xcur = np.zeros(n)
        self.requested = np.zeros(n, dtype=bool)
        self.costs = np.array(instance.costs, dtype=float)
        # dual mass at which x reaches 1
        self.full_Y = self.costs * math.log(self.mu + 1) / self.rate

    def effective(self) -> np.ndarray:
        return np.where(self.requested, self.xcur, 1.0)

    def step(self, t: int) -> None:
        pt = self.index.page_at(t)
        self.requested[pt] = True
        self.xcur[pt] = 0.0
        while True:
            found = find_violated_q_constraint(self.instance, self.effective(), pt)
            if found is None:
                return
            self._raise(t, pt, *found)

    def _raise(self, t: int, pt: int, S: int, q: int) -> None:
        inst = self.instance
        rep = self.report
        live = np.array([p for p in range(inst.n) if p != pt and S >> p & 1 and inst.removable(p)], dtype=np.int64)
        if live.size == 0:
            raise InstanceError(f"t={t}: violated set holds only unremovable pages")
        vals = self.effective()
        vals[pt] = 0.0
        base = float(vals[[p for p in range(inst.n) if p != pt and S >> p & 1]].sum())
        Y0 = np.array([rep.ledger.y(int(p), self.index.r(int(p), t)) for p in live])
        c = self.costs[live]
        x0 = self.xcur[live]

        def xs(delta: float) -> np.ndarray:
            return np.minimum(1.0, (np.exp(self.rate * (Y0 + delta) / c) - 1.0) / self.mu)

        def lhs(delta: float) -> float:
            return base + float((xs(delta) - x0).sum())

        to_full = self.full_Y[live] - Y0
        d_full = float(to_full.min())
        if lhs(d_full) >= q:
            lo, hi = 0.0, d_full
            while hi - lo > self.eps_event:
                mid = (lo + hi) / 2
                if lhs(mid) >= q:
                    hi = mid
                else:
                    lo = mid
            delta, capped = hi, np.zeros(live.size, dtype=bool)
        else:
            delta = d_full
            capped = to_full <= d_full + 1e-12
        rep.ledger.add(t, S, delta)
        rep.dual += delta * q
        rep.raised_sets.append((t, S, q))
        newx = xs(delta)
        for i, p in enumerate(live):
            p = int(p)
            self.xcur[p] = 1.0 if capped[i] else max(self.xcur[p], float(newx[i]))
            rep.x[(p, self.index.r(p, t))] = float(self.xcur[p])

    def run(self) -> StrongerReport:
        for t in range(1, self.index.T + 1):
            self.step(t)
        return self.report


def run_stronger(instance: Instance, trace: Iterable[int], eps_event: float = EPS_EVENT, rate: str = "mu") -> StrongerReport:
    return StrongerSolver(instance, trace, eps_event, rate).run()
