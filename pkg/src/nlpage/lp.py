"""Primal/dual bookkeeping and constraint checkers for the three covering LPs.

``x`` is a dict ``{(page, j): value}`` over request ordinals ``j >= 1``; missing
entries are 0.  Values are ``Fraction`` for exact runs and ``float`` otherwise.

Convention used by every checker: a page that has not been requested yet at
time ``t`` (``r(p, t) = 0``) has never been brought into the cache, so it
counts as fully outside (effective value 1).  Without this the first requests
of a trace would face constraints over pages that cannot be evicted.

Ledger entries are ``(t, mask, amount)`` increments of a dual variable.  For
the submodular-cover LP the mask stored is the set of pages whose variables
grow, i.e. the complement of the violated constraint's set.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional, Union

import numpy as np

from .errors import InputError, InvariantError
from .model import Cardinality, Instance, RequestIndex, cover_demand, iter_bits, q_of

EPS_FEAS = 1e-9
LP_TAGS = ("lp1", "lp2", "stronger")

Number = Union[Fraction, float, int]


@dataclass(frozen=True)
class Violation:
    t: int
    mask: int
    lhs: Number
    rhs: Number


@dataclass(frozen=True)
class DualViolation:
    page: int
    j: int
    total: Number
    cost: int


@dataclass
class Ledger:
    """Dual increments plus the incrementally maintained tightness sums ``Y[(p, j)]``.

    Only removable pages with ``r(p, t) >= 1`` have a dual constraint, so only
    those accumulate in ``Y``.
    """

    instance: Instance
    index: RequestIndex
    entries: list = field(default_factory=list)
    Y: dict = field(default_factory=dict)

    def add(self, t: int, mask: int, amount: Number) -> None:
        if amount < 0:
            raise InvariantError("dual-nonnegative", f"negative increment {amount} at t={t}")
        self.entries.append((t, mask, amount))
        pt = self.index.page_at(t)
        for p in iter_bits(mask & ~(1 << pt)):
            j = self.index.r(p, t)
            if j >= 1 and self.instance.removable(p):
                self.Y[(p, j)] = self.Y.get((p, j), 0) + amount

    def y(self, p: int, j: int) -> Number:
        return self.Y.get((p, j), 0)


def effective_values(x: dict, index: RequestIndex, t: int, exact: bool = False) -> list:
    """Per-page value of the variable active at ``t``; unrequested pages count as 1."""
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    out = []
    for p in range(index.n):
        j = index.r(p, t)
        out.append(one if j == 0 else x.get((p, j), zero))
    return out


def primal_cost(x: dict, costs) -> Number:
    return sum((v * costs[p] for (p, _j), v in x.items()), 0)


def dual_value(entries, lp: str, instance: Instance) -> Number:
    if lp not in LP_TAGS:
        raise InputError(f"unknown LP tag {lp!r}; expected one of {LP_TAGS}")
    if lp == "lp1":
        return sum((a for _t, _m, a in entries), 0)
    if lp == "lp2":
        N = cover_demand(instance)
        full = instance.full
        return sum((a * (N - instance.g(full & ~m)) for _t, m, a in entries), 0)
    return sum((a * q_of(instance, m) for _t, m, a in entries), 0)


def _is_exact(values) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in values)


def _masked_sums(instance: Instance, vec: list) -> np.ndarray:
    """Sum of ``vec`` over every mask, as exact scaled integers or floats."""
    return instance.bit_matrix @ np.asarray(vec)


def check_primal_lp1(x: dict, instance: Instance, index: RequestIndex) -> Optional[Violation]:
    """First (time-major, ascending mask) violated covering constraint, or ``None``.

    Only the inclusion-minimal infeasible sets containing the requested page are
    enumerated; constraints of their supersets are implied.
    """
    exact = _is_exact(x.values())
    eps = 0 if exact else EPS_FEAS
    for t in range(1, index.T + 1):
        pt = index.page_at(t)
        vals = effective_values(x, index, t, exact)
        vals[pt] = Fraction(0) if exact else 0.0
        if isinstance(instance.spec, Cardinality):
            hit = _cardinality_lp1(instance, pt, vals, eps)
            if hit is not None:
                return Violation(t, *hit)
            continue
        cand = instance.minimal_requests_table(pt)
        if not cand.any():
            continue
        if exact:
            scale = lcm(*(Fraction(v).denominator for v in vals))
            ints = [int(Fraction(v) * scale) for v in vals]
            sums = _masked_sums(instance, ints)
            bad = cand & (sums < scale)
        else:
            sums = _masked_sums(instance, [float(v) for v in vals])
            scale = 1
            bad = cand & (sums < 1 - eps)
        if bad.any():
            m = int(np.flatnonzero(bad)[0])
            lhs = Fraction(int(sums[m]), scale) if exact else float(sums[m])
            return Violation(t, m, lhs, 1)
    return None


def _cardinality_lp1(instance: Instance, pt: int, vals: list, eps):
    k = instance.k
    others = sorted((v, p) for p, v in enumerate(vals) if p != pt)
    if len(others) < k:
        return None  # every set containing the request fits
    chosen = others[:k]
    lhs = sum((v for v, _ in chosen), 0 * vals[pt])
    if lhs < 1 - eps:
        mask = (1 << pt) | sum(1 << p for _, p in chosen)
        return mask, lhs, 1
    return None


def check_primal_lp2(
    x: dict, instance: Instance, index: RequestIndex, minimal_only: bool = True, eps: float = EPS_FEAS
) -> Optional[Violation]:
    """Submodular-cover constraints ``sum_{p != p_t} x_p g_S(p) >= N - g(S)``.

    With ``minimal_only`` only sets containing every fully evicted page are
    checked, which suffices when ``g`` is submodular.
    """
    N = cover_demand(instance)
    if N == 0:
        return None
    gt = instance.g_table
    marg = instance.g_marginals
    masks = np.arange(1 << instance.n)
    rhs = N - gt
    for t in range(1, index.T + 1):
        pt = index.page_at(t)
        vals = np.array([float(v) for v in effective_values(x, index, t)])
        vals[pt] = 0.0
        lhs = vals @ marg
        bad = lhs < rhs - eps
        if minimal_only:
            forced = sum(1 << p for p in range(instance.n) if p != pt and vals[p] >= 1.0)
            bad &= (masks & forced) == forced
        if bad.any():
            m = int(np.flatnonzero(bad)[0])
            return Violation(t, m, float(lhs[m]), int(rhs[m]))
    return None


def check_primal_stronger(
    x: dict, instance: Instance, index: RequestIndex, eps: float = EPS_FEAS
) -> Optional[Violation]:
    """Constraints ``sum_{p in S - p_t} x_p >= q(S)`` over every infeasible ``S`` containing ``p_t``."""
    infeasible = ~instance.feasible_table
    q = instance.q_table
    masks = np.arange(1 << instance.n)
    for t in range(1, index.T + 1):
        pt = index.page_at(t)
        vals = [float(v) for v in effective_values(x, index, t)]
        vals[pt] = 0.0
        sums = _masked_sums(instance, vals)
        bad = infeasible & ((masks >> pt) & 1 == 1) & (sums < q - eps)
        if bad.any():
            m = int(np.flatnonzero(bad)[0])
            return Violation(t, m, float(sums[m]), int(q[m]))
    return None


def recompute_tightness(entries, instance: Instance, index: RequestIndex) -> dict:
    Y: dict = {}
    for t, mask, amount in entries:
        pt = index.page_at(t)
        for p in iter_bits(mask & ~(1 << pt)):
            j = index.r(p, t)
            if j >= 1 and instance.removable(p):
                Y[(p, j)] = Y.get((p, j), 0) + amount
    return Y


def check_dual_feasible(
    entries, instance: Instance, index: RequestIndex, eps: float = 0.0
) -> Optional[DualViolation]:
    """First ``(p, j)`` (ascending) whose accumulated dual mass exceeds ``c(p) + eps``."""
    Y = recompute_tightness(entries, instance, index)
    for (p, j) in sorted(Y):
        if Y[(p, j)] > instance.costs[p] + eps:
            return DualViolation(p, j, Y[(p, j)], instance.costs[p])
    return None


def weak_duality_report(primal: Number, dual: Number, opt: Number, primal_feasible: bool = True, eps=0) -> None:
    """Raise ``InvariantError`` unless ``dual <= primal`` (when feasible) and ``dual <= opt``."""
    if primal_feasible and dual > primal + eps:
        raise InvariantError("weak-duality", f"dual {dual} exceeds primal {primal}")
    if dual > opt + eps:
        raise InvariantError("weak-duality", f"dual {dual} exceeds optimum {opt}")
