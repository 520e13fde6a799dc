"""Pages, feasibility functions, instances and the combinatorial parameter oracles.

Page sets are plain ``int`` bitmasks throughout: bit ``i`` set means page ``i``
is in the set (little-endian by page order).  Public functions also accept any
iterable of page ids and convert with :func:`as_mask`.

The brute-force oracles (``width_ell``, ``mu``, ``q_of`` ...) materialize a table
of ``f`` over all ``2**n`` subsets and therefore refuse ``n > TABLE_LIMIT``.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Union

import numpy as np

from .errors import InputError, InstanceError, ResourceLimitError

TABLE_LIMIT = 20
DEFAULT_MAX_N = 14

PageSet = Union[int, Iterable[int]]


def max_n() -> int:
    """Guard used by the offline DP and the CLI; ``NLPAGE_MAX_N`` overrides it."""
    raw = os.environ.get("NLPAGE_MAX_N")
    if not raw:
        return DEFAULT_MAX_N
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"NLPAGE_MAX_N must be an integer, got {raw!r}") from None


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def as_mask(pages: PageSet, n: int) -> int:
    if isinstance(pages, (int, np.integer)):
        mask = int(pages)
        if mask < 0 or mask >> n:
            raise InputError(f"page set {mask:#x} refers to pages outside 0..{n - 1}")
        return mask
    mask = 0
    for p in pages:
        if not 0 <= p < n:
            raise InputError(f"unknown page id {p} (instance has {n} pages)")
        mask |= 1 << p
    return mask


def mask_to_ids(mask: int) -> list[int]:
    return list(iter_bits(mask))


def _check_table_size(n: int, limit: int = TABLE_LIMIT) -> None:
    if n > limit:
        raise ResourceLimitError(f"brute force over 2^{n} subsets refused (limit n <= {limit})")


def _all_masks(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _popcounts(n: int) -> np.ndarray:
    pc = np.zeros(1 << n, dtype=np.int64)
    for p in range(n):
        pc[1 << p:1 << (p + 1)] = pc[:1 << p] + 1
    return pc


def _or_table(n: int, per_page: tuple[int, ...]) -> list[int]:
    """OR of ``per_page`` bitmasks over every subset, by the lowest-bit recurrence."""
    out = [0] * (1 << n)
    for m in range(1, 1 << n):
        low = m & -m
        out[m] = out[m ^ low] | per_page[low.bit_length() - 1]
    return out


# ---------------------------------------------------------------------------
# feasibility functions


@dataclass(frozen=True)
class Cardinality:
    """Classic paging: ``f(S) = |S|``."""

    n: int
    kind = "cardinality"

    def value(self, mask: int) -> int:
        return mask.bit_count()

    def table(self) -> np.ndarray:
        return _popcounts(self.n)


@dataclass(frozen=True)
class Linear:
    """Generalized paging: ``f(S)`` is the total size of ``S``."""

    sizes: tuple[int, ...]
    kind = "linear"

    def __post_init__(self):
        if any(s < 0 for s in self.sizes):
            raise InputError("linear sizes must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.sizes)

    def value(self, mask: int) -> int:
        return sum(self.sizes[p] for p in iter_bits(mask))

    def table(self) -> np.ndarray:
        masks = _all_masks(self.n)
        out = np.zeros(1 << self.n, dtype=np.int64)
        for p, s in enumerate(self.sizes):
            out += s * ((masks >> p) & 1)
        return out


@dataclass(frozen=True)
class SharedAtoms:
    """Pages sharing memory atoms: ``f(S) = |union of a(p) for p in S|``."""

    atoms: tuple[int, ...]  # atom bitmask per page
    n_atoms: int
    kind = "shared-atoms"

    @property
    def n(self) -> int:
        return len(self.atoms)

    def value(self, mask: int) -> int:
        acc = 0
        for p in iter_bits(mask):
            acc |= self.atoms[p]
        return acc.bit_count()

    def table(self) -> np.ndarray:
        return np.array([m.bit_count() for m in _or_table(self.n, self.atoms)], dtype=np.int64)


@dataclass(frozen=True)
class Hypergraph:
    """Vertices plus induced hyperedges: ``f(S) = |S| + #{e : e subset of S}``."""

    n: int
    edges: tuple[int, ...]  # vertex bitmask per hyperedge
    kind = "hypergraph"

    def __post_init__(self):
        for e in self.edges:
            if e <= 0 or e >> self.n:
                raise InputError("hyperedges must be nonempty subsets of the vertex pages")

    def value(self, mask: int) -> int:
        return mask.bit_count() + sum(1 for e in self.edges if e & mask == e)

    def table(self) -> np.ndarray:
        masks = _all_masks(self.n)
        out = _popcounts(self.n)
        for e in self.edges:
            out = out + ((masks & e) == e)
        return out


@dataclass(frozen=True)
class SetCoverDerived:
    """Feasibility induced by a coverage function over pages outside the cache.

    Each page covers a set of elements; ``g(F)`` counts elements covered by ``F``
    and ``f(A) = n_elements - g(P - A)``.  Set pages cover their set, element
    pages cover themselves.
    """

    n_elements: int
    covers: tuple[int, ...]  # element bitmask per page
    kind = "set-cover"

    @property
    def n(self) -> int:
        return len(self.covers)

    def value(self, mask: int) -> int:
        outside = ((1 << self.n) - 1) & ~mask
        acc = 0
        for p in iter_bits(outside):
            acc |= self.covers[p]
        return self.n_elements - acc.bit_count()

    def table(self) -> np.ndarray:
        cov = np.array([m.bit_count() for m in _or_table(self.n, self.covers)], dtype=np.int64)
        full = (1 << self.n) - 1
        return self.n_elements - cov[full ^ _all_masks(self.n)]


@dataclass(frozen=True)
class ExplicitTable:
    """Arbitrary set function given by value on every subset (testing aid)."""

    values: tuple[int, ...]
    kind = "explicit"

    def __post_init__(self):
        size = len(self.values)
        if size == 0 or size & (size - 1):
            raise InputError("explicit table needs exactly 2^n values")
        if size.bit_length() - 1 > TABLE_LIMIT:
            raise InputError(f"explicit tables are capped at n = {TABLE_LIMIT}")
        if any(v < 0 for v in self.values):
            raise InputError("set function values must be nonnegative")

    @property
    def n(self) -> int:
        return len(self.values).bit_length() - 1

    def value(self, mask: int) -> int:
        return self.values[mask]

    def table(self) -> np.ndarray:
        return np.array(self.values, dtype=np.int64)


Spec = Union[Cardinality, Linear, SharedAtoms, Hypergraph, SetCoverDerived, ExplicitTable]


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class Instance:
    spec: Spec
    k: int
    costs: tuple[int, ...]
    names: tuple[str, ...] = ()
    unremovable: int = 0  # bitmask of pages that may never be evicted (infinite cost)
    _memo: dict = field(default_factory=dict, init=False, repr=False, compare=False)
    _tables: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        n = self.spec.n
        object.__setattr__(self, "costs", tuple(int(c) for c in self.costs))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"p{i}" for i in range(n)))
        else:
            object.__setattr__(self, "names", tuple(self.names))
        if len(self.costs) != n or len(self.names) != n:
            raise InputError(f"expected {n} costs and names, got {len(self.costs)} and {len(self.names)}")
        if len(set(self.names)) != n:
            raise InputError("page names must be unique")
        if any(c < 1 for c in self.costs):
            raise InputError("eviction costs must be positive integers")
        if self.k < 0:
            raise InputError("cache threshold k must be nonnegative")
        if self.unremovable < 0 or self.unremovable >> n:
            raise InputError("unremovable mask refers to unknown pages")
        for p in range(n):
            if self.f(1 << p) > self.k:
                raise InstanceError(f"page {self.names[p]!r} does not fit alone: f = {self.f(1 << p)} > k = {self.k}")

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def f(self, mask: int) -> int:
        memo = self._memo
        v = memo.get(mask)
        if v is None:
            v = memo[mask] = self.spec.value(mask)
        return v

    def g(self, mask: int) -> int:
        return self.f(self.full) - self.f(self.full & ~mask)

    def feasible(self, mask: int) -> bool:
        return self.f(mask) <= self.k

    def removable(self, p: int) -> bool:
        return not (self.unremovable >> p) & 1

    @property
    def removable_mask(self) -> int:
        return self.full & ~self.unremovable

    def cost_of(self, mask: int) -> int:
        return sum(self.costs[p] for p in iter_bits(mask))

    @property
    def cost_ratio(self):
        """``C = c_max / c_min`` over removable pages (1 when nothing is removable)."""
        from fractions import Fraction

        cs = [self.costs[p] for p in range(self.n) if self.removable(p)]
        return Fraction(max(cs), min(cs)) if cs else Fraction(1)

    def page_id(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise InputError(f"unknown page {name!r}") from None

    @cached_property
    def f_table(self) -> np.ndarray:
        _check_table_size(self.n)
        return self.spec.table()

    @cached_property
    def g_table(self) -> np.ndarray:
        ft = self.f_table
        return ft[-1] - ft[::-1]  # f(P) - f(P \ S); complement of mask m is full ^ m = reversed index

    @cached_property
    def feasible_table(self) -> np.ndarray:
        return self.f_table <= self.k

    @cached_property
    def bit_matrix(self) -> np.ndarray:
        """``bit_matrix[m, p]`` is 1 when page ``p`` belongs to mask ``m``."""
        _check_table_size(self.n)
        return ((_all_masks(self.n)[:, None] >> np.arange(self.n)) & 1).astype(np.int64)

    @cached_property
    def popcounts(self) -> np.ndarray:
        _check_table_size(self.n)
        return _popcounts(self.n)

    @cached_property
    def g_marginals(self) -> np.ndarray:
        """``g_marginals[p, m] = g(m + p) - g(m)``, zero when ``p`` is already in ``m``."""
        gt = self.g_table
        masks = _all_masks(self.n)
        out = np.empty((self.n, 1 << self.n), dtype=np.int64)
        for p in range(self.n):
            out[p] = gt[masks | (1 << p)] - gt
        return out

    def minimal_requests_table(self, p: int) -> np.ndarray:
        """Infeasible masks containing ``p`` that become feasible when any other page is dropped.

        These are the inclusion-minimal members of the family of infeasible sets
        containing ``p``; every other member's covering constraint is implied.
        """
        cache = self._tables
        if p not in cache:
            infeasible = ~self.feasible_table
            masks = _all_masks(self.n)
            keep = infeasible & ((masks >> p) & 1 == 1)
            for q in range(self.n):
                if q != p:
                    bit = 1 << q
                    keep &= ~(((masks & bit) != 0) & infeasible[masks & ~bit])
            cache[p] = keep
        return cache[p]

    @cached_property
    def max_feasible_subset(self) -> np.ndarray:
        """Largest cardinality of a feasible subset of each mask (subset-max transform)."""
        n = self.n
        best = np.where(self.feasible_table, _popcounts(n), -1)
        masks = _all_masks(n)
        for p in range(n):
            best = np.maximum(best, best[masks & ~(1 << p)])
        return best

    @cached_property
    def q_table(self) -> np.ndarray:
        return _popcounts(self.n) - self.max_feasible_subset


# ---------------------------------------------------------------------------
# set-function evaluation


def eval_f(spec: Spec, pages: PageSet) -> int:
    return spec.value(as_mask(pages, spec.n))


def eval_g(spec: Spec, pages: PageSet) -> int:
    full = (1 << spec.n) - 1
    mask = as_mask(pages, spec.n)
    return spec.value(full) - spec.value(full & ~mask)


def marginal_g(spec: Spec, pages: PageSet, p: int) -> int:
    mask = as_mask(pages, spec.n)
    if not 0 <= p < spec.n:
        raise InputError(f"unknown page id {p}")
    if mask >> p & 1:
        raise InputError(f"page {p} already belongs to the set")
    return eval_g(spec, mask | 1 << p) - eval_g(spec, mask)


def is_feasible(instance: Instance, pages: PageSet) -> bool:
    return instance.feasible(as_mask(pages, instance.n))


def cover_demand(instance: Instance) -> int:
    return max(0, instance.f(instance.full) - instance.k)


def _uniform_linear_size(spec: Spec) -> Optional[int]:
    if isinstance(spec, Linear):
        positive = {s for s in spec.sizes if s > 0}
        if len(positive) <= 1:
            return positive.pop() if positive else 0
    return None


def minimally_infeasible_table(instance: Instance) -> np.ndarray:
    """Boolean table: infeasible and every one-smaller subset feasible."""
    infeasible = ~instance.feasible_table
    masks = _all_masks(instance.n)
    minimal = infeasible.copy()
    for p in range(instance.n):
        bit = 1 << p
        has = (masks & bit) != 0
        minimal &= ~(has & infeasible[masks & ~bit])
    return minimal


def width_ell(instance: Instance) -> Optional[int]:
    """Largest minimally infeasible set size minus one; ``None`` if every set is feasible."""
    spec, k = instance.spec, instance.k
    if isinstance(spec, Cardinality):
        return k if spec.n > k else None
    size = _uniform_linear_size(spec)
    if size is not None:
        positives = sum(1 for s in spec.sizes if s > 0)
        if size == 0:
            return None
        need = k // size + 1
        return need - 1 if positives >= need else None
    minimal = minimally_infeasible_table(instance)
    if not minimal.any():
        return None
    return int(_popcounts(instance.n)[minimal].max()) - 1


def mu(instance: Instance) -> int:
    """Maximum cardinality of a feasible set."""
    spec, k = instance.spec, instance.k
    if isinstance(spec, Cardinality):
        return min(spec.n, k)
    if isinstance(spec, Linear):
        total, count = 0, 0
        for s in sorted(spec.sizes):  # smallest sizes first is optimal for cardinality
            if total + s > k:
                break
            total += s
            count += 1
        return count
    return int(_popcounts(instance.n)[instance.feasible_table].max())


def q_of(instance: Instance, pages: PageSet) -> int:
    """Fewest pages whose removal from ``pages`` leaves a feasible set."""
    mask = as_mask(pages, instance.n)
    if isinstance(instance.spec, Cardinality):
        return max(0, mask.bit_count() - instance.k)
    if instance.n <= TABLE_LIMIT:
        return int(instance.q_table[mask])
    ids = mask_to_ids(mask)
    _check_table_size(len(ids))
    for r in range(len(ids) + 1):
        for drop in itertools.combinations(ids, r):
            if instance.feasible(mask & ~as_mask(drop, instance.n)):
                return r
    raise AssertionError("unreachable: the empty set is feasible")


def _is_minimally_infeasible(instance: Instance, mask: int) -> bool:
    if instance.feasible(mask):
        return False
    return all(instance.feasible(mask & ~(1 << p)) for p in iter_bits(mask))


def peel_min_infeasible(
    instance: Instance,
    pages: PageSet,
    keep: int,
    exact: bool = False,
    order: Optional[Iterable[int]] = None,
) -> int:
    """Shrink an infeasible set to a minimally infeasible one that still contains ``keep``.

    The default greedy pass visits pages in ``order`` (ascending id unless given)
    and drops each page whose removal leaves the remainder infeasible.  With
    ``exact=True`` a minimum-cardinality such set is found by enumeration.
    """
    n = instance.n
    mask = as_mask(pages, n)
    if not mask >> keep & 1:
        raise InputError(f"page {keep} is not in the set to peel")
    if instance.feasible(mask):
        raise InputError("cannot peel a feasible set")
    if exact:
        _check_table_size(mask.bit_count(), 12 if n > 12 else n)
        others = [p for p in iter_bits(mask) if p != keep]
        for r in range(len(others) + 1):
            for combo in itertools.combinations(others, r):
                cand = as_mask(combo, n) | 1 << keep
                if _is_minimally_infeasible(instance, cand):
                    return cand
        raise InputError("no minimally infeasible subset contains the kept page")
    cur = mask
    for p in (range(n) if order is None else order):
        if p == keep or not cur >> p & 1:
            continue
        if not instance.feasible(cur & ~(1 << p)):
            cur &= ~(1 << p)
    if instance.feasible(cur & ~(1 << keep)):
        return cur
    raise InputError("no minimally infeasible subset contains the kept page")


def verify_monotone(spec: Spec) -> bool:
    _check_table_size(spec.n, 16)
    table = spec.table()
    masks = _all_masks(spec.n)
    for p in range(spec.n):
        if (table[masks | (1 << p)] < table).any():
            return False
    return True


def _pair_gaps(table: np.ndarray, n: int):
    """Yield ``h(S+p) - h(S) - h(S+p+q) + h(S+q)`` over all S and p != q outside S."""
    masks = _all_masks(n)
    for p in range(n):
        for q in range(p + 1, n):
            sel = masks[((masks >> p) & 1 == 0) & ((masks >> q) & 1 == 0)]
            bp, bq = 1 << p, 1 << q
            yield table[sel | bp] - table[sel] - table[sel | bp | bq] + table[sel | bq]


def is_submodular(table: np.ndarray) -> bool:
    n = len(table).bit_length() - 1
    return all((gap >= 0).all() for gap in _pair_gaps(table, n))


def is_supermodular(table: np.ndarray) -> bool:
    n = len(table).bit_length() - 1
    return all((gap <= 0).all() for gap in _pair_gaps(table, n))


# ---------------------------------------------------------------------------
# request bookkeeping


@dataclass(frozen=True, eq=False)
class RequestIndex:
    """Per-page request counts and interval structure of a trace.

    Time is 1-based: ``trace[t - 1]`` is the page requested at time ``t``.
    """

    n: int
    trace: tuple[int, ...]
    counts: tuple[int, ...]
    times: tuple[tuple[int, ...], ...]  # times[p][j-1] = time of the j-th request for p
    ranks: np.ndarray  # ranks[t, p] = r(p, t), row 0 is all zeros

    @property
    def T(self) -> int:
        return len(self.trace)

    def page_at(self, t: int) -> int:
        return self.trace[t - 1]

    def r(self, p: int, t: int) -> int:
        return int(self.ranks[t, p])

    def interval(self, p: int, j: int) -> range:
        ts = self.times[p]
        if not 1 <= j <= len(ts):
            raise InputError(f"page {p} has no request number {j}")
        end = ts[j] if j < len(ts) else self.T + 1
        return range(ts[j - 1], end)

    def next_request(self, p: int, t: int) -> Optional[int]:
        j = self.r(p, t)
        ts = self.times[p]
        return ts[j] if j < len(ts) else None


def build_request_index(trace: Iterable[int], n: int) -> RequestIndex:
    trace = tuple(int(p) for p in trace)
    if not trace:
        raise InputError("request trace is empty")
    times: list[list[int]] = [[] for _ in range(n)]
    ranks = np.zeros((len(trace) + 1, n), dtype=np.int64)
    for t, p in enumerate(trace, start=1):
        if not 0 <= p < n:
            raise InputError(f"trace requests unknown page id {p} at time {t}")
        ranks[t] = ranks[t - 1]
        ranks[t, p] += 1
        times[p].append(t)
    return RequestIndex(
        n=n,
        trace=trace,
        counts=tuple(len(ts) for ts in times),
        times=tuple(tuple(ts) for ts in times),
        ranks=ranks,
    )
