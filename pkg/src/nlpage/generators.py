"""Instance and trace factories: special families, reductions and seeded random instances."""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .deterministic import DeterministicPager
from .errors import InputError
from .model import (
    TABLE_LIMIT,
    Cardinality,
    ExplicitTable,
    Hypergraph,
    Instance,
    Linear,
    SetCoverDerived,
    SharedAtoms,
    iter_bits,
)

RANDOM_KINDS = ("shared-atoms", "hypergraph", "set-cover", "linear")


def gen_gap_instance(n: int, k: int):
    """Classic paging with every page requested once, plus the uniform ``1/k`` fractional solution.

    The fractional solution costs ``n/k`` while any integral schedule evicts
    ``n - k`` pages.
    """
    if not n > k >= 1:
        raise InputError(f"gap instance needs n > k >= 1, got n={n}, k={k}")
    inst = Instance(Cardinality(n), k, (1,) * n)
    x = {(p, 1): Fraction(1, k) for p in range(n)}
    return inst, list(range(n)), x


def gen_mu_vs_ell(n: int, k: int) -> Instance:
    """``n`` weightless pages next to ``k + 1`` unit pages: width ``k`` but ``mu = n + k``."""
    if n < 1 or k < 1:
        raise InputError("mu-vs-width instance needs n >= 1 and k >= 1")
    names = [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(k + 1)]
    return Instance(Linear((0,) * n + (1,) * (k + 1)), k, (1,) * len(names), names=names)


def gen_restricted_hard(n: int) -> Instance:
    """``n + 1`` pages and a 0/1-valued ``f`` with ``k = 0``: classic paging with capacity ``n``."""
    if not 1 <= n < TABLE_LIMIT:
        raise InputError(f"restricted instance needs 1 <= n < {TABLE_LIMIT}")
    size = n + 1
    values = tuple(0 if m.bit_count() <= n else 1 for m in range(1 << size))
    return Instance(ExplicitTable(values), 0, (1,) * size)


# ---------------------------------------------------------------------------
# set cover


@dataclass(frozen=True)
class SetCoverInstance:
    n_elements: int
    sets: tuple[int, ...]  # element bitmask per set, element i is bit i
    costs: tuple[int, ...]
    requests: tuple[int, ...]  # element ids, 0-based

    def __post_init__(self):
        universe = (1 << self.n_elements) - 1
        if len(self.costs) != len(self.sets):
            raise InputError("one cost per set expected")
        for s in self.sets:
            if s & ~universe:
                raise InputError("set mentions an element outside the universe")
        for e in self.requests:
            if not any(s >> e & 1 for s in self.sets):
                raise InputError(f"element {e + 1} is requested but belongs to no set")


def reduce_set_cover(sc: SetCoverInstance):
    """Paging instance whose feasible caches correspond to running set covers.

    Pages are the elements (named ``"1".."n"``, unremovable) followed by the sets
    (``"S1".."Sm"``).  ``k = 0`` and the trace requests every set once, then the
    online element requests.
    """
    ne, m = sc.n_elements, len(sc.sets)
    covers = tuple(1 << i for i in range(ne)) + tuple(sc.sets)
    names = [str(i + 1) for i in range(ne)] + [f"S{j + 1}" for j in range(m)]
    inst = Instance(
        SetCoverDerived(ne, covers),
        0,
        (1,) * ne + tuple(sc.costs),
        names=names,
        unremovable=(1 << ne) - 1,
    )
    trace = [ne + j for j in range(m)] + list(sc.requests)
    return inst, trace


def extract_cover(instance: Instance, n_elements: int, cache: int) -> int:
    """Set pages outside ``cache``, as a bitmask over set indices."""
    out = 0
    for j in range(instance.n - n_elements):
        if not cache >> (n_elements + j) & 1:
            out |= 1 << j
    return out


def cover_is_valid(sc: SetCoverInstance, chosen: int, requested: int) -> bool:
    covered = 0
    for j in iter_bits(chosen):
        covered |= sc.sets[j]
    return requested & ~covered == 0


def cover_example() -> SetCoverInstance:
    """Four elements, ``S1 = {1, 4}``, ``S2 = {2, 3, 4}``, elements 1 and 4 requested."""
    return SetCoverInstance(4, (0b1001, 0b1110), (1, 1), (0, 3))


def atoms_example() -> Instance:
    """Four pages sharing four atoms: ``a(p1)={a2}``, ``a(p2)={a1,a2,a3}``, ``a(p3)={a3}``, ``a(p4)={a2,a3,a4}``."""
    return Instance(SharedAtoms((0b0010, 0b0111, 0b0100, 0b1110), 4), 3, (1, 1, 1, 1), names=("p1", "p2", "p3", "p4"))


def pinned_rounding_instance():
    """Three elements, five sets of mixed cost, with one set requested again later.

    Small enough for heavy Monte Carlo while the boosted fractional solution
    still has entries strictly between 0 and 1.
    """
    sc = SetCoverInstance(3, (0b101, 0b100, 0b011, 0b110, 0b001), (10, 10, 10, 2, 10), ())
    inst, trace = reduce_set_cover(sc)
    return inst, trace + [1, 2, 4, 1, 2, 2, 4, 4]


# ---------------------------------------------------------------------------
# adversary


@dataclass
class AdversaryTranscript:
    instance: Instance
    trace: list
    pager: DeterministicPager

    @property
    def cost(self) -> int:
        return sum(self.instance.costs[p] for _t, p in self.pager.evictions)


def gen_adversary_det(ell: int, horizon: int, exact: bool = False) -> AdversaryTranscript:
    """Drive the deterministic pager on ``ell + 1`` pages, always requesting a page it lacks."""
    if ell < 1 or horizon < 1:
        raise InputError("adversary needs ell >= 1 and horizon >= 1")
    inst = Instance(Cardinality(ell + 1), ell, (1,) * (ell + 1))
    pager = DeterministicPager(inst, exact=exact)
    trace = []
    for _ in range(horizon):
        p = next(q for q in range(inst.n) if not pager.cache >> q & 1)
        trace.append(p)
        pager.request(p)
    return AdversaryTranscript(inst, trace, pager)


# ---------------------------------------------------------------------------
# random instances


def _random_trace(rng: random.Random, pages: list[int], length: int, locality: str, zipf_s: float) -> list[int]:
    if locality == "uniform":
        return [rng.choice(pages) for _ in range(length)]
    if locality == "zipf":
        ranked = pages[:]
        rng.shuffle(ranked)
        weights = [1.0 / (r + 1) ** zipf_s for r in range(len(ranked))]
        return rng.choices(ranked, weights=weights, k=length)
    raise InputError(f"unknown locality {locality!r}; expected 'zipf' or 'uniform'")


def _pick_k(rng: random.Random, inst_f, lo: int, full: int) -> int:
    hi = inst_f(full) - 1
    return rng.randint(lo, hi) if hi >= lo else lo


def gen_random(kind: str, n: int, seed: int, params: Optional[dict] = None):
    """Seeded random instance and trace.

    Recognized ``params``: ``T`` (trace length, default 30), ``locality``
    (``"zipf"`` or ``"uniform"``), ``zipf_s``, ``max_cost`` (costs drawn from
    ``1..max_cost``), and per kind ``n_atoms``/``max_atoms``, ``n_edges``,
    ``max_size``, ``n_elements``.
    """
    params = dict(params or {})
    rng = random.Random(f"{kind}:{n}:{seed}")
    T = int(params.get("T", 30))
    locality = params.get("locality", "zipf")
    zipf_s = float(params.get("zipf_s", 1.0))
    max_cost = int(params.get("max_cost", 3))
    if n < 2:
        raise InputError("random instances need at least two pages")
    costs = tuple(rng.randint(1, max_cost) for _ in range(n))
    full = (1 << n) - 1

    if kind == "shared-atoms":
        n_atoms = int(params.get("n_atoms", n))
        max_atoms = int(params.get("max_atoms", 3))
        atoms = tuple(
            sum(1 << a for a in rng.sample(range(n_atoms), rng.randint(1, min(max_atoms, n_atoms))))
            for _ in range(n)
        )
        spec = SharedAtoms(atoms, n_atoms)
        lo = max(a.bit_count() for a in atoms)
        k = _pick_k(rng, spec.value, lo, full)
        inst = Instance(spec, k, costs)
    elif kind == "hypergraph":
        n_edges = int(params.get("n_edges", n))
        edges = tuple(sum(1 << v for v in rng.sample(range(n), rng.randint(2, min(3, n)))) for _ in range(n_edges))
        spec = Hypergraph(n, edges)
        k = _pick_k(rng, spec.value, 1, full)
        inst = Instance(spec, k, costs)
    elif kind == "linear":
        max_size = int(params.get("max_size", 4))
        sizes = tuple(rng.randint(1, max_size) for _ in range(n))
        spec = Linear(sizes)
        k = _pick_k(rng, spec.value, max(sizes), full)
        inst = Instance(spec, k, costs)
    elif kind == "set-cover":
        return _random_set_cover(rng, n, params, T, max_cost)
    else:
        raise InputError(f"unknown random kind {kind!r}; expected one of {RANDOM_KINDS}")
    return inst, _random_trace(rng, list(range(n)), T, locality, zipf_s)


def random_set_cover(seed: int, n_elements: int, n_sets: int, n_requests: int, max_cost: int = 3) -> SetCoverInstance:
    """Random set system with every element in at least one set, then random element requests."""
    rng = random.Random(f"set-cover-instance:{seed}")
    sets = [0] * n_sets
    for e in range(n_elements):
        sets[rng.randrange(n_sets)] |= 1 << e
        for j in range(n_sets):
            if rng.random() < 0.3:
                sets[j] |= 1 << e
    costs = tuple(rng.randint(1, max_cost) for _ in range(n_sets))
    requests = tuple(rng.randrange(n_elements) for _ in range(n_requests))
    return SetCoverInstance(n_elements, tuple(sets), costs, requests)


def _random_set_cover(rng: random.Random, n: int, params: dict, T: int, max_cost: int):
    """Reduced set-cover instance whose trace also re-requests set pages.

    Every element lies in at least two sets, so any request leaves some other
    set available to cover each requested element.
    """
    n_elements = int(params.get("n_elements", max(1, n // 2)))
    n_sets = n - n_elements
    if n_sets < 2:
        raise InputError("random set-cover instances need at least two sets")
    sets = [0] * n_sets
    for e in range(n_elements):
        for j in rng.sample(range(n_sets), 2):
            sets[j] |= 1 << e
        for j in range(n_sets):
            if rng.random() < 0.2:
                sets[j] |= 1 << e
    costs = tuple(rng.randint(1, max_cost) for _ in range(n_sets))
    inst, trace = reduce_set_cover(SetCoverInstance(n_elements, tuple(sets), costs, ()))
    set_share = float(params.get("set_share", 0.3))
    while len(trace) < max(T, n_sets + 1):
        if rng.random() < set_share:
            trace.append(n_elements + rng.randrange(n_sets))
        else:
            trace.append(rng.randrange(n_elements))
    return inst, trace
