from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlpage.errors import InputError, ResourceLimitError
from nlpage.generators import atoms_example, gen_gap_instance, gen_random
from nlpage.lp import EPS_FEAS, check_dual_feasible, check_primal_stronger
from nlpage.model import Cardinality, Instance, build_request_index, mu, q_of
from nlpage.stronger import find_violated_q_constraint, run_stronger


def bound_holds(rep):
    return rep.cost_x <= 3 * math.log(rep.mu + 1) * rep.dual * (1 + 1e-6) + 1e-12


class TestFindViolated:
    def test_zero_x_finds_infeasible_set(self):
        inst = atoms_example()
        # p2 then p4 requested: unrequested pages count as evicted, so only {p2, p4} is open
        vals = np.array([1.0, 0.0, 1.0, 0.0])
        assert find_violated_q_constraint(inst, vals, 3) == (0b1010, 1)

    def test_cardinality_removal_count(self):
        inst = Instance(Cardinality(6), 2, (1,) * 6)
        vals = np.array([0.5, 0.5, 0.5, 0.0, 1.0, 1.0])
        S, q = find_violated_q_constraint(inst, vals, 3)
        assert S >> 3 & 1 and q == S.bit_count() - 2
        # the four open pages need two evictions among 0..2, which hold only 1.5
        assert (S, q) == (0b1111, 2) or S.bit_count() == 3

    def test_all_evicted_means_none(self):
        inst = Instance(Cardinality(4), 1, (1,) * 4)
        assert find_violated_q_constraint(inst, np.ones(4), 2) is None


def test_cardinality_reduces_to_weighted_paging_lp():
    # on a cardinality spec every violated set's q is its size minus k
    inst = Instance(Cardinality(6), 3, (1, 2, 1, 3, 1, 2))
    trace = [random.Random(5).randrange(6) for _ in range(30)]
    rep = run_stronger(inst, trace)
    for _t, S, q in rep.raised_sets:
        assert q == S.bit_count() - 3


def test_zero_demand():
    inst = Instance(Cardinality(3), 3, (1, 1, 1))
    rep = run_stronger(inst, [0, 1, 2, 0])
    assert rep.cost_x == 0 and rep.dual == 0


def test_gap_instance_within_bound():
    inst, trace, _ = gen_gap_instance(12, 4)
    rep = run_stronger(inst, trace)
    assert check_primal_stronger(rep.x, inst, build_request_index(trace, inst.n)) is None
    assert bound_holds(rep)


@pytest.mark.parametrize("rate", ["mu", "n"])
def test_rate_option(rate):
    inst, trace = gen_random("linear", 7, 4)
    rep = run_stronger(inst, trace, rate=rate)
    expected = math.log((mu(inst) if rate == "mu" else inst.n) + 1)
    assert rep.rate == pytest.approx(expected)
    idx = build_request_index(trace, inst.n)
    assert check_primal_stronger(rep.x, inst, idx) is None
    assert check_dual_feasible(rep.entries, inst, idx, EPS_FEAS) is None


def test_guard():
    inst, trace, _ = gen_gap_instance(30, 5)
    with pytest.raises(ResourceLimitError):
        run_stronger(inst, trace)


def test_bad_rate():
    with pytest.raises(InputError):
        run_stronger(atoms_example(), [0], rate="log")


def test_q_subadditive_split():
    rng = random.Random(2024)
    for i in range(1000):
        kind = ("shared-atoms", "hypergraph", "set-cover", "linear")[i % 4]
        inst, _ = gen_random(kind, rng.randint(4, 8), rng.randrange(10_000))
        S = rng.randrange(1 << inst.n)
        U = S & rng.randrange(1 << inst.n)
        assert q_of(inst, S) <= U.bit_count() + q_of(inst, S & ~U)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 100_000), st.sampled_from(["shared-atoms", "hypergraph", "set-cover", "linear"]), st.integers(4, 8))
def test_run_properties(seed, kind, n):
    inst, trace = gen_random(kind, n, seed, {"T": 20})
    rep = run_stronger(inst, trace)
    idx = build_request_index(trace, inst.n)
    assert check_primal_stronger(rep.x, inst, idx) is None
    assert check_dual_feasible(rep.entries, inst, idx, EPS_FEAS) is None
    assert bound_holds(rep)
    m = mu(inst)
    for t, S, q in rep.raised_sets:
        assert q >= 1 and S >> trace[t - 1] & 1 and not inst.feasible(S)
        # removing a feasible maximal part of S leaves at most mu pages unremoved
        assert S.bit_count() - q <= m
