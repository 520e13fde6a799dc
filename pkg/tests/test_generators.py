from __future__ import annotations

import pytest

from nlpage.errors import InputError
from nlpage.generators import (
    RANDOM_KINDS,
    SetCoverInstance,
    cover_is_valid,
    extract_cover,
    cover_example,
    gen_adversary_det,
    gen_gap_instance,
    gen_mu_vs_ell,
    gen_random,
    gen_restricted_hard,
    pinned_rounding_instance,
    random_set_cover,
    reduce_set_cover,
)
from nlpage.model import cover_demand, is_submodular, mu, verify_monotone, width_ell


def test_gap_instance_parameters():
    inst, trace, x = gen_gap_instance(100, 10)
    assert (width_ell(inst), mu(inst), cover_demand(inst)) == (10, 10, 90)
    assert trace == list(range(100))
    assert sum(x.values()) == 10


def test_gap_instance_rejects_bad_sizes():
    with pytest.raises(InputError):
        gen_gap_instance(5, 5)


def test_mu_vs_ell_large_gap():
    inst = gen_mu_vs_ell(50, 3)
    assert width_ell(inst) == 3 and mu(inst) == 53


def test_restricted_hard_is_classic_paging():
    inst = gen_restricted_hard(4)
    assert inst.n == 5 and inst.k == 0
    assert inst.feasible(0b01111) and not inst.feasible(0b11111)
    assert width_ell(inst) == 4


def test_adversary_always_faults():
    tr = gen_adversary_det(3, 50)
    for t, p in enumerate(tr.trace[3:], start=4):
        # the requested page was not resident right before its request
        assert not tr.pager.snapshots[t - 2] >> p & 1


class TestSetCoverReduction:
    def test_cover_example_layout(self):
        inst, trace = reduce_set_cover(cover_example())
        assert inst.names == ("1", "2", "3", "4", "S1", "S2")
        assert trace == [4, 5, 0, 3]
        assert inst.unremovable == 0b1111 and inst.k == 0

    def test_cache_is_feasible_iff_outside_sets_cover_residents(self):
        sc = cover_example()
        inst, _ = reduce_set_cover(sc)
        for cache in range(1 << inst.n):
            elements = cache & 0b1111
            chosen = extract_cover(inst, 4, cache)
            assert inst.feasible(cache) == cover_is_valid(sc, chosen, elements)

    def test_uncoverable_request_rejected(self):
        with pytest.raises(InputError):
            SetCoverInstance(2, (0b01,), (1,), (1,))

    def test_g_submodular(self):
        for seed in range(5):
            inst, _ = reduce_set_cover(random_set_cover(seed, 5, 4, 6))
            assert is_submodular(inst.g_table)


def test_pinned_rounding_instance_shape():
    inst, trace = pinned_rounding_instance()
    assert inst.n == 8 and len(trace) == 13
    assert cover_demand(inst) >= 1


@pytest.mark.parametrize("kind", RANDOM_KINDS)
def test_random_is_seeded(kind):
    a_inst, a_trace = gen_random(kind, 8, 3, {"T": 25})
    b_inst, b_trace = gen_random(kind, 8, 3, {"T": 25})
    assert a_inst == b_inst and a_trace == b_trace
    c_inst, c_trace = gen_random(kind, 8, 4, {"T": 25})
    assert (c_inst, c_trace) != (a_inst, a_trace)
    assert verify_monotone(a_inst.spec)
    assert len(a_trace) >= 25


@pytest.mark.parametrize("kind", RANDOM_KINDS)
def test_random_instances_overflow(kind):
    # k is drawn below f(P), so every random instance has some eviction pressure
    for seed in range(10):
        inst, _ = gen_random(kind, 7, seed)
        assert cover_demand(inst) >= 1


def test_uniform_locality_and_bad_locality():
    _inst, trace = gen_random("linear", 6, 1, {"locality": "uniform", "T": 40})
    assert len(trace) == 40
    with pytest.raises(InputError):
        gen_random("linear", 6, 1, {"locality": "bursty"})


def test_unknown_kind():
    with pytest.raises(InputError):
        gen_random("matroid", 6, 0)
