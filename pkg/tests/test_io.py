from __future__ import annotations

import json
from fractions import Fraction

import pytest

from nlpage.errors import InputError
from nlpage.generators import RANDOM_KINDS, atoms_example, cover_example, gen_random, gen_restricted_hard, reduce_set_cover
from nlpage.io import (
    instance_from_json,
    instance_to_json,
    load_instance,
    load_solution,
    load_trace,
    save_instance,
    save_trace,
    solution_from_json,
    solution_to_json,
    trace_from_json,
)
from nlpage.model import Cardinality, Instance


def same_function(a: Instance, b: Instance) -> bool:
    return (
        a.n == b.n
        and a.k == b.k
        and a.costs == b.costs
        and a.names == b.names
        and a.unremovable == b.unremovable
        and list(a.f_table) == list(b.f_table)
    )


@pytest.mark.parametrize("kind", RANDOM_KINDS)
def test_round_trip_random(kind, tmp_path):
    inst, trace = gen_random(kind, 7, 1)
    save_instance(inst, tmp_path / "i.json")
    save_trace(trace, inst, tmp_path / "t.json")
    back = load_instance(tmp_path / "i.json")
    assert same_function(inst, back)
    assert load_trace(tmp_path / "t.json", back) == trace


@pytest.mark.parametrize(
    "inst",
    [atoms_example(), Instance(Cardinality(3), 1, (1, 2, 3)), gen_restricted_hard(3), reduce_set_cover(cover_example())[0]],
)
def test_round_trip_special(inst):
    assert same_function(inst, instance_from_json(json.loads(json.dumps(instance_to_json(inst)))))


def test_infinite_costs():
    inst = instance_from_json(
        {"pages": ["a", "b"], "costs": ["inf", 2], "k": 1, "spec": {"kind": "cardinality", "payload": {}}}
    )
    assert not inst.removable(0) and inst.removable(1)
    assert instance_to_json(inst)["costs"] == ["inf", 2]


@pytest.mark.parametrize(
    "data,needle",
    [
        ([], "expected a JSON object"),
        ({"pages": ["a"], "costs": [1], "k": 1}, "'spec'"),
        ({"pages": ["a"], "costs": [1.5], "k": 1, "spec": {"kind": "cardinality"}}, "costs'[0]"),
        ({"pages": ["a"], "costs": [1, 1], "k": 1, "spec": {"kind": "cardinality"}}, "expected 1 entries"),
        ({"pages": ["a"], "costs": [1], "k": "1", "spec": {"kind": "cardinality"}}, "field 'k'"),
        ({"pages": ["a"], "costs": [1], "k": 1, "spec": {"kind": "matroid"}}, "unknown kind"),
        ({"pages": ["a"], "costs": [1], "k": 1, "spec": {"kind": "linear", "payload": {}}}, "'sizes'"),
        ({"pages": ["a"], "costs": [1], "k": 1, "spec": {"kind": "hypergraph", "payload": {"edges": [["b"]]}}}, "unknown name"),
        ({"pages": ["a"], "costs": [1], "k": 1, "spec": {"kind": "explicit", "payload": {"values": {"0": 0}}}}, "bitmask 1"),
    ],
)
def test_instance_errors(data, needle):
    with pytest.raises(InputError, match=needle.replace("[", r"\[").replace("]", r"\]")):
        instance_from_json(data)


def test_file_errors_carry_location(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"pages": [\n  "a",\n}')
    with pytest.raises(InputError, match="line 3"):
        load_instance(bad)
    with pytest.raises(InputError, match="missing.json"):
        load_instance(tmp_path / "missing.json")


def test_trace_errors():
    inst = atoms_example()
    with pytest.raises(InputError, match="entry 2"):
        trace_from_json(["p1", "p9"], inst)


def test_solution_round_trip(tmp_path):
    inst = atoms_example()
    x = {(1, 1): Fraction(1), (0, 2): Fraction(1, 3)}
    entries = [(2, 0b1010, Fraction(2, 7)), (3, 0b0110, 0.25)]
    path = tmp_path / "sol.json"
    path.write_text(json.dumps(solution_to_json(x, entries, inst)))
    x2, e2 = load_solution(path, inst)
    assert x2 == x and e2 == entries


def test_solution_errors():
    inst = atoms_example()
    with pytest.raises(InputError):
        solution_from_json({"x": []}, inst)
    with pytest.raises(InputError, match="unknown page"):
        solution_from_json({"x": [["zz", 1, 1]], "y": []}, inst)
    with pytest.raises(InputError, match="bitmask"):
        solution_from_json({"x": [], "y": [[1, 1 << 9, 1]]}, inst)
    with pytest.raises(InputError, match="cannot parse"):
        solution_from_json({"x": [["p1", 1, "one"]], "y": []}, inst)
