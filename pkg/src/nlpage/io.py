"""JSON formats for instances, traces and dumped LP solutions.

Instance::

    {"pages": ["a", "b", ...], "costs": [1, "inf", ...], "k": 3,
     "spec": {"kind": "shared-atoms", "payload": {...}}}

A cost of ``"inf"`` (or ``null``) marks a page that may never be evicted.
Payloads by kind:

* ``cardinality``: ``{}``
* ``linear``: ``{"sizes": [..]}``
* ``shared-atoms``: ``{"universe": [atom names], "atoms": [[atom names] per page]}``
* ``hypergraph``: ``{"edges": [[page names], ...]}``
* ``set-cover``: ``{"elements": [element names], "covers": [[element names] per page]}``
* ``explicit``: ``{"values": {"<bitmask>": value, ...}}`` covering every subset

A trace is a JSON array of page names.  A solution dump is
``{"x": [[page, j, value]], "y": [[t, bitmask, amount]]}`` where exact values
are written as ``"p/q"`` strings.  Bit ``i`` of a bitmask is page ``i``.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

from .errors import InputError
from .model import Cardinality, ExplicitTable, Hypergraph, Instance, Linear, SetCoverDerived, SharedAtoms, iter_bits

INFINITE = ("inf", "infinity", None)


def _names_to_mask(names, lookup: dict, where: str) -> int:
    mask = 0
    for name in names:
        if name not in lookup:
            raise InputError(f"{where}: unknown name {name!r}")
        mask |= 1 << lookup[name]
    return mask


def _spec_from_json(spec: dict, pages: list[str]) -> Any:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InputError("field 'spec': expected an object with 'kind' and 'payload'")
    kind = spec["kind"]
    payload = spec.get("payload") or {}
    lookup = {name: i for i, name in enumerate(pages)}
    n = len(pages)
    try:
        if kind == "cardinality":
            return Cardinality(n)
        if kind == "linear":
            sizes = tuple(int(s) for s in payload["sizes"])
            if len(sizes) != n:
                raise InputError(f"spec.payload.sizes: expected {n} entries, got {len(sizes)}")
            return Linear(sizes)
        if kind == "shared-atoms":
            universe = {a: i for i, a in enumerate(payload["universe"])}
            atoms = tuple(
                _names_to_mask(per, universe, f"spec.payload.atoms[{i}]") for i, per in enumerate(payload["atoms"])
            )
            if len(atoms) != n:
                raise InputError(f"spec.payload.atoms: expected {n} entries, got {len(atoms)}")
            return SharedAtoms(atoms, len(universe))
        if kind == "hypergraph":
            edges = tuple(
                _names_to_mask(e, lookup, f"spec.payload.edges[{i}]") for i, e in enumerate(payload["edges"])
            )
            return Hypergraph(n, edges)
        if kind == "set-cover":
            elements = {e: i for i, e in enumerate(payload["elements"])}
            covers = tuple(
                _names_to_mask(c, elements, f"spec.payload.covers[{i}]") for i, c in enumerate(payload["covers"])
            )
            if len(covers) != n:
                raise InputError(f"spec.payload.covers: expected {n} entries, got {len(covers)}")
            return SetCoverDerived(len(elements), covers)
        if kind == "explicit":
            raw = payload["values"]
            values = [None] * (1 << n)
            for key, v in raw.items():
                m = int(key)
                if not 0 <= m < len(values):
                    raise InputError(f"spec.payload.values: bitmask {key} outside 0..{len(values) - 1}")
                values[m] = int(v)
            missing = [m for m, v in enumerate(values) if v is None]
            if missing:
                raise InputError(f"spec.payload.values: no value for bitmask {missing[0]}")
            return ExplicitTable(tuple(values))
    except KeyError as exc:
        raise InputError(f"spec.payload: missing field {exc.args[0]!r} for kind {kind!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"spec.payload: {exc}") from None
    raise InputError(f"spec.kind: unknown kind {kind!r}")


def instance_from_json(data: dict) -> Instance:
    if not isinstance(data, dict):
        raise InputError("instance: expected a JSON object")
    for key in ("pages", "costs", "k", "spec"):
        if key not in data:
            raise InputError(f"instance: missing field {key!r}")
    pages = [str(p) for p in data["pages"]]
    costs, unremovable = [], 0
    for i, c in enumerate(data["costs"]):
        if isinstance(c, str) and c.lower() in INFINITE or c is None:
            costs.append(1)
            unremovable |= 1 << i
        elif isinstance(c, int) and not isinstance(c, bool):
            costs.append(c)
        else:
            raise InputError(f"field 'costs'[{i}]: expected a positive integer or \"inf\", got {c!r}")
    if len(costs) != len(pages):
        raise InputError(f"field 'costs': expected {len(pages)} entries, got {len(costs)}")
    k = data["k"]
    if not isinstance(k, int) or isinstance(k, bool):
        raise InputError(f"field 'k': expected an integer, got {k!r}")
    spec = _spec_from_json(data["spec"], pages)
    return Instance(spec, k, tuple(costs), names=tuple(pages), unremovable=unremovable)


def instance_to_json(inst: Instance) -> dict:
    spec = inst.spec
    names = list(inst.names)
    if isinstance(spec, Cardinality):
        payload: dict = {}
    elif isinstance(spec, Linear):
        payload = {"sizes": list(spec.sizes)}
    elif isinstance(spec, SharedAtoms):
        universe = [f"a{i + 1}" for i in range(spec.n_atoms)]
        payload = {"universe": universe, "atoms": [[universe[a] for a in iter_bits(m)] for m in spec.atoms]}
    elif isinstance(spec, Hypergraph):
        payload = {"edges": [[names[v] for v in iter_bits(e)] for e in spec.edges]}
    elif isinstance(spec, SetCoverDerived):
        elements = [f"e{i + 1}" for i in range(spec.n_elements)]
        payload = {"elements": elements, "covers": [[elements[e] for e in iter_bits(m)] for m in spec.covers]}
    elif isinstance(spec, ExplicitTable):
        payload = {"values": {str(m): v for m, v in enumerate(spec.values)}}
    else:  # pragma: no cover - exhaustive over spec classes
        raise InputError(f"cannot serialize spec {spec!r}")
    costs = ["inf" if not inst.removable(p) else inst.costs[p] for p in range(inst.n)]
    return {"pages": names, "costs": costs, "k": inst.k, "spec": {"kind": spec.kind, "payload": payload}}


def _read_json(path: Union[str, Path]) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_instance(path: Union[str, Path]) -> Instance:
    data = _read_json(path)
    try:
        return instance_from_json(data)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def save_instance(inst: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps(instance_to_json(inst), indent=1) + "\n")


def trace_from_json(data: Any, inst: Instance) -> list[int]:
    if not isinstance(data, list) or not data:
        raise InputError("trace: expected a nonempty JSON array of page names")
    lookup = {name: i for i, name in enumerate(inst.names)}
    out = []
    for t, name in enumerate(data, start=1):
        if str(name) not in lookup:
            raise InputError(f"trace entry {t}: unknown page {name!r}")
        out.append(lookup[str(name)])
    return out


def load_trace(path: Union[str, Path], inst: Instance) -> list[int]:
    data = _read_json(path)
    try:
        return trace_from_json(data, inst)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None


def save_trace(trace, inst: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(json.dumps([inst.names[p] for p in trace]) + "\n")


def _encode_number(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else int(v)
    return v


def _decode_number(v, where: str):
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{where}: cannot parse number {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"{where}: expected a number, got {v!r}")
    return Fraction(v) if isinstance(v, int) else v


def solution_to_json(x: dict, entries, inst: Instance) -> dict:
    return {
        "x": [[inst.names[p], j, _encode_number(v)] for (p, j), v in sorted(x.items())],
        "y": [[t, mask, _encode_number(a)] for t, mask, a in entries],
    }


def solution_from_json(data: dict, inst: Instance):
    if not isinstance(data, dict) or "x" not in data or "y" not in data:
        raise InputError("solution: expected an object with 'x' and 'y'")
    lookup = {name: i for i, name in enumerate(inst.names)}
    x = {}
    for i, row in enumerate(data["x"]):
        try:
            page, j, value = row
        except (TypeError, ValueError):
            raise InputError(f"solution.x[{i}]: expected [page, j, value]") from None
        if page not in lookup:
            raise InputError(f"solution.x[{i}]: unknown page {page!r}")
        x[(lookup[page], int(j))] = _decode_number(value, f"solution.x[{i}]")
    entries = []
    for i, row in enumerate(data["y"]):
        try:
            t, mask, amount = row
        except (TypeError, ValueError):
            raise InputError(f"solution.y[{i}]: expected [t, bitmask, amount]") from None
        if not isinstance(mask, int) or mask < 0 or mask >> inst.n:
            raise InputError(f"solution.y[{i}]: bad bitmask {mask!r}")
        entries.append((int(t), mask, _decode_number(amount, f"solution.y[{i}]")))
    return x, entries


def load_solution(path: Union[str, Path], inst: Instance):
    data = _read_json(path)
    try:
        return solution_from_json(data, inst)
    except InputError as exc:
        raise InputError(f"{path}: {exc}") from None
