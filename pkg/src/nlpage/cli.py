"""``nlpage`` command line: params, run, sweep, gen, verify-solution.

Exit codes: 0 success, 2 invariant violation, 3 input error, 4 resource guard.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import generators as gen
from .errors import InputError, InvariantError, NlpageError
from .harness import ALGORITHMS, instance_params, run_algorithm, run_sweep
from .io import instance_to_json, load_instance, load_solution, load_trace, save_instance, save_trace, solution_to_json
from .lp import check_dual_feasible, check_primal_lp1, check_primal_lp2, check_primal_stronger, EPS_FEAS
from .model import build_request_index


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else v.numerator
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _emit(obj, out=None) -> None:
    text = json.dumps(_jsonable(obj), indent=1)
    if out:
        Path(out).write_text(text + "\n")
    print(text)


def cmd_params(args) -> int:
    inst = load_instance(args.instance)
    params = instance_params(inst)
    width = max(len(key) for key in params)
    for key, value in params.items():
        shown = "undefined" if value is None else value
        print(f"{key:<{width}} {shown}")
    return 0


def cmd_run(args) -> int:
    inst = load_instance(args.instance)
    trace = load_trace(args.trace, inst)
    report = run_algorithm(
        args.alg, inst, trace, seed=args.seed, trials=args.trials, verify=args.verify, eps_event=args.epsilon
    )
    out = report.as_dict()
    if report.solution is not None:
        out["solution"] = solution_to_json(*report.solution, inst)
    _emit(out, args.out)
    return 0


def cmd_sweep(args) -> int:
    try:
        config = json.loads(Path(args.config).read_text())
    except OSError as exc:
        raise InputError(f"{args.config}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{args.config}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    text = run_sweep(config, Path(args.out) if args.out else None, workers=args.workers)
    if not args.out:
        sys.stdout.write(text)
    return 0


def cmd_gen(args) -> int:
    kind = args.kind
    if kind == "gap":
        inst, trace, _x = gen.gen_gap_instance(args.n, args.k)
    elif kind == "mu-vs-ell":
        inst = gen.gen_mu_vs_ell(args.n, args.k)
        trace = list(range(inst.n))
    elif kind == "adversary":
        tr = gen.gen_adversary_det(args.ell, args.horizon)
        inst, trace = tr.instance, tr.trace
    elif kind == "restricted-hard":
        inst = gen.gen_restricted_hard(args.n)
        trace = list(range(inst.n))
    elif kind == "atoms-example":
        inst, trace = gen.atoms_example(), [1, 2, 0, 3]
    elif kind == "cover-example":
        inst, trace = gen.reduce_set_cover(gen.cover_example())
    elif kind in gen.RANDOM_KINDS:
        try:
            params = json.loads(args.params) if args.params else {}
        except json.JSONDecodeError as exc:
            raise InputError(f"--params: {exc.msg} at column {exc.colno}") from None
        if not isinstance(params, dict):
            raise InputError("--params: expected a JSON object")
        if args.T is not None:
            params["T"] = args.T
        inst, trace = gen.gen_random(kind, args.n, args.seed, params)
    else:  # argparse restricts choices
        raise InputError(f"unknown generator {kind!r}")
    if args.out:
        save_instance(inst, f"{args.out}.instance.json")
        save_trace(trace, inst, f"{args.out}.trace.json")
        print(f"wrote {args.out}.instance.json and {args.out}.trace.json")
    else:
        _emit({"instance": instance_to_json(inst), "trace": [inst.names[p] for p in trace]})
    return 0


def cmd_verify_solution(args) -> int:
    inst = load_instance(args.instance)
    trace = load_trace(args.trace, inst)
    index = build_request_index(trace, inst.n)
    x, entries = load_solution(args.solution, inst)
    if args.lp == "lp1":
        primal = check_primal_lp1(x, inst, index)
    elif args.lp == "lp2":
        primal = check_primal_lp2(x, inst, index)
    else:
        primal = check_primal_stronger(x, inst, index)
    exact = all(isinstance(a, Fraction) for _t, _m, a in entries)
    dual = check_dual_feasible(entries, inst, index, 0 if exact else EPS_FEAS)
    print(f"primal {args.lp}: {'ok' if primal is None else primal}")
    print(f"dual: {'ok' if dual is None else dual}")
    if primal is not None:
        raise InvariantError("primal-feasible", str(primal))
    if dual is not None:
        raise InvariantError("dual-feasible", str(dual))
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlpage", description="Non-linear paging algorithms and oracles.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="print n, k, width, mu, N, C and a monotonicity verdict")
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("run", help="run one algorithm on an instance and trace")
    p.add_argument("--alg", choices=ALGORITHMS, required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--verify", action="store_true", help="check the algorithm's invariants inline")
    p.add_argument("--epsilon", type=float, default=1e-9, help="bisection stop for fractional raises")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a family x algorithm x seed matrix into CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV path; existing rows are reused (resume)")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gen", help="write a generated instance and trace")
    p.add_argument(
        "kind",
        choices=("gap", "mu-vs-ell", "adversary", "restricted-hard", "atoms-example", "cover-example") + gen.RANDOM_KINDS,
    )
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--horizon", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--T", type=int)
    p.add_argument("--params", help="JSON object of extra generator parameters")
    p.add_argument("--out", help="output prefix; prints JSON when omitted")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("verify-solution", help="check a dumped x/y solution against an LP")
    p.add_argument("--instance", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--solution", required=True)
    p.add_argument("--lp", choices=("lp1", "lp2", "stronger"), default="lp1")
    p.set_defaults(func=cmd_verify_solution)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NlpageError as exc:
        print(f"nlpage: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
