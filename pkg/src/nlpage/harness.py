"""Run algorithms with inline invariant checks, and drive reproducible sweeps."""
from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import generators as gen
from .deterministic import competitive_certificate, run_deterministic
from .errors import InputError, InvariantError, NlpageError, ResourceLimitError
from .fractional import run_fractional
from .lp import (
    EPS_FEAS,
    check_dual_feasible,
    check_primal_lp1,
    check_primal_lp2,
    check_primal_stronger,
    dual_value,
)
from .model import TABLE_LIMIT, Instance, cover_demand, mu, verify_monotone, width_ell
from .offline import opt_dp, ratio
from .rounding import run_rounding
from .stronger import run_stronger

ALGORITHMS = ("det", "frac", "round", "stronger", "opt")
SLACK = 1e-6
SKIPPED = "skipped"


def instance_params(inst: Instance) -> dict:
    """n, k, width, mu, cover demand, cost ratio and a monotonicity verdict."""
    if inst.n <= 16:
        monotone: Any = verify_monotone(inst.spec)
    else:
        monotone = SKIPPED
    return {
        "n": inst.n,
        "k": inst.k,
        "ell": width_ell(inst),
        "mu": mu(inst),
        "N": cover_demand(inst),
        "C": inst.cost_ratio,
        "monotone": monotone,
    }


@dataclass
class RunReport:
    alg: str
    n: int
    k: int
    ell: Optional[int]
    mu: int
    N: int
    C: Fraction
    cost: Any
    dual: Any = None
    opt: Any = None
    ratio: Any = None
    wall_time: float = 0.0
    seed: Optional[int] = None
    extra: dict = field(default_factory=dict)
    solution: Optional[tuple] = None  # (x, ledger entries) for LP-based algorithms

    def as_dict(self) -> dict:
        out = asdict(self)
        out.pop("solution")
        return out


def _require(ok: bool, name: str, detail: str) -> None:
    if not ok:
        raise InvariantError(name, detail)


def _verify_det(rep, inst, ell) -> None:
    v = check_dual_feasible(rep.entries, inst, rep.index)
    _require(v is None, "dual-feasible", str(v))
    v = check_primal_lp1(rep.x, inst, rep.index)
    _require(v is None, "primal-feasible", str(v))
    _require(competitive_certificate(rep, ell), "cost<=ell*dual", f"cost {rep.cost}, ell {ell}, dual {rep.dual}")
    for t, Q, _a in rep.entries:
        _require(Q.bit_count() <= (ell or 0) + 1, "|Q|<=ell+1", f"t={t} Q={Q:#x}")
    for t, cache in enumerate(rep.snapshots, start=1):
        _require(inst.feasible(cache), "cache-feasible", f"t={t}")


def _verify_frac(rep, inst) -> None:
    for name, sol in (("x", rep.x), ("z", rep.z)):
        v = check_primal_lp2(sol, inst, rep.index)
        _require(v is None, f"{name}-primal-feasible", str(v))
    v = check_dual_feasible(rep.entries, inst, rep.index, EPS_FEAS)
    _require(v is None, "dual-feasible", str(v))
    bound = 6 * math.log(rep.mu + 1) * rep.dual * (1 + SLACK)
    _require(rep.cost_x <= bound + EPS_FEAS, "cost<=6ln(mu+1)*dual", f"{rep.cost_x} > {bound}")
    _require(rep.cost_z <= 4 * rep.cost_x + EPS_FEAS, "cost(z)<=4cost(x)", f"{rep.cost_z} vs {rep.cost_x}")
    theta = rep.theta
    for key, v in rep.z.items():
        ok = v == 1.0 or theta - EPS_FEAS <= v <= 0.5 + EPS_FEAS
        _require(ok, "z-range", f"z{key} = {v}")


def _verify_stronger(rep, inst) -> None:
    v = check_primal_stronger(rep.x, inst, rep.index)
    _require(v is None, "primal-feasible", str(v))
    v = check_dual_feasible(rep.entries, inst, rep.index, EPS_FEAS)
    _require(v is None, "dual-feasible", str(v))
    bound = 3 * math.log(rep.mu + 1) * rep.dual * (1 + SLACK)
    _require(rep.cost_x <= bound + EPS_FEAS, "cost<=3ln(mu+1)*dual", f"{rep.cost_x} > {bound}")


def _opt_or_skip(inst: Instance, trace) -> Any:
    try:
        return opt_dp(inst, trace).cost
    except ResourceLimitError:
        return SKIPPED


def run_algorithm(
    alg: str,
    inst: Instance,
    trace: list,
    seed: Optional[int] = None,
    trials: int = 1,
    verify: bool = False,
    eps_event: float = 1e-9,
    with_opt: bool = True,
) -> RunReport:
    if alg not in ALGORITHMS:
        raise InputError(f"unknown algorithm {alg!r}; expected one of {ALGORITHMS}")
    if alg == "round" and verify and seed is None:
        raise InputError("--verify with a randomized algorithm needs an explicit --seed")
    params = instance_params(inst) if inst.n <= TABLE_LIMIT else {
        "n": inst.n, "k": inst.k, "ell": width_ell(inst), "mu": mu(inst), "N": cover_demand(inst), "C": inst.cost_ratio,
    }
    report = RunReport(alg, params["n"], params["k"], params["ell"], params["mu"], params["N"], params["C"], cost=None, seed=seed)
    start = time.perf_counter()
    if alg == "det":
        rep = run_deterministic(inst, trace)
        report.cost, report.dual = rep.cost, rep.dual
        report.solution = (rep.x, rep.entries)
        report.extra["evictions"] = len(rep.evictions)
        if verify:
            _verify_det(rep, inst, params["ell"])
    elif alg == "frac":
        rep = run_fractional(inst, trace, eps_event)
        report.cost, report.dual = rep.cost_x, rep.dual
        report.extra["cost_z"] = rep.cost_z
        report.solution = (rep.x, rep.entries)
        if verify:
            _verify_frac(rep, inst)
    elif alg == "stronger":
        rep = run_stronger(inst, trace, eps_event)
        report.cost, report.dual = rep.cost_x, rep.dual
        report.solution = (rep.x, rep.entries)
        if verify:
            _verify_stronger(rep, inst)
    elif alg == "round":
        summary = run_rounding(inst, trace, seed if seed is not None else 0, trials)
        report.cost = summary.mean_cost
        report.dual = summary.frac.dual
        report.extra.update(
            trials=trials,
            mean=summary.mean_cost,
            stddev=summary.std_cost,
            max=float(summary.costs.max()),
            alpha=summary.alpha,
            cost_z=summary.frac.cost_z,
            repairs=int(sum(tr.repairs for tr in summary.trials)),
        )
    else:
        report.cost = opt_dp(inst, trace).cost
    report.wall_time = time.perf_counter() - start
    if with_opt:
        report.opt = report.cost if alg == "opt" else _opt_or_skip(inst, trace)
        if report.opt == SKIPPED:
            report.ratio = SKIPPED
        else:
            report.ratio = ratio(report.cost, report.opt)
            if verify and report.dual is not None and alg in ("det", "frac", "stronger"):
                _require(report.dual <= report.opt + EPS_FEAS * (alg != "det"), "dual<=opt", f"{report.dual} > {report.opt}")
            if verify and alg == "det" and params["ell"] is not None:
                _require(report.cost <= params["ell"] * report.opt, "cost<=ell*opt", f"{report.cost} vs {report.opt}")
    return report


# ---------------------------------------------------------------------------
# sweeps

CSV_COLUMNS = ("family", "kind", "seed", "alg", "n", "k", "ell", "mu", "N", "cost", "dual", "opt", "ratio", "status")


def build_family(family: dict, seed: int):
    """Instance and trace for one sweep family entry at one seed."""
    kind = family.get("kind")
    try:
        if kind in gen.RANDOM_KINDS:
            return gen.gen_random(kind, int(family["n"]), seed, family.get("params"))
        if kind == "gap":
            inst, trace, _x = gen.gen_gap_instance(int(family["n"]), int(family["k"]))
            return inst, trace
        if kind == "adversary":
            tr = gen.gen_adversary_det(int(family["ell"]), int(family["horizon"]))
            return tr.instance, tr.trace
        if kind == "restricted-hard":
            inst = gen.gen_restricted_hard(int(family["n"]))
            trace = [(seed + 3 * t) % inst.n for t in range(int(family.get("T", 20)))]
            return inst, trace
        if kind == "mu-vs-ell":
            inst = gen.gen_mu_vs_ell(int(family["n"]), int(family["k"]))
            trace = [(seed + t) % inst.n for t in range(int(family.get("T", 20)))]
            return inst, trace
    except KeyError as exc:
        raise InputError(f"family {family.get('name')!r}: missing field {exc.args[0]!r}") from None
    raise InputError(f"family {family.get('name')!r}: unknown kind {kind!r}")


def _fmt(v) -> str:
    if v is None:
        return "undefined"
    if isinstance(v, str):
        return v
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, Fraction) and v.denominator == 1:
        return str(v.numerator)
    return f"{float(v):.10g}"


def _sweep_row(job) -> dict:
    family, alg, seed = job
    row = {"family": family["name"], "kind": family["kind"], "seed": str(seed), "alg": alg}
    try:
        inst, trace = build_family(family, seed)
        rep = run_algorithm(alg, inst, trace, seed=seed, trials=int(family.get("trials", 1)), verify=True)
        row.update(
            n=_fmt(rep.n), k=_fmt(rep.k), ell=_fmt(rep.ell), mu=_fmt(rep.mu), N=_fmt(rep.N),
            cost=_fmt(rep.cost), dual=_fmt(rep.dual) if rep.dual is not None else "",
            opt=_fmt(rep.opt), ratio=_fmt(rep.ratio), status="ok",
        )
    except NlpageError as exc:
        for col in CSV_COLUMNS:
            row.setdefault(col, "")
        if isinstance(exc, ResourceLimitError):
            row["status"] = f"{SKIPPED}: {exc}"
        else:
            row["status"] = f"error: {type(exc).__name__}: {exc}".replace("\n", " ")
    return row


def sweep_jobs(config: dict) -> list:
    families = config.get("families")
    if not families:
        raise InputError("sweep config: 'families' must be a nonempty list")
    algs = config.get("algorithms", ["det"])
    for a in algs:
        if a not in ALGORITHMS:
            raise InputError(f"sweep config: unknown algorithm {a!r}")
    seeds = config.get("seeds", [0])
    names = [f.get("name") for f in families]
    if any(not n for n in names) or len(set(names)) != len(names):
        raise InputError("sweep config: every family needs a unique 'name'")
    return [(fam, alg, int(seed)) for fam in families for alg in algs for seed in seeds]


def _row_key(row: dict) -> tuple:
    return (row["family"], row["alg"], str(row["seed"]))


def run_sweep(config: dict, out: Optional[Path] = None, workers: Optional[int] = None) -> str:
    """Run every (family, algorithm, seed) cell and return the CSV text.

    When ``out`` exists, rows already present (by family, algorithm, seed) are
    kept and only the missing cells run; the file is then rewritten in the
    canonical job order, so repeated runs produce identical bytes.
    """
    jobs = sweep_jobs(config)
    done: dict = {}
    if out is not None and Path(out).exists():
        with open(out, newline="") as fh:
            for row in csv.DictReader(fh):
                done[_row_key(row)] = row
    todo = [j for j in jobs if (j[0]["name"], j[1], str(j[2])) not in done]
    workers = int(workers if workers is not None else config.get("workers", 1))
    if workers > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            fresh = list(pool.map(_sweep_row, todo))
    else:
        fresh = [_sweep_row(j) for j in todo]
    for row in fresh:
        done[_row_key(row)] = row
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for fam, alg, seed in jobs:
        writer.writerow({c: done[(fam["name"], alg, str(seed))].get(c, "") for c in CSV_COLUMNS})
    text = buf.getvalue()
    if out is not None:
        Path(out).write_text(text)
    return text
