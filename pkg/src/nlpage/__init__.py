"""Non-linear paging: online caching where a monotone set function decides what fits.

The submodules split along the workflow: ``model`` (pages, feasibility
functions, parameter oracles), ``lp`` (constraint and duality checks),
the online algorithms ``deterministic``, ``fractional``, ``stronger`` and
``rounding``, the exact ``offline`` optimum, ``generators`` for instance
families, and ``harness``/``cli`` for experiments.
"""
from .deterministic import DeterministicPager, run_deterministic
from .errors import InputError, InstanceError, InvariantError, NlpageError, ResourceLimitError
from .fractional import run_fractional
from .model import (
    Cardinality,
    ExplicitTable,
    Hypergraph,
    Instance,
    Linear,
    SetCoverDerived,
    SharedAtoms,
    build_request_index,
    cover_demand,
    eval_f,
    eval_g,
    is_feasible,
    mu,
    q_of,
    width_ell,
)
from .offline import opt_dp, ratio
from .rounding import run_rounding
from .stronger import run_stronger

__all__ = [
    "Cardinality",
    "DeterministicPager",
    "ExplicitTable",
    "Hypergraph",
    "InputError",
    "Instance",
    "InstanceError",
    "InvariantError",
    "Linear",
    "NlpageError",
    "ResourceLimitError",
    "SetCoverDerived",
    "SharedAtoms",
    "build_request_index",
    "cover_demand",
    "eval_f",
    "eval_g",
    "is_feasible",
    "mu",
    "opt_dp",
    "q_of",
    "ratio",
    "run_deterministic",
    "run_fractional",
    "run_rounding",
    "run_stronger",
    "width_ell",
]
