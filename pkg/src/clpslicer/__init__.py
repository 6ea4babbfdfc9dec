"""clpslicer: a constraint-logic workbench.

Executes CLP and CCP programs over a Herbrand + finite-domain constraint
system, records enriched traces, monitors assertions during execution,
and computes backward dynamic slices of traces from markings or failed
assertions.
"""

from .assertions import Marking, eval_assertion, negate, symp
from .engine import (
    Monitor,
    Trace,
    answers,
    observables_check,
    run_ccp,
    run_clp,
)
from .parser import parse_assertion, parse_ccp, parse_clp, parse_constraint, parse_goal
from .slicer import SlicedTrace, mark, render_sliced, s_minimal, slice_trace
from .store import SolverConfig, Store, store_from_atoms
from .translate import clp_to_ccp, translate_goal

__version__ = "0.1.0"

__all__ = [
    "Marking",
    "Monitor",
    "SlicedTrace",
    "SolverConfig",
    "Store",
    "Trace",
    "answers",
    "clp_to_ccp",
    "eval_assertion",
    "mark",
    "negate",
    "observables_check",
    "parse_assertion",
    "parse_ccp",
    "parse_clp",
    "parse_constraint",
    "parse_goal",
    "render_sliced",
    "run_ccp",
    "run_clp",
    "s_minimal",
    "slice_trace",
    "store_from_atoms",
    "symp",
    "translate_goal",
    "__version__",
]
