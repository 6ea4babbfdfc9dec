"""Assertion semantics: trace evaluation, duals, classification, symp.

Assertions speak about a position in a trace: entailment and consistency
of constraints against the store, plus quantification over the calls
present in the configuration.  ``symp`` turns a failed assertion into a
marking (the testing hypothesis) that seeds the slicer.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .constraints import constraint_vars
from .minimal import (
    entailing_subsets_union,
    inconsistent_subsets_union,
    sharing_cids,
)
from .store import BudgetExceededError, SolverConfig, Store
from .syntax import (
    AndA,
    Assertion,
    Call,
    CallLit,
    Cons,
    ExistsCall,
    ForAllCalls,
    Icons,
    ImpliesA,
    Neg,
    OrA,
    Pos,
    assertion_vars,
    subst_assertion,
)
from .terms import FreshNames


@dataclass(frozen=True)
class Marking:
    """Selected constraints and agents: the pair feeding the slicer."""

    cids: frozenset[int] = frozenset()
    pids: frozenset[int] = frozenset()
    over_approximated: bool = False

    def union(self, other: "Marking") -> "Marking":
        return Marking(
            self.cids | other.cids,
            self.pids | other.pids,
            self.over_approximated or other.over_approximated,
        )

    def intersection(self, other: "Marking") -> "Marking":
        return Marking(
            self.cids & other.cids,
            self.pids & other.pids,
            self.over_approximated or other.over_approximated,
        )

    @property
    def empty(self) -> bool:
        return not self.cids and not self.pids


EMPTY_MARKING = Marking()


def _store_for(store: Store, c) -> Store:
    # An assertion written inside a clause body speaks about that clause
    # instance's variables, so they must stay observable even when R_LOC
    # hid them; this also matches CLP mode, where clause variables are
    # never hidden.
    overlap = store.hidden & constraint_vars(c)
    if overlap:
        return replace(store, hidden=store.hidden - overlap)
    return store


def eval_assertion(trace, i: int, f: Assertion, fresh: Optional[FreshNames] = None) -> bool:
    """Does the trace satisfy the formula at position i?"""
    if not 0 <= i < len(trace.configs):
        raise IndexError(f"position {i} outside trace of length {len(trace.configs)}")
    fresh = fresh or FreshNames()
    config = trace.configs[i]
    store = config.store
    if isinstance(f, Pos):
        return _store_for(store, f.c).entails(f.c, fresh)
    if isinstance(f, Neg):
        return not _store_for(store, f.c).entails(f.c, fresh)
    if isinstance(f, Cons):
        return _store_for(store, f.c).consistent_with(f.c, fresh)
    if isinstance(f, Icons):
        return not _store_for(store, f.c).consistent_with(f.c, fresh)
    if isinstance(f, AndA):
        return eval_assertion(trace, i, f.lhs, fresh) and eval_assertion(trace, i, f.rhs, fresh)
    if isinstance(f, OrA):
        return eval_assertion(trace, i, f.lhs, fresh) or eval_assertion(trace, i, f.rhs, fresh)
    if isinstance(f, ImpliesA):
        return (not eval_assertion(trace, i, f.lhs, fresh)) or eval_assertion(trace, i, f.rhs, fresh)
    if isinstance(f, ForAllCalls):
        return all(
            eval_assertion(trace, i, inst, fresh)
            for _, inst in _call_instances(config, f)
        )
    if isinstance(f, ExistsCall):
        return any(
            eval_assertion(trace, i, inst, fresh)
            for _, inst in _call_instances(config, f)
        )
    raise TypeError(f"not an assertion: {f!r}")


def _call_instances(config, f) -> list[tuple[int, Assertion]]:
    out = []
    for pid, agent in config.agents:
        name, args = _call_shape(agent)
        if name == f.pred and args is not None and len(args) == len(f.params):
            mapping = dict(zip(f.params, args))
            out.append((pid, subst_assertion(f.body, mapping)))
    return out


def _call_shape(agent):
    if isinstance(agent, Call):
        return agent.name, agent.args
    if isinstance(agent, CallLit):
        return agent.name, agent.args
    return None, None


def negate(f: Assertion) -> Assertion:
    """The dual ~F: satisfied exactly when F is not."""
    if isinstance(f, Pos):
        return Neg(f.c)
    if isinstance(f, Neg):
        return Pos(f.c)
    if isinstance(f, Cons):
        return Icons(f.c)
    if isinstance(f, Icons):
        return Cons(f.c)
    if isinstance(f, AndA):
        return OrA(negate(f.lhs), negate(f.rhs))
    if isinstance(f, OrA):
        return AndA(negate(f.lhs), negate(f.rhs))
    if isinstance(f, ImpliesA):
        return AndA(f.lhs, negate(f.rhs))
    if isinstance(f, ForAllCalls):
        return ExistsCall(f.pred, f.params, negate(f.body))
    if isinstance(f, ExistsCall):
        return ForAllCalls(f.pred, f.params, negate(f.body))
    raise TypeError(f"not an assertion: {f!r}")


# --- classification ----------------------------------------------------------

def falsity_persistent(f: Assertion) -> bool:
    """Once false at some position, false at every later one.

    Only such invariants may stop a run early: along a monotone store,
    neg(c)/cons(c) can only get worse, and so can any combination whose
    failure is preserved (e.g. pos(a) -> neg(b)).
    """
    if isinstance(f, (Neg, Cons)):
        return True
    if isinstance(f, (Pos, Icons)):
        return False
    if isinstance(f, (AndA, OrA)):
        return falsity_persistent(f.lhs) and falsity_persistent(f.rhs)
    if isinstance(f, ImpliesA):
        return truth_persistent(f.lhs) and falsity_persistent(f.rhs)
    return False  # call quantifiers: the agent multiset is not monotone


def truth_persistent(f: Assertion) -> bool:
    if isinstance(f, (Pos, Icons)):
        return True
    if isinstance(f, (Neg, Cons)):
        return False
    if isinstance(f, (AndA, OrA)):
        return truth_persistent(f.lhs) and truth_persistent(f.rhs)
    if isinstance(f, ImpliesA):
        return falsity_persistent(f.lhs) and truth_persistent(f.rhs)
    return False


def has_call_quantifier(f: Assertion) -> bool:
    if isinstance(f, (ForAllCalls, ExistsCall)):
        return True
    if isinstance(f, (AndA, OrA, ImpliesA)):
        return has_call_quantifier(f.lhs) or has_call_quantifier(f.rhs)
    return False


# --- symp: from a failed assertion to a marking -------------------------------

def symp(
    trace,
    f: Assertion,
    n: int,
    *,
    var_closure: bool = True,
    subset_budget: int = 10**6,
    solver: Optional[SolverConfig] = None,
    fresh: Optional[FreshNames] = None,
    _toplevel: bool = True,
) -> Marking:
    """Testing hypothesis for an assertion that fails at position n.

    Variable-sharing cases follow equality chains transitively by default
    (``var_closure=False`` gives the literal one-step reading).  When the
    minimal-subset enumeration exceeds its budget the marking falls back
    to the variable-sharing closure: strictly more is kept, never less.
    """
    fresh = fresh or FreshNames()
    if _toplevel and eval_assertion(trace, n, f, fresh):
        raise ValueError("symp is defined only for assertions failing at n")
    config = trace.configs[n]
    store = config.store
    solver = solver or store.config
    atoms = list(store.atoms)

    def share(c) -> Marking:
        return Marking(frozenset(sharing_cids(atoms, constraint_vars(c), var_closure)))

    def minimal(c, inconsistent: bool) -> Marking:
        kind = inconsistent_subsets_union if inconsistent else entailing_subsets_union
        try:
            cids = kind(
                atoms,
                c,
                budget=subset_budget,
                solver=solver,
                store_consistent=store.status == "consistent",
            )
            return Marking(frozenset(cids))
        except BudgetExceededError:
            import logging

            logging.getLogger("clpslicer.slicer").warning(
                "minimal-subset budget exceeded; over-approximating by "
                "variable sharing"
            )
            return Marking(
                frozenset(sharing_cids(atoms, constraint_vars(c), True)),
                over_approximated=True,
            )

    def rec(g: Assertion) -> Marking:
        return symp(
            trace, g, n,
            var_closure=var_closure, subset_budget=subset_budget,
            solver=solver, fresh=fresh, _toplevel=False,
        )

    if isinstance(f, Pos):
        return share(f.c)
    if isinstance(f, Neg):
        return minimal(f.c, inconsistent=False)
    if isinstance(f, Cons):
        return minimal(f.c, inconsistent=True)
    if isinstance(f, Icons):
        return share(f.c)
    if isinstance(f, AndA):
        return rec(f.lhs).union(rec(f.rhs))
    if isinstance(f, OrA):
        return rec(f.lhs).intersection(rec(f.rhs))
    if isinstance(f, ImpliesA):
        return rec(negate(f.lhs)).union(rec(f.rhs))
    if isinstance(f, ForAllCalls):
        pids = frozenset(
            pid
            for pid, inst in _call_instances(config, f)
            if not eval_assertion(trace, n, inst, fresh)
        )
        return Marking(pids=pids)
    if isinstance(f, ExistsCall):
        fvars = assertion_vars(f)  # free formals excluded by construction
        cids = frozenset(sharing_cids(atoms, fvars, var_closure))
        pids = frozenset(pid for pid, _ in _call_instances(config, f))
        return Marking(cids, pids)
    raise TypeError(f"not an assertion: {f!r}")
