"""Backward trace slicing: markings, the trace slicer and its helpers.

Starting from a marking of the final configuration, the slicer walks the
trace backward, accumulating replacing substitutions that rewrite agents
to the irrelevant-placeholder (printed ``*``) or to partially kept forms
such as ``ask c then (P || *) + *``, and growing the relevant-constraint
set with the set-minimal support of every kept ask guard.  Surviving
elements keep their original pids/cids, so slices stay provenance-linked
and can themselves be sliced again.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

from .assertions import Marking
from .constraints import Atom, Constraint, TrueC, constraint_vars, print_constraint
from .engine import (
    Configuration,
    Trace,
    TransitionLabel,
    print_agent,
)
from .minimal import entailing_subsets_union, sharing_cids
from .store import BudgetExceededError, SolverConfig, DEFAULT_CONFIG
from .syntax import (
    Call,
    CallLit,
    ConstraintLit,
    Literal,
    Local,
    Process,
    Sum,
    Tell,
    literal_vars,
    process_free_vars,
)

log = logging.getLogger("clpslicer.slicer")


class MarkingError(ValueError):
    def __init__(self, unknown_cids, unknown_pids):
        self.unknown_cids = sorted(unknown_cids)
        self.unknown_pids = sorted(unknown_pids)
        parts = []
        if self.unknown_cids:
            parts.append(f"unknown constraint ids: {self.unknown_cids}")
        if self.unknown_pids:
            parts.append(f"unknown process ids: {self.unknown_pids}")
        super().__init__("; ".join(parts))


class SliceError(ValueError):
    pass


# --- sliced fragments -------------------------------------------------------


@dataclass(frozen=True)
class FKeep:
    agent: Union[Process, Literal]


@dataclass(frozen=True)
class FDot:
    pass


DOT = FDot()


@dataclass(frozen=True)
class FTell:
    # one entry per atom the tell contributed: (cid, atom) kept, None dotted
    items: tuple[Optional[tuple[int, Atom]], ...]
    ex_vars: tuple[str, ...] = ()


@dataclass(frozen=True)
class FSum:
    n_branches: int
    k: int  # 1-based chosen branch
    guard: Constraint
    body: tuple[tuple[int, "Frag"], ...]  # residual agents of the branch


@dataclass(frozen=True)
class FLocal:
    var: str
    body: tuple[tuple[int, "Frag"], ...]


Frag = Union[FKeep, FDot, FTell, FSum, FLocal]


def frag_is_dot(frag: Frag) -> bool:
    return isinstance(frag, FDot)


def frag_vars(frag: Frag) -> set[str]:
    if isinstance(frag, FKeep):
        if isinstance(frag.agent, (ConstraintLit, CallLit)):
            return literal_vars(frag.agent)
        return process_free_vars(frag.agent)
    if isinstance(frag, FDot):
        return set()
    if isinstance(frag, FTell):
        out: set[str] = set()
        for item in frag.items:
            if item is not None:
                out |= constraint_vars(item[1])
        return out - set(frag.ex_vars)
    if isinstance(frag, FSum):
        out = constraint_vars(frag.guard)
        for _, f in frag.body:
            out |= frag_vars(f)
        return out
    if isinstance(frag, FLocal):
        out = set()
        for _, f in frag.body:
            out |= frag_vars(f)
        return out - {frag.var}
    raise TypeError(f"not a fragment: {frag!r}")


# --- trace views -------------------------------------------------------------


@dataclass(eq=False)
class ConfigView:
    hidden: frozenset[str]
    agents: tuple[tuple[int, Frag], ...]
    atoms: tuple[tuple[int, Atom], ...]
    store_status: str

    def agent(self, pid: int) -> Frag:
        for p, f in self.agents:
            if p == pid:
                return f
        raise SliceError(f"trace label references pid {pid} absent from its source configuration")


@dataclass(eq=False)
class SlicedTrace:
    """A trace whose configurations may contain placeholder fragments."""

    mode: str
    views: list[ConfigView]
    labels: list[TransitionLabel]
    marking: Marking
    verdict: str
    over_approximated: bool = False
    meta: dict = field(default_factory=dict)
    # relevant-set snapshot per configuration (grows as l decreases)
    relevant_progress: list[frozenset[int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.views)


def _views_of(trace: Union[Trace, SlicedTrace]) -> tuple[list[ConfigView], list[TransitionLabel], str, str]:
    if isinstance(trace, SlicedTrace):
        return trace.views, trace.labels, trace.mode, trace.verdict
    views = []
    for config in trace.configs:
        views.append(
            ConfigView(
                hidden=config.hidden,
                agents=tuple((pid, FKeep(agent)) for pid, agent in config.agents),
                atoms=config.store.atoms,
                store_status=config.store.status,
            )
        )
    return views, trace.labels, trace.mode, trace.verdict


# --- marking -----------------------------------------------------------------

CRITERIA = ("explicit", "vars", "entails", "inconsistent")


def mark(
    final: Union[Configuration, ConfigView],
    criterion: str,
    *,
    cids: Optional[list[int]] = None,
    pids: Optional[list[int]] = None,
    variables: Optional[list[str]] = None,
    constraint: Optional[Constraint] = None,
    var_closure: bool = True,
    subset_budget: int = 10**6,
    solver: SolverConfig = DEFAULT_CONFIG,
) -> Marking:
    """Build a marking of the final configuration from one of the four
    criteria: explicit causality selection, variable dependencies,
    an unexpected entailed constraint, or inconsistency with a spec."""
    if isinstance(final, Configuration):
        atoms = final.store.atoms
        agent_pids = {pid for pid, _ in final.agents}
        consistent = final.store.status == "consistent"
    else:
        atoms = final.atoms
        agent_pids = {pid for pid, _ in final.agents}
        consistent = final.store_status == "consistent"
    known_cids = {cid for cid, _ in atoms}

    marked_pids = frozenset(pids or ())
    unknown_pids = set(marked_pids) - agent_pids
    over = False

    if criterion == "explicit":
        chosen = frozenset(cids or ())
        unknown_cids = set(chosen) - known_cids
        if unknown_cids or unknown_pids:
            raise MarkingError(unknown_cids, unknown_pids)
        return Marking(chosen, marked_pids)
    if unknown_pids:
        raise MarkingError(set(), unknown_pids)
    if criterion == "vars":
        if not variables:
            raise SliceError("criterion 'vars' needs a variable list")
        chosen = frozenset(sharing_cids(atoms, set(variables), var_closure))
        return Marking(chosen, marked_pids)
    if criterion in ("entails", "inconsistent"):
        if constraint is None:
            raise SliceError(f"criterion '{criterion}' needs a constraint")
        from .minimal import inconsistent_subsets_union

        fn = (
            entailing_subsets_union
            if criterion == "entails"
            else inconsistent_subsets_union
        )
        try:
            chosen = frozenset(
                fn(
                    list(atoms),
                    constraint,
                    budget=subset_budget,
                    solver=solver,
                    store_consistent=consistent,
                )
            )
        except BudgetExceededError:
            log.warning(
                "marking enumeration budget exceeded; over-approximating by "
                "variable sharing"
            )
            chosen = frozenset(
                sharing_cids(atoms, constraint_vars(constraint), True)
            )
            over = True
        return Marking(chosen, marked_pids, over_approximated=over)
    raise SliceError(f"unknown marking criterion {criterion!r}")


# --- S_minimal ---------------------------------------------------------------


def s_minimal(
    atoms: list[tuple[int, Atom]],
    c: Optional[Constraint],
    *,
    subset_budget: int = 10**6,
    solver: SolverConfig = DEFAULT_CONFIG,
) -> tuple[set[int], bool]:
    """Union of all set-minimal subsets entailing c; empty for c = t.

    Returns (cids, over_approximated): on budget exhaustion the
    variable-sharing closure is returned instead, keeping more, never
    less, so slices stay conservative.
    """
    if c is None or isinstance(c, TrueC):
        return set(), False
    try:
        return (
            entailing_subsets_union(
                list(atoms), c, budget=subset_budget, solver=solver
            ),
            False,
        )
    except BudgetExceededError:
        log.warning(
            "S_minimal budget exceeded; over-approximating by variable sharing"
        )
        return set(sharing_cids(atoms, constraint_vars(c), True)), True


# --- the backward slicer ------------------------------------------------------


def slice_trace(
    trace: Union[Trace, SlicedTrace],
    marking: Marking,
    *,
    subset_budget: int = 10**6,
    solver: SolverConfig = DEFAULT_CONFIG,
) -> SlicedTrace:
    """Backward trace slicer.

    The replacing substitution starts by dotting every unmarked final
    agent; walking the labels backward, each step contributes its
    replacement and, for kept choices, the minimal store support of
    their guard.
    """
    views, labels, mode, verdict = _views_of(trace)
    n = len(views) - 1
    final = views[n]

    known_cids = {cid for cid, _ in final.atoms}
    unknown_cids = set(marking.cids) - known_cids
    unknown_pids = set(marking.pids) - {pid for pid, _ in final.agents}
    if unknown_cids or unknown_pids:
        raise MarkingError(unknown_cids, unknown_pids)

    # cids are unique across the trace; sliced inputs may retain atoms in
    # earlier views that the final view filtered out
    atom_of: dict[int, Atom] = {}
    for view in views:
        atom_of.update(view.atoms)
    theta: dict[int, Frag] = {
        pid: DOT for pid, _ in final.agents if pid not in marking.pids
    }
    relevant: set[int] = set(marking.cids)
    over = marking.over_approximated

    marked_agent_vars: set[str] = set()
    for pid, frag in final.agents:
        if pid in marking.pids:
            marked_agent_vars |= frag_vars(frag)

    def make_view(view: ConfigView) -> ConfigView:
        rel_vars = set(marked_agent_vars)
        for cid in relevant:
            rel_vars |= constraint_vars(atom_of[cid])
        return ConfigView(
            hidden=view.hidden & frozenset(rel_vars),
            agents=tuple((pid, theta.get(pid, frag)) for pid, frag in view.agents),
            atoms=tuple((cid, a) for cid, a in view.atoms if cid in relevant),
            store_status=view.store_status,
        )

    out: list[Optional[ConfigView]] = [None] * (n + 1)
    progress: list[frozenset[int]] = [frozenset()] * (n + 1)
    out[n] = make_view(final)
    progress[n] = frozenset(relevant)
    for l in range(n - 1, -1, -1):
        label = labels[l]
        theta_new, guard = slice_process(views[l], views[l + 1], label, theta, relevant)
        grown, over_here = s_minimal(
            list(views[l].atoms), guard, subset_budget=subset_budget, solver=solver
        )
        relevant |= grown
        over = over or over_here
        theta.update(theta_new)
        out[l] = make_view(views[l])
        progress[l] = frozenset(relevant)

    return SlicedTrace(
        mode=mode,
        views=[v for v in out if v is not None],
        labels=list(labels),
        marking=marking,
        verdict=verdict,
        over_approximated=over,
        meta=dict(getattr(trace, "meta", {})),
        relevant_progress=progress,
    )


def slice_constraints(
    added: list[tuple[int, Atom]],
    relevant: set[int],
    ex_vars: tuple[str, ...] = (),
) -> Frag:
    """Slice the contribution of one tell step.

    Atoms outside the relevant set are replaced by the placeholder; when
    nothing survives the whole contribution collapses to it (also under
    an existential prefix).
    """
    items: list[Optional[tuple[int, Atom]]] = [
        (cid, atom) if cid in relevant else None for cid, atom in added
    ]
    if all(item is None for item in items):
        return DOT
    return FTell(tuple(items), ex_vars)


def slice_process(
    gamma: ConfigView,
    psi: ConfigView,
    label: TransitionLabel,
    theta: dict[int, Frag],
    relevant: set[int],
) -> tuple[dict[int, Frag], Optional[Constraint]]:
    """One backward step: the replacement for the reduced agent plus the
    guard whose support must join the relevant set (asks only)."""
    i = label.pid
    frag = gamma.agent(i)
    psi_atoms = dict(psi.atoms)

    def child(pid: int) -> Frag:
        got = theta.get(pid)
        if got is not None:
            return got
        return psi.agent(pid)

    children = tuple((pid, child(pid)) for pid in label.children)
    all_dot = all(frag_is_dot(f) for _, f in children)

    if isinstance(frag, FDot):
        return {i: DOT}, None

    kind = _frag_kind(frag)

    if kind == "tell":
        added = [
            (cid, psi_atoms[cid]) for cid in label.added_cids if cid in psi_atoms
        ]
        sliced = slice_constraints(added, relevant, label.new_hidden)
        return {i: sliced}, None

    if kind == "sum":
        guard, n_branches = _sum_guard(frag, label.branch)
        if all_dot and not children:
            return {i: DOT}, None
        if all_dot:
            return {i: DOT}, None
        return {i: FSum(n_branches, label.branch, guard, children)}, guard

    if kind == "local":
        if not label.new_hidden:
            raise SliceError("local step without a created variable")
        if all_dot:
            return {i: DOT}, None
        return {i: FLocal(label.new_hidden[0], children)}, None

    if kind == "call":
        if all_dot:
            return {i: DOT}, None
        return {}, None

    if kind == "labeling":
        kept_atom = any(cid in relevant for cid in label.added_cids)
        if all_dot and not kept_atom:
            return {i: DOT}, None
        return {}, None

    if kind == "clause":
        # CLP clause selection: keep the atom verbatim when anything of
        # its unfolding survives (the blind-choice analogue of the Call
        # case; the guard is t).
        if all_dot:
            return {i: DOT}, None
        return {}, None

    raise SliceError(f"cannot slice a step reducing {frag!r}")


def _frag_kind(frag: Frag) -> str:
    if isinstance(frag, FTell):
        return "tell"
    if isinstance(frag, FSum):
        return "sum"
    if isinstance(frag, FLocal):
        return "local"
    if isinstance(frag, FKeep):
        agent = frag.agent
        if isinstance(agent, Tell):
            return "tell"
        if isinstance(agent, Sum):
            return "sum"
        if isinstance(agent, Local):
            return "local"
        if isinstance(agent, Call):
            return "call"
        if isinstance(agent, ConstraintLit):
            return "tell"
        if isinstance(agent, CallLit):
            from .engine import LABELING_NAMES

            return "labeling" if agent.name in LABELING_NAMES else "clause"
    raise SliceError(f"unsliceable agent {frag!r}")


def _sum_guard(frag: Frag, branch: Optional[int]) -> tuple[Constraint, int]:
    if branch is None:
        raise SliceError("choice step without a recorded branch")
    if isinstance(frag, FSum):
        return frag.guard, frag.n_branches
    agent = frag.agent  # type: ignore[union-attr]
    guards = agent.branches
    return guards[branch - 1][0], len(guards)


# --- rendering ----------------------------------------------------------------


def render_frag(frag: Frag) -> str:
    if isinstance(frag, FKeep):
        return print_agent(frag.agent)
    if isinstance(frag, FDot):
        return "*"
    if isinstance(frag, FTell):
        inner = " /\\ ".join(
            "*" if item is None else print_constraint(item[1]) for item in frag.items
        )
        if frag.ex_vars:
            inner = f"exists {' '.join(frag.ex_vars)}. {inner}"
        return f"tell({inner})"
    if isinstance(frag, FSum):
        body = _render_body(frag.body)
        parts = ["*"] * frag.n_branches
        parts[frag.k - 1] = f"ask {print_constraint(frag.guard)} then {body}"
        return " + ".join(parts)
    if isinstance(frag, FLocal):
        return f"local {frag.var} in ({_render_body(frag.body)})"
    raise TypeError(f"not a fragment: {frag!r}")


def _render_body(body: tuple[tuple[int, Frag], ...]) -> str:
    if not body:
        return "*"
    rendered = " || ".join(render_frag(f) for _, f in body)
    if len(body) > 1:
        return f"({rendered})"
    return rendered


def render_view(view: ConfigView) -> str:
    hidden = " ".join(sorted(view.hidden)) if view.hidden else "0"
    agents = " || ".join(render_frag(f) for _, f in view.agents) or "[]"
    if view.store_status == "inconsistent":
        store = "f"
    else:
        store = ", ".join(print_constraint(a) for _, a in view.atoms) or "t"
    return f"[{hidden} ; {agents} ; {store}]"


def render_sliced(trace: SlicedTrace) -> str:
    return " ->\n".join(render_view(v) for v in trace.views)
