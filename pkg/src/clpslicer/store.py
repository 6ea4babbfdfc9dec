"""Constraint stores: conjunction sets with hiding, entailment, consistency.

A store holds atomic constraints (each under a stable cid) plus a set of
hidden variable names; the denoted constraint is the existential closure
of the conjunction.  Herbrand equalities are decided by syntactic
unification (occurs-check on by default); finite-domain and linear atoms
by interval/hole propagation plus, when every relevant domain is finite,
exhaustive refutation search under a node budget.

Stores are immutable: ``add`` returns a new value, so snapshots can be
shared freely across derivation branches.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .constraints import (
    Atom,
    Constraint,
    EqC,
    FalseC,
    InDomainC,
    LinRelC,
    TokenC,
    TrueC,
    atomize,
    constraint_vars,
    linear_form,
    negate_rel,
    print_constraint,
    subst_constraint,
)
from .terms import FreshNames, Int, Struct, Subst, Term, Var, _unify_into, deep_walk, unify, walk

log = logging.getLogger("clpslicer.solver")


class BudgetExceededError(RuntimeError):
    """A solver search exceeded its node budget (never a silent answer)."""


@dataclass(frozen=True)
class SolverConfig:
    node_budget: int = 10**6
    occurs_check: bool = True


DEFAULT_CONFIG = SolverConfig()


class _Budget:
    __slots__ = ("left",)

    def __init__(self, n: int) -> None:
        self.left = n

    def spend(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise BudgetExceededError("solver node budget exhausted")


# --- integer domains ------------------------------------------------------

NEG_INF = None  # open bounds are represented by None
POS_INF = None


@dataclass(frozen=True)
class Domain:
    lo: Optional[int] = None
    hi: Optional[int] = None
    holes: frozenset[int] = frozenset()

    def normalized(self) -> "Domain":
        lo, hi, holes = self.lo, self.hi, self.holes
        if lo is not None and hi is not None:
            holes = frozenset(h for h in holes if lo <= h <= hi)
            while lo <= hi and lo in holes:
                lo += 1
            while hi >= lo and hi in holes:
                hi -= 1
            holes = frozenset(h for h in holes if lo <= h <= hi)
        return Domain(lo, hi, holes)

    @property
    def empty(self) -> bool:
        return self.lo is not None and self.hi is not None and self.lo > self.hi

    @property
    def finite(self) -> bool:
        return self.lo is not None and self.hi is not None

    @property
    def fixed(self) -> Optional[int]:
        if self.finite and self.lo == self.hi:
            return self.lo
        return None

    def size(self) -> Optional[int]:
        if not self.finite:
            return None
        return self.hi - self.lo + 1 - len(self.holes)

    def values(self) -> Iterable[int]:
        assert self.finite
        for v in range(self.lo, self.hi + 1):
            if v not in self.holes:
                yield v

    def contains(self, v: int) -> bool:
        if self.lo is not None and v < self.lo:
            return False
        if self.hi is not None and v > self.hi:
            return False
        return v not in self.holes

    def clamp(self, lo: Optional[int] = None, hi: Optional[int] = None) -> "Domain":
        nlo = self.lo if lo is None else (lo if self.lo is None else max(self.lo, lo))
        nhi = self.hi if hi is None else (hi if self.hi is None else min(self.hi, hi))
        return Domain(nlo, nhi, self.holes).normalized()

    def remove(self, v: int) -> "Domain":
        if not self.contains(v):
            return self
        return Domain(self.lo, self.hi, self.holes | {v}).normalized()


FULL_DOMAIN = Domain()


# --- linear atom evaluation ----------------------------------------------

# Internal normal form: ("le", coeffs, k) means sum+k <= 0; ("eq"/"ne", ...)
# mean sum+k = 0 / != 0.

def _norm_rel(op: str, lhs: Term, rhs: Term, subst: Subst):
    lf = linear_form(lhs, subst)
    rf = linear_form(rhs, subst)
    if lf is None or rf is None:
        return None  # non-numeric leaf: the relation is unsatisfiable
    lc, lk = lf
    rc, rk = rf
    coeffs = dict(lc)
    for v, c in rc.items():
        coeffs[v] = coeffs.get(v, 0) - c
    coeffs = {v: c for v, c in coeffs.items() if c != 0}
    k = lk - rk
    if op == "=":
        return ("eq", coeffs, k)
    if op == "\\=":
        return ("ne", coeffs, k)
    if op == "=<":
        return ("le", coeffs, k)
    if op == "<":
        return ("le", coeffs, k + 1)
    if op == ">=":
        return ("le", {v: -c for v, c in coeffs.items()}, -k)
    if op == ">":
        return ("le", {v: -c for v, c in coeffs.items()}, -k + 1)
    raise ValueError(f"unknown relation {op}")


def _term_range(c: int, dom: Domain) -> tuple[Optional[int], Optional[int]]:
    if c > 0:
        lo = None if dom.lo is None else c * dom.lo
        hi = None if dom.hi is None else c * dom.hi
    else:
        lo = None if dom.hi is None else c * dom.hi
        hi = None if dom.lo is None else c * dom.lo
    return lo, hi


def _expr_range(coeffs: dict[str, int], k: int, domains) -> tuple[Optional[int], Optional[int]]:
    lo, hi = k, k
    for v, c in coeffs.items():
        tlo, thi = _term_range(c, domains.get(v, FULL_DOMAIN))
        lo = None if (lo is None or tlo is None) else lo + tlo
        hi = None if (hi is None or thi is None) else hi + thi
    return lo, hi


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


class _FdState:
    """Mutable propagation scratch: domains keyed by mgu-root variable."""

    def __init__(self, subst: Subst, domains: dict[str, Domain]):
        self.subst = subst
        self.domains = dict(domains)
        self.failed = False

    def dom(self, v: str) -> Domain:
        return self.domains.get(v, FULL_DOMAIN)

    def set_dom(self, v: str, d: Domain) -> bool:
        """Returns True when the domain changed; flags failure on empty."""
        d = d.normalized()
        if d.empty:
            self.failed = True
        old = self.domains.get(v, FULL_DOMAIN)
        if d == old:
            return False
        self.domains[v] = d
        return True

    # Each call returns (verdict, changed) with verdict in
    # {"true", "false", "open"}.
    def eval_atom(self, atom: Atom) -> tuple[str, bool]:
        if isinstance(atom, TrueC):
            return "true", False
        if isinstance(atom, FalseC):
            return "false", False
        if isinstance(atom, TokenC):
            return "true", False  # uninterpreted, never conflicts
        if isinstance(atom, EqC):
            return "true", False  # folded into the mgu at add time
        if isinstance(atom, InDomainC):
            t = walk(Var(atom.var), self.subst)
            if isinstance(t, Int):
                return ("true" if atom.lo <= t.value <= atom.hi else "false"), False
            if isinstance(t, Struct):
                return "false", False
            changed = self.set_dom(t.name, self.dom(t.name).clamp(atom.lo, atom.hi))
            return ("false" if self.failed else "true"), changed
        if isinstance(atom, LinRelC):
            norm = _norm_rel(atom.op, atom.lhs, atom.rhs, self.subst)
            if norm is None:
                return "false", False
            return self._eval_norm(norm)
        raise TypeError(f"not an atomic constraint: {atom!r}")

    def _eval_norm(self, norm) -> tuple[str, bool]:
        kind, coeffs, k = norm
        lo, hi = _expr_range(coeffs, k, self.domains)
        if kind == "le":
            if hi is not None and hi <= 0:
                return "true", False
            if lo is not None and lo > 0:
                return "false", False
            return "open", self._tighten_le(coeffs, k)
        if kind == "eq":
            if lo is not None and lo > 0:
                return "false", False
            if hi is not None and hi < 0:
                return "false", False
            if lo == hi == 0:
                return "true", False
            changed = self._tighten_le(coeffs, k)
            changed |= self._tighten_le({v: -c for v, c in coeffs.items()}, -k)
            return ("false" if self.failed else "open"), changed
        if kind == "ne":
            if lo == hi == 0:
                return "false", False
            if (lo is not None and lo > 0) or (hi is not None and hi < 0):
                return "true", False
            unfixed = [(v, c) for v, c in coeffs.items() if self.dom(v).fixed is None]
            if len(unfixed) == 1:
                v, c = unfixed[0]
                s = k + sum(
                    cj * self.dom(vj).fixed for vj, cj in coeffs.items() if vj != v
                )
                if s % c == 0:
                    forbidden = -s // c
                    if not self.dom(v).contains(forbidden):
                        return "true", False
                    if self.dom(v).fixed == forbidden:
                        return "false", False
                    return "open", self.set_dom(v, self.dom(v).remove(forbidden))
                return "true", False
            return "open", False
        raise AssertionError(kind)

    def _tighten_le(self, coeffs: dict[str, int], k: int) -> bool:
        # sum(c_i * v_i) + k <= 0: bound each variable by the extremes of
        # the remaining terms.
        changed = False
        for v, c in coeffs.items():
            rest_lo = k
            for vj, cj in coeffs.items():
                if vj == v:
                    continue
                tlo, _ = _term_range(cj, self.dom(vj))
                if tlo is None:
                    rest_lo = None
                    break
                rest_lo += tlo
            if rest_lo is None:
                continue
            bound = -rest_lo  # c * v <= bound
            if c > 0:
                changed |= self.set_dom(v, self.dom(v).clamp(hi=bound // c))
            else:
                changed |= self.set_dom(v, self.dom(v).clamp(lo=_ceil_div(bound, c)))
            if self.failed:
                return True
        return changed


_MAX_PASSES = 1000


def _propagate(
    numeric: list[Atom],
    subst: Subst,
    domains: dict[str, Domain],
    budget: _Budget,
) -> tuple[Optional[dict[str, Domain]], list[Atom]]:
    """Run to fixpoint; returns (domains, undecided) or (None, []) on failure.

    Interval narrowing alone cannot terminate on contradictory difference
    cycles over unbounded domains (x < y, y <= x walks the bounds down one
    step at a time), so those are decided by a shortest-path closure over
    the difference-shaped constraints; a pass cap guards the rest.
    """
    state = _FdState(subst, domains)
    if not _pairwise_compatible(numeric, subst):
        return None, []
    undecided: list[Atom] = []
    pending = list(numeric)
    closed = False
    passes = 0
    while True:
        passes += 1
        changed_any = False
        undecided = []
        for atom in pending:
            budget.spend()
            verdict, changed = state.eval_atom(atom)
            if verdict == "false" or state.failed:
                return None, []
            if verdict == "open":
                undecided.append(atom)
            changed_any |= changed
        if not changed_any or passes >= _MAX_PASSES:
            if undecided and not closed:
                closed = True
                outcome = _difference_closure(undecided, subst, state)
                if outcome == "unsat":
                    return None, []
                if outcome == "narrowed":
                    pending = list(numeric)
                    continue
            return state.domains, undecided
        # Re-examine everything: a narrowed domain can decide earlier atoms.
        pending = list(numeric)


def _le_forms(numeric: list[Atom], subst: Subst):
    """Every atom as (coeffs, k) meaning sum + k <= 0; eq yields both
    directions, ne yields nothing."""
    out = []
    for atom in numeric:
        if isinstance(atom, InDomainC):
            t = walk(Var(atom.var), subst)
            if isinstance(t, Var):
                out.append(({t.name: 1}, -atom.hi))
                out.append(({t.name: -1}, atom.lo))
            continue
        if not isinstance(atom, LinRelC):
            continue
        norm = _norm_rel(atom.op, atom.lhs, atom.rhs, subst)
        if norm is None:
            continue
        kind, coeffs, k = norm
        if kind == "le":
            out.append((coeffs, k))
        elif kind == "eq":
            out.append((coeffs, k))
            out.append(({v: -c for v, c in coeffs.items()}, -k))
    return out


def _pairwise_compatible(numeric: list[Atom], subst: Subst) -> bool:
    """Reject exact opposite pairs: sum+k <= 0 and -(sum)+k' <= 0 with
    k + k' > 0 have no solution regardless of domains."""
    forms = _le_forms(numeric, subst)
    seen: dict[tuple, int] = {}
    for coeffs, k in forms:
        key = tuple(sorted(coeffs.items()))
        neg_key = tuple(sorted((v, -c) for v, c in coeffs.items()))
        best_neg = seen.get(neg_key)
        if best_neg is not None and k + best_neg > 0:
            return False
        if key not in seen or seen[key] < k:
            seen[key] = k
    # an equality contradicting a disequality on the same linear form
    eqs = set()
    for atom in numeric:
        if isinstance(atom, LinRelC):
            norm = _norm_rel(atom.op, atom.lhs, atom.rhs, subst)
            if norm is None:
                continue
            kind, coeffs, k = norm
            key = (tuple(sorted(coeffs.items())), k)
            neg = (tuple(sorted((v, -c) for v, c in coeffs.items())), -k)
            if kind == "eq":
                eqs.add(key)
                eqs.add(neg)
    for atom in numeric:
        if isinstance(atom, LinRelC):
            norm = _norm_rel(atom.op, atom.lhs, atom.rhs, subst)
            if norm is None:
                continue
            kind, coeffs, k = norm
            if kind == "ne" and (tuple(sorted(coeffs.items())), k) in eqs:
                return False
    return True


_ZERO = ""  # virtual node anchoring absolute bounds


def _difference_closure(undecided: list[Atom], subst: Subst, state: "_FdState") -> str:
    """Shortest-path closure over difference-shaped constraints.

    Returns "unsat" on a negative cycle, "narrowed" when new absolute
    bounds were derived, "open" otherwise.  Complete for conjunctions of
    x - y <= k together with interval bounds.
    """
    edges: dict[tuple[str, str], int] = {}

    def edge(u: str, v: str, k: int) -> None:
        key = (u, v)
        if key not in edges or edges[key] > k:
            edges[key] = k

    nodes: set[str] = {_ZERO}
    for coeffs, k in _le_forms(undecided, subst):
        items = sorted(coeffs.items())
        if len(items) == 1:
            (v, c) = items[0]
            nodes.add(v)
            if c == 1:
                edge(v, _ZERO, -k)  # v <= -k
            elif c == -1:
                edge(_ZERO, v, -k)  # -v <= -k, i.e. v >= k
        elif len(items) == 2:
            (u, cu), (v, cv) = items
            if cu == 1 and cv == -1:
                nodes.add(u), nodes.add(v)
                edge(u, v, -k)  # u - v <= -k
            elif cu == -1 and cv == 1:
                nodes.add(u), nodes.add(v)
                edge(v, u, -k)
    for v in list(nodes):
        if v == _ZERO:
            continue
        dom = state.dom(v)
        if dom.hi is not None:
            edge(v, _ZERO, dom.hi)
        if dom.lo is not None:
            edge(_ZERO, v, -dom.lo)
    order = sorted(nodes)
    dist = {(u, v): (0 if u == v else None) for u in order for v in order}
    for (u, v), k in edges.items():
        cur = dist[(u, v)]
        if cur is None or cur > k:
            dist[(u, v)] = k
    for w in order:
        for u in order:
            duw = dist[(u, w)]
            if duw is None:
                continue
            for v in order:
                dwv = dist[(w, v)]
                if dwv is None:
                    continue
                cur = dist[(u, v)]
                if cur is None or duw + dwv < cur:
                    dist[(u, v)] = duw + dwv
    for u in order:
        if dist[(u, u)] < 0:
            return "unsat"
    # a disequality whose difference the closure pins to the forbidden value
    for atom in undecided:
        if not isinstance(atom, LinRelC):
            continue
        norm = _norm_rel(atom.op, atom.lhs, atom.rhs, subst)
        if norm is None or norm[0] != "ne":
            continue
        _, coeffs, k = norm
        items = sorted(coeffs.items())
        pair: Optional[tuple[str, str]] = None
        if len(items) == 1 and items[0][1] in (1, -1):
            v, c = items[0]
            pair = (v, _ZERO) if c == 1 else (_ZERO, v)
            if c == -1:
                k = -k
        elif len(items) == 2:
            (u, cu), (v, cv) = items
            if cu == 1 and cv == -1:
                pair = (u, v)
            elif cu == -1 and cv == 1:
                pair = (v, u)
                k = -k
        if pair is None or pair[0] not in nodes or pair[1] not in nodes:
            continue
        hi = dist.get((pair[0], pair[1]))
        lo_neg = dist.get((pair[1], pair[0]))
        if hi is not None and lo_neg is not None and hi == -lo_neg == -k:
            return "unsat"  # the difference equals the excluded value
    narrowed = False
    for v in order:
        if v == _ZERO:
            continue
        hi = dist[(v, _ZERO)]
        lo = dist[(_ZERO, v)]
        dom = state.dom(v)
        new = dom
        if hi is not None:
            new = new.clamp(hi=hi)
        if lo is not None:
            new = new.clamp(lo=-lo)
        if new != dom:
            narrowed = True
            state.set_dom(v, new)
            if state.failed:
                return "unsat"
    return "narrowed" if narrowed else "open"


def _atom_vars_after_walk(atom: Atom, subst: Subst) -> set[str]:
    from .terms import term_vars

    out: set[str] = set()
    for name in constraint_vars(atom):
        out |= term_vars(deep_walk(Var(name), subst))
    return out


def _search(
    numeric: list[Atom],
    subst: Subst,
    domains: dict[str, Domain],
    undecided: list[Atom],
    budget: _Budget,
) -> Optional[dict[str, int]]:
    """Exhaustive search over the finite domains of undecided atoms.

    Returns a satisfying assignment (for the searched variables) or None.
    Precondition: every variable of every undecided atom has a finite
    domain.
    """
    if not undecided:
        return {v: d.fixed for v, d in domains.items() if d.fixed is not None}
    vars_open = sorted(
        {v for a in undecided for v in _atom_vars_after_walk(a, subst)
         if domains.get(v, FULL_DOMAIN).fixed is None},
        key=lambda v: (domains.get(v, FULL_DOMAIN).size() or 0, v),
    )
    if not vars_open:
        return None  # undecided atoms but nothing to branch on: no model
    v = vars_open[0]
    for val in domains.get(v, FULL_DOMAIN).values():
        budget.spend()
        trial = dict(domains)
        trial[v] = Domain(val, val)
        nd, nu = _propagate(numeric, subst, trial, budget)
        if nd is None:
            continue
        found = _search(numeric, subst, nd, nu, budget)
        if found is not None:
            return found
    return None


def _witness_satisfies(
    atoms: list[Atom], subst: Subst, witness: dict[str, int]
) -> bool:
    dom = {v: Domain(val, val) for v, val in witness.items()}
    state = _FdState(subst, dom)
    for atom in atoms:
        verdict, _ = state.eval_atom(atom)
        if verdict != "true":
            return False
    return True


# --- the store ------------------------------------------------------------

CONSISTENT = "consistent"
INCONSISTENT = "inconsistent"


@dataclass(frozen=True, eq=False)
class Store:
    atoms: tuple[tuple[int, Atom], ...] = ()
    hidden: frozenset[str] = frozenset()
    status: str = CONSISTENT
    config: SolverConfig = DEFAULT_CONFIG
    next_cid: int = 1
    # solved-form caches (internal)
    subst: Subst = field(default_factory=dict)
    domains: dict[str, Domain] = field(default_factory=dict)
    witness: Optional[dict[str, int]] = None
    approximate: bool = False  # consistency relied on an unbounded domain

    @staticmethod
    def empty(config: SolverConfig = DEFAULT_CONFIG) -> "Store":
        return Store(config=config)

    # -- views ------------------------------------------------------------

    def atom_list(self) -> list[Atom]:
        return [a for _, a in self.atoms]

    def atom_by_cid(self) -> dict[int, Atom]:
        return {cid: a for cid, a in self.atoms}

    def cids(self) -> list[int]:
        return [cid for cid, _ in self.atoms]

    def free_vars(self) -> set[str]:
        out: set[str] = set()
        for _, a in self.atoms:
            out |= constraint_vars(a)
        return out - self.hidden

    def all_vars(self) -> set[str]:
        out: set[str] = set()
        for _, a in self.atoms:
            out |= constraint_vars(a)
        return out

    def numeric_atoms(self) -> list[Atom]:
        return [a for _, a in self.atoms if isinstance(a, (InDomainC, LinRelC))]

    # -- construction -------------------------------------------------------

    def add(self, atom: Atom, cid: Optional[int] = None) -> "Store":
        """Insert an atomic constraint under a fresh cid and re-decide status.

        Inconsistency is a value, not an error: the returned store carries
        ``status == "inconsistent"`` and keeps all atoms.
        """
        if cid is None:
            cid = self.next_cid
        new_atoms = self.atoms + ((cid, atom),)
        next_cid = max(self.next_cid, cid + 1)
        if self.status == INCONSISTENT:
            return replace(self, atoms=new_atoms, next_cid=next_cid)
        budget = _Budget(self.config.node_budget)

        if isinstance(atom, FalseC):
            return replace(
                self, atoms=new_atoms, next_cid=next_cid, status=INCONSISTENT
            )
        if isinstance(atom, (TrueC, TokenC)):
            return replace(self, atoms=new_atoms, next_cid=next_cid)

        subst = self.subst
        if isinstance(atom, EqC):
            subst = unify(atom.lhs, atom.rhs, subst, self.config.occurs_check)
            if subst is None:
                return replace(
                    self, atoms=new_atoms, next_cid=next_cid, status=INCONSISTENT
                )

        domains = _rekey_domains(self.domains, subst)
        if domains is None:
            return replace(
                self, atoms=new_atoms, next_cid=next_cid, status=INCONSISTENT,
                subst=subst,
            )

        numeric = [a for _, a in new_atoms if isinstance(a, (InDomainC, LinRelC))]
        domains, undecided = _propagate(numeric, subst, domains, budget)
        if domains is None:
            return replace(
                self, atoms=new_atoms, next_cid=next_cid, status=INCONSISTENT,
                subst=subst,
            )

        witness, approx = self._decide(numeric, subst, domains, undecided, budget)
        status = CONSISTENT if (witness is not None or approx or not undecided) else INCONSISTENT
        return replace(
            self,
            atoms=new_atoms,
            next_cid=next_cid,
            status=status,
            subst=subst,
            domains=domains,
            witness=witness,
            approximate=approx,
        )

    def _decide(self, numeric, subst, domains, undecided, budget):
        """Exact satisfiability where domains permit; approximate otherwise."""
        if not undecided:
            return (self.witness or {}), False
        if self.witness is not None and _witness_satisfies(undecided, subst, self.witness):
            return self.witness, False
        open_vars = {v for a in undecided for v in _atom_vars_after_walk(a, subst)}
        if all(domains.get(v, FULL_DOMAIN).finite for v in open_vars):
            found = _search(numeric, subst, domains, undecided, budget)
            return found, False
        log.debug(
            "consistency undecidable without finite domains; assuming consistent"
        )
        return None, True

    def add_many(self, atoms: Iterable[Atom]) -> tuple["Store", list[int]]:
        store = self
        cids = []
        for a in atoms:
            cid = store.next_cid
            store = store.add(a, cid)
            cids.append(cid)
        return store, cids

    def hide(self, names: Iterable[str]) -> "Store":
        """Quantify more variables; atoms are untouched."""
        return replace(self, hidden=self.hidden | frozenset(names))

    # -- decision procedures ------------------------------------------------

    def consistent_with(self, c: Constraint, fresh: Optional[FreshNames] = None) -> bool:
        """True iff adding the atomization of ``c`` stays satisfiable."""
        if self.status == INCONSISTENT:
            return False
        goal_atoms, _ = atomize(c, fresh or self._default_fresh(c), self.subst)
        base = self._renamed_for(goal_atoms)
        trial, _ = base.add_many(goal_atoms)
        return trial.status == CONSISTENT

    def entails(self, c: Constraint, fresh: Optional[FreshNames] = None) -> bool:
        """True iff the existential closure of this store entails ``c``.

        Herbrand equality goals are decided through the accumulated mgu;
        FD/linear goals by refutation (propagation, then exhaustive search
        when all relevant domains are finite).  When a goal variable has
        an unbounded domain the answer is False with a diagnostic: sound,
        not complete.
        """
        if self.status == INCONSISTENT:
            return True
        fresh = fresh or self._default_fresh(c)
        goal_atoms, match_vars = atomize(c, fresh, self.subst)
        base = self._renamed_for(goal_atoms)
        env: Subst = {}
        matchable = set(match_vars)
        for atom in goal_atoms:
            if not base._entails_atom(atom, env, matchable, fresh):
                return False
        return True

    def _default_fresh(self, c: Constraint) -> FreshNames:
        fresh = FreshNames()
        fresh.reserve_all(self.all_vars() | constraint_vars(c))
        return fresh

    def _renamed_for(self, goal_atoms: list[Atom]) -> "Store":
        """Rename hidden variables that collide with the goal's free ones."""
        goal_vars: set[str] = set()
        for a in goal_atoms:
            goal_vars |= constraint_vars(a)
        clash = self.hidden & goal_vars
        if not clash:
            return self
        ren = FreshNames()
        ren.reserve_all(self.all_vars() | goal_vars)
        mapping = {v: ren.fresh_var(v) for v in clash}
        renamed = Store.empty(self.config)
        renamed = replace(renamed, hidden=(self.hidden - clash) | {v.name for v in mapping.values()})
        for cid, a in self.atoms:
            renamed = renamed.add(subst_constraint(a, mapping), cid)
        return renamed

    def _entails_atom(self, atom: Atom, env: Subst, matchable: set[str], fresh: FreshNames) -> bool:
        if isinstance(atom, TrueC):
            return True
        if isinstance(atom, FalseC):
            return False
        if isinstance(atom, EqC):
            return self._entails_eq(atom.lhs, atom.rhs, env, matchable)
        if isinstance(atom, TokenC):
            return self._entails_token(atom, env, matchable)
        if isinstance(atom, InDomainC):
            t = self._walk2(Var(atom.var), env)
            if isinstance(t, Int):
                return atom.lo <= t.value <= atom.hi
            if isinstance(t, Struct):
                return False
            if t.name in matchable and t.name not in env:
                if atom.lo > atom.hi:
                    return False
                env[t.name] = Int(atom.lo)  # any witness will do
                return True
            if not self._forced_numeric(t):
                return False
            return self._refute(LinRelC("<", t, Int(atom.lo))) and self._refute(
                LinRelC(">", t, Int(atom.hi))
            )
        if isinstance(atom, LinRelC):
            lhs = deep_walk(atom.lhs, env) if env else atom.lhs
            rhs = deep_walk(atom.rhs, env) if env else atom.rhs
            for name in constraint_vars(LinRelC(atom.op, lhs, rhs)):
                if not self._forced_numeric(walk(Var(name), self.subst)):
                    return False
            return self._refute(LinRelC(negate_rel(atom.op), lhs, rhs))
        raise TypeError(f"not an atomic constraint: {atom!r}")

    def _forced_numeric(self, t: Term) -> bool:
        """Is the term integer-valued in every model of this store?

        Arithmetic atoms are false on non-numeric values, so a variable
        occurring in one can only take integer values; without such a
        constraint an arithmetic goal on it cannot be entailed (this keeps
        entailment below consistency, as in pos(c) implying cons(c)).
        """
        t = walk(t, self.subst)
        if isinstance(t, Int):
            return True
        if isinstance(t, Struct):
            return False
        roots = self._numeric_roots()
        return t.name in roots

    def _numeric_roots(self) -> set[str]:
        roots: set[str] = set()
        for atom in self.numeric_atoms():
            roots |= _atom_vars_after_walk(atom, self.subst)
        return roots

    def _walk2(self, t: Term, env: Subst) -> Term:
        # Walk through the match environment and the store mgu alternately.
        while isinstance(t, Var):
            if t.name in env:
                t = env[t.name]
            elif t.name in self.subst:
                t = self.subst[t.name]
            else:
                return t
        return t

    def _entails_eq(self, a: Term, b: Term, env: Subst, matchable: set[str]) -> bool:
        a = self._walk2(a, env)
        b = self._walk2(b, env)
        if a == b:
            return True
        if isinstance(a, Var) and a.name in matchable:
            env[a.name] = b
            return True
        if isinstance(b, Var) and b.name in matchable:
            env[b.name] = a
            return True
        if isinstance(a, Struct) and isinstance(b, Struct):
            if a.functor != b.functor or a.arity != b.arity:
                return False
            return all(
                self._entails_eq(x, y, env, matchable) for x, y in zip(a.args, b.args)
            )
        if isinstance(a, Int) and isinstance(b, Int):
            return a.value == b.value
        if isinstance(a, Struct) or isinstance(b, Struct):
            return False
        # variable vs integer or variable vs variable: decide numerically
        return self._refute(LinRelC("\\=", a, b))

    def _entails_token(self, goal: TokenC, env: Subst, matchable: set[str]) -> bool:
        for _, a in self.atoms:
            if not isinstance(a, TokenC):
                continue
            if a.functor != goal.functor or len(a.args) != len(goal.args):
                continue
            trial = dict(env)
            if all(
                self._entails_eq_strict(x, y, trial, matchable)
                for x, y in zip(goal.args, a.args)
            ):
                env.update(trial)
                return True
        return False

    def _entails_eq_strict(self, a: Term, b: Term, env: Subst, matchable: set[str]) -> bool:
        # Token arguments must match syntactically modulo mgu and witnesses.
        a = self._walk2(a, env)
        b = self._walk2(b, env)
        if a == b:
            return True
        if isinstance(a, Var) and a.name in matchable:
            env[a.name] = b
            return True
        if isinstance(a, Struct) and isinstance(b, Struct):
            if a.functor != b.functor or a.arity != b.arity:
                return False
            return all(
                self._entails_eq_strict(x, y, env, matchable)
                for x, y in zip(a.args, b.args)
            )
        if isinstance(a, Int) and isinstance(b, Int):
            return a.value == b.value
        return False

    def _refute(self, negated: LinRelC) -> bool:
        """True iff this store conjoined with ``negated`` is unsatisfiable."""
        budget = _Budget(self.config.node_budget)
        numeric = self.numeric_atoms() + [negated]
        domains, undecided = _propagate(numeric, self.subst, dict(self.domains), budget)
        if domains is None:
            return True
        if not undecided:
            return False
        open_vars = {v for a in undecided for v in _atom_vars_after_walk(a, self.subst)}
        if all(domains.get(v, FULL_DOMAIN).finite for v in open_vars):
            return _search(numeric, self.subst, domains, undecided, budget) is None
        log.debug(
            "entailment unknown: unbounded domain for %s; answering 'not entailed'",
            sorted(v for v in open_vars if not domains.get(v, FULL_DOMAIN).finite),
        )
        return False

    # -- rendering ----------------------------------------------------------

    def print_atoms(self) -> str:
        if not self.atoms:
            return "t"
        return ", ".join(print_constraint(a) for _, a in self.atoms)


def build_store(
    atoms: Iterable[Atom],
    hidden: Iterable[str] = (),
    config: SolverConfig = DEFAULT_CONFIG,
) -> Store:
    """Construct a store from atoms in one pass.

    Semantically identical to folding ``add`` over the atoms (same status,
    same solved form), but with a single propagation fixpoint and a single
    decision; the fast path for the subset tests of minimal-set search.
    """
    atom_tuple = tuple((i + 1, a) for i, a in enumerate(atoms))
    hidden_set = frozenset(hidden)
    next_cid = len(atom_tuple) + 1
    subst: Subst = {}
    numeric: list[Atom] = []
    failed = False
    for _, atom in atom_tuple:
        if isinstance(atom, FalseC):
            failed = True
            break
        if isinstance(atom, EqC):
            if not _unify_into(atom.lhs, atom.rhs, subst, config.occurs_check):
                failed = True
                break
        elif isinstance(atom, (InDomainC, LinRelC)):
            numeric.append(atom)
    if failed:
        return Store(
            atoms=atom_tuple, hidden=hidden_set, status=INCONSISTENT,
            config=config, next_cid=next_cid, subst=subst,
        )
    budget = _Budget(config.node_budget)
    domains, undecided = _propagate(numeric, subst, {}, budget)
    if domains is None:
        return Store(
            atoms=atom_tuple, hidden=hidden_set, status=INCONSISTENT,
            config=config, next_cid=next_cid, subst=subst,
        )
    witness: Optional[dict[str, int]] = {}
    approx = False
    if undecided:
        open_vars = {v for a in undecided for v in _atom_vars_after_walk(a, subst)}
        if all(domains.get(v, FULL_DOMAIN).finite for v in open_vars):
            witness = _search(numeric, subst, domains, undecided, budget)
            approx = False
        else:
            witness = None
            approx = True
    status = CONSISTENT if (witness is not None or approx) else INCONSISTENT
    return Store(
        atoms=atom_tuple, hidden=hidden_set, status=status, config=config,
        next_cid=next_cid, subst=subst, domains=domains, witness=witness,
        approximate=approx,
    )


def _rekey_domains(domains: dict[str, Domain], subst: Subst) -> Optional[dict[str, Domain]]:
    """Re-anchor domain entries after the mgu grew; None on contradiction."""
    out: dict[str, Domain] = {}
    for name, dom in domains.items():
        t = walk(Var(name), subst)
        if isinstance(t, Int):
            if not dom.contains(t.value):
                return None
            continue
        if isinstance(t, Struct):
            return None  # a compound cannot take an integer value
        cur = out.get(t.name)
        merged = dom if cur is None else Domain(
            dom.lo if cur.lo is None else (cur.lo if dom.lo is None else max(cur.lo, dom.lo)),
            dom.hi if cur.hi is None else (cur.hi if dom.hi is None else min(cur.hi, dom.hi)),
            dom.holes | cur.holes,
        ).normalized()
        if merged.empty:
            return None
        out[t.name] = merged
    return out


def store_from_atoms(
    atoms: Iterable[Atom],
    hidden: Iterable[str] = (),
    config: SolverConfig = DEFAULT_CONFIG,
) -> Store:
    return build_store(atoms, hidden, config)
