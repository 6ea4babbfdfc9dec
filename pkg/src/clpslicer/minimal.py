"""Set-minimal subset enumeration over store atoms.

Used for the "unexpected behavior" / "inconsistent output" markings and
for the slicer's relevant-constraint growth: the union of all set-minimal
subsets whose conjunction passes a monotone test (entails c, or is
inconsistent with c).  Enumeration is cardinality-ascending with
superset pruning under an explicit budget; exceeding the budget raises,
so callers can over-approximate instead of silently answering wrong.
"""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Iterable, Optional

from .constraints import Atom, Constraint, TokenC, constraint_vars
from .store import BudgetExceededError, SolverConfig, store_from_atoms
from .terms import FreshNames


def var_closure_cids(
    atoms: Iterable[tuple[int, Atom]], seed_vars: set[str]
) -> tuple[set[int], set[str]]:
    """Atoms reachable from the seed variables via shared-variable chains.

    Returns (cids, closure-variable set).  One step of the chain is
    "shares a variable"; the closure follows equality chains like
    Ans=N1, N1=M1, ... to their end.
    """
    atoms = list(atoms)
    reached = set(seed_vars)
    picked: set[int] = set()
    changed = True
    while changed:
        changed = False
        for cid, atom in atoms:
            if cid in picked:
                continue
            avars = constraint_vars(atom)
            if avars & reached:
                picked.add(cid)
                if not avars <= reached:
                    reached |= avars
                changed = True
    return picked, reached


def sharing_cids(
    atoms: Iterable[tuple[int, Atom]], seed_vars: set[str], closure: bool
) -> set[int]:
    """One-step variable sharing, optionally closed transitively."""
    atoms = list(atoms)
    if closure:
        picked, _ = var_closure_cids(atoms, seed_vars)
        return picked
    return {cid for cid, a in atoms if constraint_vars(a) & seed_vars}


def minimal_subsets_union(
    atoms: list[tuple[int, Atom]],
    test: Callable[[list[Atom]], bool],
    budget: int,
) -> set[int]:
    """Union of all set-minimal subsets passing a monotone test.

    ``test`` must be monotone (supersets of a passing set pass), which
    holds for entailment and for inconsistency-with-a-constraint.  The
    budget counts candidate subsets examined.
    """
    n = len(atoms)
    found: list[frozenset[int]] = []
    union: set[int] = set()
    spent = 0
    for k in range(0, n + 1):
        for picks in combinations(range(n), k):
            spent += 1
            if spent > budget:
                raise BudgetExceededError("minimal-subset enumeration budget exhausted")
            idxs = frozenset(picks)
            if any(m <= idxs for m in found):
                continue  # strict superset of a known minimal set
            if test([atoms[i][1] for i in picks]):
                found.append(idxs)
                union |= {atoms[i][0] for i in picks}
    return union


def entailing_subsets_union(
    atoms: list[tuple[int, Atom]],
    c: Constraint,
    *,
    budget: int = 10**6,
    solver: SolverConfig = SolverConfig(),
    store_consistent: Optional[bool] = None,
) -> set[int]:
    """Union of set-minimal S' with the conjunction of S' entailing c."""
    pool = _restricted(atoms, c, solver, store_consistent)

    def test(subset: list[Atom]) -> bool:
        return store_from_atoms(subset, config=solver).entails(c, FreshNames())

    return minimal_subsets_union(pool, test, budget)


def inconsistent_subsets_union(
    atoms: list[tuple[int, Atom]],
    c: Constraint,
    *,
    budget: int = 10**6,
    solver: SolverConfig = SolverConfig(),
    store_consistent: Optional[bool] = None,
) -> set[int]:
    """Union of set-minimal S' with S' in conjunction with c inconsistent."""
    from .constraints import AtomizeError, atomize

    pool = _restricted(atoms, c, solver, store_consistent)
    try:
        # the atomization of c is subset-independent unless it needs the
        # subset's bindings to resolve list sugar
        fresh = FreshNames()
        fresh.reserve_all(constraint_vars(c))
        for _, a in pool:
            fresh.reserve_all(constraint_vars(a))
        goal_atoms, _ = atomize(c, fresh, {})

        def test(subset: list[Atom]) -> bool:
            return (
                store_from_atoms(list(subset) + goal_atoms, config=solver).status
                != "consistent"
            )

    except AtomizeError:

        def test(subset: list[Atom]) -> bool:
            return not store_from_atoms(subset, config=solver).consistent_with(
                c, FreshNames()
            )

    return minimal_subsets_union(pool, test, budget)


def _restricted(
    atoms: list[tuple[int, Atom]],
    c: Constraint,
    solver: SolverConfig,
    store_consistent: Optional[bool],
) -> list[tuple[int, Atom]]:
    # Variable-disconnected atoms cannot belong to a minimal subset as long
    # as the whole store is satisfiable (entailment factorizes over
    # variable components); an inconsistent store forfeits the shortcut.
    # Tokens fall outside that argument (they are entailed by presence, not
    # by models), so matching token atoms seed the pool as well.
    if store_consistent is None:
        whole = store_from_atoms([a for _, a in atoms], config=solver)
        store_consistent = whole.status == "consistent"
    if not store_consistent:
        return list(atoms)
    goal_tokens = _token_shapes(c)
    seeds = set(constraint_vars(c))
    matching: set[int] = set()
    for cid, atom in atoms:
        if isinstance(atom, TokenC) and (atom.functor, len(atom.args)) in goal_tokens:
            matching.add(cid)
            seeds |= constraint_vars(atom)
    picked, _ = var_closure_cids(atoms, seeds)
    picked |= matching
    return [(cid, a) for cid, a in atoms if cid in picked]


def _token_shapes(c: Constraint) -> set[tuple[str, int]]:
    from .constraints import AndC, ExistsC

    if isinstance(c, TokenC):
        return {(c.functor, len(c.args))}
    if isinstance(c, AndC):
        out: set[tuple[str, int]] = set()
        for p in c.parts:
            out |= _token_shapes(p)
        return out
    if isinstance(c, ExistsC):
        return _token_shapes(c.body)
    return set()
