"""Independent oracles used by the test suite.

These deliberately avoid the production decision procedures: satisfaction
is checked by direct evaluation under explicit variable assignments, and
subset minimality by filtering the full powerset.
"""

from __future__ import annotations

from itertools import combinations, product

from clpslicer.constraints import (
    Atom,
    EqC,
    FalseC,
    InDomainC,
    LinRelC,
    TrueC,
)
from clpslicer.terms import Int, NIL, Struct, Term, Var, cons

# Integer values straddle the 0..3 domains used by the generators, the
# non-numeric values keep arithmetic goals falsifiable for unconstrained
# variables, and every ground term a generator can emit is present (a term
# missing from the universe would make its equations vacuously false).
UNIVERSE: list[Term] = [Int(v) for v in range(-1, 5)] + [
    NIL,
    Struct("a"),
    cons(Int(0), NIL),
    cons(Int(1), NIL),
    cons(Int(2), NIL),
]


def ground(t: Term, assignment: dict[str, Term]) -> Term:
    if isinstance(t, Var):
        return assignment[t.name]
    if isinstance(t, Struct) and t.args:
        return Struct(t.functor, tuple(ground(a, assignment) for a in t.args))
    return t


def as_int(t: Term) -> int | None:
    if isinstance(t, Int):
        return t.value
    if isinstance(t, Struct) and t.functor in ("+", "-", "*") and len(t.args) == 2:
        a, b = as_int(t.args[0]), as_int(t.args[1])
        if a is None or b is None:
            return None
        return {"+": a + b, "-": a - b, "*": a * b}[t.functor]
    if isinstance(t, Struct) and t.functor == "-" and len(t.args) == 1:
        a = as_int(t.args[0])
        return None if a is None else -a
    return None


def satisfies(atom: Atom, assignment: dict[str, Term]) -> bool:
    if isinstance(atom, TrueC):
        return True
    if isinstance(atom, FalseC):
        return False
    if isinstance(atom, EqC):
        return ground(atom.lhs, assignment) == ground(atom.rhs, assignment)
    if isinstance(atom, InDomainC):
        v = as_int(ground(Var(atom.var), assignment))
        return v is not None and atom.lo <= v <= atom.hi
    if isinstance(atom, LinRelC):
        a = as_int(ground(atom.lhs, assignment))
        b = as_int(ground(atom.rhs, assignment))
        if a is None or b is None:
            return False
        return {
            "=": a == b,
            "\\=": a != b,
            "<": a < b,
            "=<": a <= b,
            ">": a > b,
            ">=": a >= b,
        }[atom.op]
    raise TypeError(f"oracle cannot evaluate {atom!r}")


def assignments(var_names: list[str]):
    for values in product(UNIVERSE, repeat=len(var_names)):
        yield dict(zip(var_names, values))


def oracle_consistent(atoms: list[Atom], var_names: list[str]) -> bool:
    return any(
        all(satisfies(a, asg) for a in atoms) for asg in assignments(var_names)
    )


def oracle_entails(atoms: list[Atom], goals: list[Atom], var_names: list[str]) -> bool:
    for asg in assignments(var_names):
        if all(satisfies(a, asg) for a in atoms) and not all(
            satisfies(g, asg) for g in goals
        ):
            return False
    return True


def oracle_minimal_subsets_union(
    atoms: list[tuple[int, Atom]], passes
) -> set[int]:
    """Union of set-minimal index subsets passing the predicate.

    Definition-direct: enumerate the whole powerset, then keep subsets
    with no passing proper subset.
    """
    n = len(atoms)
    passing: list[frozenset[int]] = []
    for k in range(n + 1):
        for picks in combinations(range(n), k):
            subset = [atoms[i][1] for i in picks]
            if passes(subset):
                passing.append(frozenset(picks))
    union: set[int] = set()
    for s in passing:
        if not any(t < s for t in passing):
            union |= {atoms[i][0] for i in s}
    return union


class _OracleCutoff(Exception):
    pass


def oracle_clp_answers(rules, goal, goal_var_names, budget: int = 3000):
    """Ground answer tuples of a CLP goal under RIGHTMOST literal selection.

    An independent re-derivation (plain recursion, rightmost selection,
    textual clause order) used to check that the engine's answer set does
    not depend on the selection rule.  Returns None when the budget runs
    out or an answer is not ground.
    """
    from clpslicer.constraints import EqC, atomize
    from clpslicer.store import Store
    from clpslicer.syntax import (
        CallLit,
        ConstraintLit,
        literal_vars,
        rule_vars,
        subst_literal,
    )
    from clpslicer.terms import (
        FreshNames,
        deep_walk,
        print_term,
        subst_term,
        term_vars,
    )

    index: dict = {}
    for rule in rules:
        index.setdefault(rule.key, []).append(rule)
    fresh = FreshNames()
    for rule in rules:
        fresh.reserve_all(rule_vars(rule))
    for lit in goal:
        fresh.reserve_all(literal_vars(lit))

    answers: set[tuple[str, ...]] = set()
    steps = [0]
    nonground = [False]

    def derive(literals, store):
        steps[0] += 1
        if steps[0] > budget:
            raise _OracleCutoff
        if not literals:
            if store.status != "consistent":
                return
            binding = []
            for name in goal_var_names:
                value = deep_walk(Var(name), store.subst)
                if term_vars(value):
                    nonground[0] = True
                    return
                binding.append(print_term(value))
            answers.add(tuple(binding))
            return
        lit = literals[-1]
        rest = literals[:-1]
        if isinstance(lit, ConstraintLit):
            atoms, _ = atomize(lit.c, fresh, store.subst)
            nxt, _ = store.add_many(atoms)
            if nxt.status == "consistent":
                derive(rest, nxt)
            return
        assert isinstance(lit, CallLit)
        for rule in index[(lit.name, len(lit.args))]:
            mapping = {v: fresh.fresh_var(v) for v in sorted(rule_vars(rule))}
            eqs = [
                ConstraintLit(EqC(subst_term(s, mapping), t))
                for s, t in zip(rule.head_args, lit.args)
            ]
            body = [subst_literal(b, mapping) for b in rule.body]
            derive(rest + tuple(eqs + body), store)

    try:
        derive(tuple(goal), Store.empty())
    except _OracleCutoff:
        return None
    if nonground[0]:
        return None
    return answers


def oracle_queens_ok(solution: list[int]) -> bool:
    """Brute-force n-queens validity: permutation, no shared diagonals."""
    n = len(solution)
    if sorted(solution) != list(range(1, n + 1)):
        return False
    for i in range(n):
        for j in range(i + 1, n):
            if abs(solution[i] - solution[j]) == j - i:
                return False
    return True
