"""Translation of CLP programs into CCP process definitions.

Every predicate p/j with clauses 1..m becomes one definition whose body
is an m-branch blind choice: each branch asks t, opens locals for the
clause variables, tells the parameter equations x_k = t_k and runs the
translated body literals in parallel.  Assertion literals become probes.
"""

from __future__ import annotations

from .constraints import EqC, TRUE
from .syntax import (
    AssertLit,
    AssertProbe,
    Call,
    CallLit,
    ConstraintLit,
    Literal,
    Local,
    ProcDef,
    Process,
    Rule,
    Sum,
    Tell,
    par,
    rule_vars,
)
from .terms import FreshNames, Var


def clp_to_ccp(program: list[Rule]) -> list[ProcDef]:
    by_pred: dict[tuple[str, int], list[Rule]] = {}
    order: list[tuple[str, int]] = []
    for rule in program:
        if rule.key not in by_pred:
            by_pred[rule.key] = []
            order.append(rule.key)
        by_pred[rule.key].append(rule)

    defs = []
    for key in order:
        rules = by_pred[key]
        name, arity = key
        formals = _fresh_formals(arity, rules)
        branches = []
        for rule in rules:
            eqs: list[Process] = [
                Tell(EqC(Var(x), t)) for x, t in zip(formals, rule.head_args)
            ]
            body = [translate_literal(lit) for lit in rule.body]
            inner: Process = par(eqs + body)
            for v in reversed(_ordered_rule_vars(rule)):
                inner = Local(v, inner)
            branches.append((TRUE, inner))
        defs.append(ProcDef(name, tuple(formals), Sum(tuple(branches))))
    return defs


def _ordered_rule_vars(rule: Rule) -> list[str]:
    """Clause variables in first-occurrence order (head first, then body)."""
    from .syntax import literal_vars
    from .terms import Struct, Var as V

    seen: list[str] = []

    def visit(t) -> None:
        if isinstance(t, V) and t.name not in seen:
            seen.append(t.name)
        elif isinstance(t, Struct):
            for a in t.args:
                visit(a)

    for t in rule.head_args:
        visit(t)
    for lit in rule.body:
        for name in sorted(literal_vars(lit)):
            if name not in seen:
                seen.append(name)
    return seen


def _fresh_formals(arity: int, rules: list[Rule]) -> list[str]:
    used: set[str] = set()
    for rule in rules:
        used |= rule_vars(rule)
    fresh = FreshNames()
    fresh.reserve_all(used)
    return [fresh.fresh("V") for _ in range(arity)]


def translate_literal(lit: Literal) -> Process:
    if isinstance(lit, ConstraintLit):
        return Tell(lit.c)
    if isinstance(lit, CallLit):
        return Call(lit.name, lit.args)
    if isinstance(lit, AssertLit):
        return AssertProbe(lit.kind, lit.formula)
    raise TypeError(f"not a literal: {lit!r}")


def translate_goal(goal: list[Literal]) -> Process:
    return par([translate_literal(lit) for lit in goal])


def goal_vars(goal: list[Literal]) -> set[str]:
    from .syntax import literal_vars

    out: set[str] = set()
    for lit in goal:
        out |= literal_vars(lit)
    return out
