"""ASTs for CCP processes, CLP rules and assertion formulas, with printers.

Structural congruence is realized operationally: ``flatten`` spreads
parallel compositions and drops skip, so configurations are kept in
congruence-normalized form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .constraints import Constraint, constraint_vars, print_constraint, subst_constraint
from .terms import FreshNames, Term, print_term, subst_term, term_vars


# --- assertion formulas ----------------------------------------------------

@dataclass(frozen=True)
class Pos:
    c: Constraint


@dataclass(frozen=True)
class Neg:
    c: Constraint


@dataclass(frozen=True)
class Cons:
    c: Constraint


@dataclass(frozen=True)
class Icons:
    c: Constraint


@dataclass(frozen=True)
class AndA:
    lhs: "Assertion"
    rhs: "Assertion"


@dataclass(frozen=True)
class OrA:
    lhs: "Assertion"
    rhs: "Assertion"


@dataclass(frozen=True)
class ImpliesA:
    lhs: "Assertion"
    rhs: "Assertion"


@dataclass(frozen=True)
class ForAllCalls:
    pred: str
    params: tuple[str, ...]
    body: "Assertion"


@dataclass(frozen=True)
class ExistsCall:
    pred: str
    params: tuple[str, ...]
    body: "Assertion"


Assertion = Union[Pos, Neg, Cons, Icons, AndA, OrA, ImpliesA, ForAllCalls, ExistsCall]

ATOMIC_ASSERTIONS = (Pos, Neg, Cons, Icons)


def assertion_vars(f: Assertion) -> set[str]:
    if isinstance(f, ATOMIC_ASSERTIONS):
        return constraint_vars(f.c)
    if isinstance(f, (AndA, OrA, ImpliesA)):
        return assertion_vars(f.lhs) | assertion_vars(f.rhs)
    if isinstance(f, (ForAllCalls, ExistsCall)):
        return assertion_vars(f.body) - set(f.params)
    raise TypeError(f"not an assertion: {f!r}")


def subst_assertion(f: Assertion, mapping: dict[str, Term]) -> Assertion:
    if isinstance(f, Pos):
        return Pos(subst_constraint(f.c, mapping))
    if isinstance(f, Neg):
        return Neg(subst_constraint(f.c, mapping))
    if isinstance(f, Cons):
        return Cons(subst_constraint(f.c, mapping))
    if isinstance(f, Icons):
        return Icons(subst_constraint(f.c, mapping))
    if isinstance(f, (AndA, OrA, ImpliesA)):
        return type(f)(subst_assertion(f.lhs, mapping), subst_assertion(f.rhs, mapping))
    if isinstance(f, (ForAllCalls, ExistsCall)):
        inner = {k: v for k, v in mapping.items() if k not in f.params}
        return type(f)(f.pred, f.params, subst_assertion(f.body, inner))
    raise TypeError(f"not an assertion: {f!r}")


def print_assertion(f: Assertion) -> str:
    return _print_impl(f)


def _print_impl(f: Assertion) -> str:
    if isinstance(f, ImpliesA):
        return f"{_print_or(f.lhs)} -> {_print_impl(f.rhs)}"
    return _print_or(f)


def _print_or(f: Assertion) -> str:
    if isinstance(f, OrA):
        return f"{_print_or(f.lhs)} \\/ {_print_and(f.rhs)}"
    return _print_and(f)


def _print_and(f: Assertion) -> str:
    if isinstance(f, AndA):
        return f"{_print_and(f.lhs)} /\\ {_print_atom(f.rhs)}"
    return _print_atom(f)


def _print_atom(f: Assertion) -> str:
    if isinstance(f, Pos):
        return f"pos({print_constraint(f.c)})"
    if isinstance(f, Neg):
        return f"neg({print_constraint(f.c)})"
    if isinstance(f, Cons):
        return f"cons({print_constraint(f.c)})"
    if isinstance(f, Icons):
        return f"icons({print_constraint(f.c)})"
    if isinstance(f, ForAllCalls):
        return f"forall {f.pred}({','.join(f.params)}): {_print_atom_body(f.body)}"
    if isinstance(f, ExistsCall):
        return f"exists {f.pred}({','.join(f.params)}): {_print_atom_body(f.body)}"
    return f"({_print_impl(f)})"


def _print_atom_body(f: Assertion) -> str:
    if isinstance(f, ATOMIC_ASSERTIONS):
        return _print_atom(f)
    return f"({_print_impl(f)})"


# --- CCP processes ----------------------------------------------------------

@dataclass(frozen=True)
class Skip:
    pass


@dataclass(frozen=True)
class Tell:
    c: Constraint


@dataclass(frozen=True)
class Sum:
    branches: tuple[tuple[Constraint, "Process"], ...]  # (guard, body), >= 1


@dataclass(frozen=True)
class Par:
    parts: tuple["Process", ...]


@dataclass(frozen=True)
class Local:
    var: str
    body: "Process"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class AssertProbe:
    """An assertion annotation travelling inside a process body.

    Probes register an obligation with the monitor the moment they enter a
    configuration; they never reduce and never appear in traces.
    """

    kind: str  # "inv" | "post"
    formula: Assertion


Process = Union[Skip, Tell, Sum, Par, Local, Call, AssertProbe]

SKIP = Skip()


@dataclass(frozen=True)
class ProcDef:
    name: str
    params: tuple[str, ...]
    body: Process

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, len(self.params))


def ask(guard: Constraint, body: Process) -> Sum:
    return Sum(((guard, body),))


def par(parts: list[Process]) -> Process:
    flat = flatten(Par(tuple(parts)))
    if not flat:
        return SKIP
    if len(flat) == 1:
        return flat[0]
    return Par(tuple(flat))


def flatten(p: Process) -> list[Process]:
    """Congruence-normalize a process into parallel components.

    Applies Par-flattening and skip-removal (STR2-STR4).
    """
    if isinstance(p, Skip):
        return []
    if isinstance(p, Par):
        out: list[Process] = []
        for part in p.parts:
            out.extend(flatten(part))
        return out
    return [p]


def process_free_vars(p: Process) -> set[str]:
    if isinstance(p, Skip):
        return set()
    if isinstance(p, Tell):
        return constraint_vars(p.c)
    if isinstance(p, Sum):
        out: set[str] = set()
        for guard, body in p.branches:
            out |= constraint_vars(guard) | process_free_vars(body)
        return out
    if isinstance(p, Par):
        out = set()
        for part in p.parts:
            out |= process_free_vars(part)
        return out
    if isinstance(p, Local):
        return process_free_vars(p.body) - {p.var}
    if isinstance(p, Call):
        out = set()
        for a in p.args:
            out |= term_vars(a)
        return out
    if isinstance(p, AssertProbe):
        return assertion_vars(p.formula)
    raise TypeError(f"not a process: {p!r}")


def subst_process(
    p: Process, mapping: dict[str, Term], fresh: Optional[FreshNames] = None
) -> Process:
    """Capture-avoiding substitution of terms for free variables."""
    if not mapping:
        return p
    if isinstance(p, Skip):
        return p
    if isinstance(p, Tell):
        return Tell(subst_constraint(p.c, mapping))
    if isinstance(p, Sum):
        return Sum(
            tuple(
                (subst_constraint(g, mapping), subst_process(b, mapping, fresh))
                for g, b in p.branches
            )
        )
    if isinstance(p, Par):
        return Par(tuple(subst_process(part, mapping, fresh) for part in p.parts))
    if isinstance(p, Local):
        inner = {k: v for k, v in mapping.items() if k != p.var}
        clashing = any(p.var in term_vars(v) for v in inner.values())
        if clashing:
            if fresh is None:
                raise ValueError(f"substitution would capture {p.var}")
            nv = fresh.fresh_var(p.var)
            body = subst_process(p.body, {p.var: nv}, fresh)
            return Local(nv.name, subst_process(body, inner, fresh))
        return Local(p.var, subst_process(p.body, inner, fresh))
    if isinstance(p, Call):
        return Call(p.name, tuple(subst_term(a, mapping) for a in p.args))
    if isinstance(p, AssertProbe):
        return AssertProbe(p.kind, subst_assertion(p.formula, mapping))
    raise TypeError(f"not a process: {p!r}")


def print_process(p: Process) -> str:
    if isinstance(p, Skip):
        return "skip"
    if isinstance(p, Tell):
        return f"tell({print_constraint(p.c)})"
    if isinstance(p, Sum):
        return " + ".join(
            f"ask {print_constraint(g)} then {_print_guard_body(b)}"
            for g, b in p.branches
        )
    if isinstance(p, Par):
        return " || ".join(_print_par_part(part) for part in p.parts)
    if isinstance(p, Local):
        return f"local {p.var} in {_print_guard_body(p.body)}"
    if isinstance(p, Call):
        if not p.args:
            return p.name
        return f"{p.name}({','.join(print_term(a) for a in p.args)})"
    if isinstance(p, AssertProbe):
        return f"{p.kind}({print_assertion(p.formula)})"
    raise TypeError(f"not a process: {p!r}")


def _print_par_part(p: Process) -> str:
    s = print_process(p)
    if isinstance(p, (Sum, Local, Par)):
        return f"({s})"
    return s


def _print_guard_body(p: Process) -> str:
    s = print_process(p)
    if isinstance(p, (Sum, Par)):
        return f"({s})"
    return s


# --- CLP rules and literals --------------------------------------------------

@dataclass(frozen=True)
class ConstraintLit:
    c: Constraint


@dataclass(frozen=True)
class CallLit:
    name: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class AssertLit:
    kind: str  # "inv" | "post"
    formula: Assertion


Literal = Union[ConstraintLit, CallLit, AssertLit]


@dataclass(frozen=True)
class Rule:
    name: str
    head_args: tuple[Term, ...]
    body: tuple[Literal, ...]

    @property
    def key(self) -> tuple[str, int]:
        return (self.name, len(self.head_args))


def rule_vars(rule: Rule) -> set[str]:
    out: set[str] = set()
    for t in rule.head_args:
        out |= term_vars(t)
    for lit in rule.body:
        out |= literal_vars(lit)
    return out


def literal_vars(lit: Literal) -> set[str]:
    if isinstance(lit, ConstraintLit):
        return constraint_vars(lit.c)
    if isinstance(lit, CallLit):
        out: set[str] = set()
        for a in lit.args:
            out |= term_vars(a)
        return out
    if isinstance(lit, AssertLit):
        return assertion_vars(lit.formula)
    raise TypeError(f"not a literal: {lit!r}")


def subst_literal(lit: Literal, mapping: dict[str, Term]) -> Literal:
    if isinstance(lit, ConstraintLit):
        return ConstraintLit(subst_constraint(lit.c, mapping))
    if isinstance(lit, CallLit):
        return CallLit(lit.name, tuple(subst_term(a, mapping) for a in lit.args))
    if isinstance(lit, AssertLit):
        return AssertLit(lit.kind, subst_assertion(lit.formula, mapping))
    raise TypeError(f"not a literal: {lit!r}")


def print_literal(lit: Literal) -> str:
    if isinstance(lit, ConstraintLit):
        return print_constraint(lit.c)
    if isinstance(lit, CallLit):
        if not lit.args:
            return lit.name
        return f"{lit.name}({','.join(print_term(a) for a in lit.args)})"
    if isinstance(lit, AssertLit):
        return f"{lit.kind}({print_assertion(lit.formula)})"
    raise TypeError(f"not a literal: {lit!r}")


def print_rule(rule: Rule) -> str:
    head = (
        rule.name
        if not rule.head_args
        else f"{rule.name}({','.join(print_term(a) for a in rule.head_args)})"
    )
    if not rule.body:
        return f"{head}."
    return f"{head} :- {', '.join(print_literal(l) for l in rule.body)}."


def print_procdef(d: ProcDef) -> str:
    head = d.name if not d.params else f"{d.name}({','.join(d.params)})"
    return f"def {head} = {print_process(d.body)}."
