"""Atomic constraints and composite constraint formulas.

Atomic constraints are Herbrand equalities, bounded-integer domain
memberships, linear arithmetic relations, uninterpreted predicate tokens
and the two distinguished constraints truth/falsity.  Composite formulas
combine them with conjunction and existential hiding; ``atomize``
flattens a composite into atoms, eliminating existentials by fresh
renaming.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .terms import (
    FreshNames,
    Int,
    Struct,
    Subst,
    Term,
    Var,
    deep_walk,
    list_parts,
    print_term,
    subst_term,
    term_vars,
    walk,
)

# Relation symbols for LinRel, in source syntax ('#\\=' prints as the
# GNU-Prolog operator).
REL_OPS = ("=", "\\=", "<", "=<", ">", ">=")

_NEGATED = {"=": "\\=", "\\=": "=", "<": ">=", "=<": ">", ">": "=<", ">=": "<"}


@dataclass(frozen=True)
class EqC:
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class InDomainC:
    var: str
    lo: int
    hi: int


@dataclass(frozen=True)
class LinRelC:
    op: str  # one of REL_OPS, relating lhs to rhs
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class TokenC:
    """Uninterpreted constraint token, e.g. ``beat`` or ``c(H1,H2)``."""

    functor: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True)
class TrueC:
    pass


@dataclass(frozen=True)
class FalseC:
    pass


TRUE = TrueC()
FALSE = FalseC()

Atom = Union[EqC, InDomainC, LinRelC, TokenC, TrueC, FalseC]


@dataclass(frozen=True)
class AndC:
    parts: tuple["Constraint", ...]


@dataclass(frozen=True)
class ExistsC:
    var: str
    body: "Constraint"


@dataclass(frozen=True)
class InExprC:
    """``X in L..U`` before bounds are known to be integers."""

    var: Term
    lo: Term
    hi: Term


@dataclass(frozen=True)
class AllDifferentC:
    arg: Term  # a list term, possibly a variable bound to one


@dataclass(frozen=True)
class ListDomainC:
    """``fd_domain(L, Lo, Hi)``: every element of L in Lo..Hi."""

    arg: Term
    lo: Term
    hi: Term


Constraint = Union[Atom, AndC, ExistsC, InExprC, AllDifferentC, ListDomainC]


class AtomizeError(ValueError):
    """A composite constraint could not be reduced to atoms."""


def conj(parts: list[Constraint]) -> Constraint:
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return AndC(tuple(parts))


def negate_rel(op: str) -> str:
    return _NEGATED[op]


def constraint_vars(c: Constraint) -> set[str]:
    if isinstance(c, EqC):
        return term_vars(c.lhs) | term_vars(c.rhs)
    if isinstance(c, InDomainC):
        return {c.var}
    if isinstance(c, LinRelC):
        return term_vars(c.lhs) | term_vars(c.rhs)
    if isinstance(c, TokenC):
        out: set[str] = set()
        for a in c.args:
            out |= term_vars(a)
        return out
    if isinstance(c, (TrueC, FalseC)):
        return set()
    if isinstance(c, AndC):
        out = set()
        for p in c.parts:
            out |= constraint_vars(p)
        return out
    if isinstance(c, ExistsC):
        return constraint_vars(c.body) - {c.var}
    if isinstance(c, InExprC):
        return term_vars(c.var) | term_vars(c.lo) | term_vars(c.hi)
    if isinstance(c, (AllDifferentC, ListDomainC)):
        out = term_vars(c.arg)
        if isinstance(c, ListDomainC):
            out |= term_vars(c.lo) | term_vars(c.hi)
        return out
    raise TypeError(f"not a constraint: {c!r}")


def subst_constraint(c: Constraint, mapping: dict[str, Term]) -> Constraint:
    """Syntactic substitution over a constraint (capture-naive on Exists)."""
    if isinstance(c, EqC):
        return EqC(subst_term(c.lhs, mapping), subst_term(c.rhs, mapping))
    if isinstance(c, InDomainC):
        t = mapping.get(c.var)
        if t is None:
            return c
        return InExprC(t, Int(c.lo), Int(c.hi))
    if isinstance(c, LinRelC):
        return LinRelC(c.op, subst_term(c.lhs, mapping), subst_term(c.rhs, mapping))
    if isinstance(c, TokenC):
        return TokenC(c.functor, tuple(subst_term(a, mapping) for a in c.args))
    if isinstance(c, (TrueC, FalseC)):
        return c
    if isinstance(c, AndC):
        return AndC(tuple(subst_constraint(p, mapping) for p in c.parts))
    if isinstance(c, ExistsC):
        inner = {k: v for k, v in mapping.items() if k != c.var}
        return ExistsC(c.var, subst_constraint(c.body, inner))
    if isinstance(c, InExprC):
        return InExprC(
            subst_term(c.var, mapping),
            subst_term(c.lo, mapping),
            subst_term(c.hi, mapping),
        )
    if isinstance(c, AllDifferentC):
        return AllDifferentC(subst_term(c.arg, mapping))
    if isinstance(c, ListDomainC):
        return ListDomainC(
            subst_term(c.arg, mapping),
            subst_term(c.lo, mapping),
            subst_term(c.hi, mapping),
        )
    raise TypeError(f"not a constraint: {c!r}")


def _walked_int(t: Term, resolve: Subst) -> Optional[int]:
    t = walk(t, resolve)
    if isinstance(t, Int):
        return t.value
    return None


def _resolve_list(t: Term, resolve: Subst) -> Optional[list[Term]]:
    t = deep_walk(t, resolve)
    items, tail = list_parts(t)
    if tail is not None:
        return None
    return items


def atomize(
    c: Constraint,
    fresh: Optional[FreshNames] = None,
    resolve: Optional[Subst] = None,
) -> tuple[list[Atom], list[str]]:
    """Flatten a composite constraint into atomic constraints.

    Existentially quantified variables are eliminated by fresh renaming;
    the returned names list records the renamings introduced.  ``resolve``
    (typically the current store's equality bindings) is consulted to
    expand list-shaped sugar (all_different, fd_domain) and symbolic
    domain bounds.
    """
    fresh = fresh or FreshNames()
    resolve = resolve or {}
    atoms: list[Atom] = []
    created: list[str] = []

    def go(c: Constraint, renaming: dict[str, Term]) -> None:
        if isinstance(c, ExistsC):
            nv = fresh.fresh_var(c.var)
            created.append(nv.name)
            go(c.body, {**renaming, c.var: nv})
            return
        if renaming:
            c = subst_constraint(c, renaming)
        if isinstance(c, AndC):
            for p in c.parts:
                go(p, {})
            return
        if isinstance(c, InExprC):
            atoms.extend(_atomize_in(c, resolve))
            return
        if isinstance(c, AllDifferentC):
            items = _resolve_list(c.arg, resolve)
            if items is None:
                raise AtomizeError(
                    f"all_different argument is not a closed list: {print_term(c.arg)}"
                )
            for i in range(len(items)):
                for j in range(i + 1, len(items)):
                    atoms.append(LinRelC("\\=", items[i], items[j]))
            if len(items) < 2:
                atoms.append(TRUE)
            return
        if isinstance(c, ListDomainC):
            items = _resolve_list(c.arg, resolve)
            if items is None:
                raise AtomizeError(
                    f"fd_domain argument is not a closed list: {print_term(c.arg)}"
                )
            if not items:
                atoms.append(TRUE)
            for item in items:
                atoms.extend(_atomize_in(InExprC(item, c.lo, c.hi), resolve))
            return
        atoms.append(c)  # already atomic

    go(c, {})
    return atoms, created


def _atomize_in(c: InExprC, resolve: Subst) -> list[Atom]:
    v = walk(c.var, resolve)
    lo = _walked_int(c.lo, resolve)
    hi = _walked_int(c.hi, resolve)
    if isinstance(v, Var) and lo is not None and hi is not None:
        return [InDomainC(v.name, lo, hi)]
    if isinstance(v, Int) and lo is not None and hi is not None:
        return [TRUE if lo <= v.value <= hi else FALSE]
    if isinstance(v, Struct):
        return [FALSE]  # a compound is never an integer
    return [LinRelC(">=", c.var, c.lo), LinRelC("=<", c.var, c.hi)]


# --- linear expressions -------------------------------------------------

class NonLinearError(ValueError):
    pass


def linear_form(t: Term, subst: Subst) -> Optional[tuple[dict[str, int], int]]:
    """Resolve a term into (coefficients-by-root-variable, constant).

    Returns None when some leaf walks to a non-numeric compound.  Raises
    NonLinearError for products of two non-constant subterms.
    """
    coeffs: dict[str, int] = {}
    const = 0

    def add(t: Term, k: int) -> bool:
        nonlocal const
        t = walk(t, subst)
        if isinstance(t, Int):
            const += k * t.value
            return True
        if isinstance(t, Var):
            coeffs[t.name] = coeffs.get(t.name, 0) + k
            return True
        if isinstance(t, Struct) and t.functor == "+" and t.arity == 2:
            return add(t.args[0], k) and add(t.args[1], k)
        if isinstance(t, Struct) and t.functor == "-" and t.arity == 2:
            return add(t.args[0], k) and add(t.args[1], -k)
        if isinstance(t, Struct) and t.functor == "-" and t.arity == 1:
            return add(t.args[0], -k)
        if isinstance(t, Struct) and t.functor == "*" and t.arity == 2:
            a = walk(t.args[0], subst)
            b = walk(t.args[1], subst)
            if isinstance(a, Int):
                return add(b, k * a.value)
            if isinstance(b, Int):
                return add(a, k * b.value)
            raise NonLinearError(f"nonlinear product: {print_term(t)}")
        return False

    if not add(t, 1):
        return None
    return {v: c for v, c in coeffs.items() if c != 0}, const


# --- printing -----------------------------------------------------------

def print_constraint(c: Constraint) -> str:
    if isinstance(c, EqC):
        return f"{print_term(c.lhs)}={print_term(c.rhs)}"
    if isinstance(c, InDomainC):
        return f"{c.var} in {c.lo}..{c.hi}"
    if isinstance(c, LinRelC):
        op = "#" + c.op if c.op != "=" else "#="
        if c.op == "\\=":
            op = "#\\="
        return f"{print_term(c.lhs)} {op} {print_term(c.rhs)}"
    if isinstance(c, TokenC):
        if not c.args:
            return c.functor
        return f"{c.functor}({','.join(print_term(a) for a in c.args)})"
    if isinstance(c, TrueC):
        return "t"
    if isinstance(c, FalseC):
        return "f"
    if isinstance(c, AndC):
        return " /\\ ".join(_paren_part(p) for p in c.parts)
    if isinstance(c, ExistsC):
        return f"exists {c.var}. {print_constraint(c.body)}"
    if isinstance(c, InExprC):
        return f"{print_term(c.var)} in {print_term(c.lo)}..{print_term(c.hi)}"
    if isinstance(c, AllDifferentC):
        return f"all_different({print_term(c.arg)})"
    if isinstance(c, ListDomainC):
        return (
            f"fd_domain({print_term(c.arg)},{print_term(c.lo)},{print_term(c.hi)})"
        )
    raise TypeError(f"not a constraint: {c!r}")


def _paren_part(c: Constraint) -> str:
    s = print_constraint(c)
    if isinstance(c, (AndC, ExistsC)):
        return f"({s})"
    return s
