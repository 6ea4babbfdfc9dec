"""Herbrand terms and syntactic unification.

Terms are variables, integer constants and compound terms; lists are
sugar for the binary functor cons/2 with the constant nil.  Substitutions
are triangular (a variable may map to a term containing further bound
variables); ``walk``/``deep_walk`` resolve them.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __repr__(self) -> str:
        return f"Var({self.name})"


@dataclass(frozen=True)
class Int:
    value: int

    def __repr__(self) -> str:
        return f"Int({self.value})"


@dataclass(frozen=True)
class Struct:
    functor: str
    args: tuple["Term", ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def __repr__(self) -> str:
        return f"Struct({self.functor}/{self.arity})"


Term = Union[Var, Int, Struct]

NIL = Struct("nil")

Subst = dict[str, Term]


def cons(head: Term, tail: Term) -> Struct:
    return Struct("cons", (head, tail))


def make_list(items: Iterable[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(list(items)):
        out = cons(item, out)
    return out


def list_parts(t: Term) -> tuple[list[Term], Optional[Term]]:
    """Split a cons chain into (elements, improper-tail or None)."""
    items: list[Term] = []
    while isinstance(t, Struct) and t.functor == "cons" and t.arity == 2:
        items.append(t.args[0])
        t = t.args[1]
    if t == NIL:
        return items, None
    return items, t


def walk(t: Term, subst: Subst) -> Term:
    """Follow variable bindings until a non-variable or unbound variable."""
    while isinstance(t, Var):
        bound = subst.get(t.name)
        if bound is None:
            return t
        t = bound
    return t


def deep_walk(t: Term, subst: Subst) -> Term:
    t = walk(t, subst)
    if isinstance(t, Struct) and t.args:
        return Struct(t.functor, tuple(deep_walk(a, subst) for a in t.args))
    return t


def occurs(name: str, t: Term, subst: Subst) -> bool:
    t = walk(t, subst)
    if isinstance(t, Var):
        return t.name == name
    if isinstance(t, Struct):
        return any(occurs(name, a, subst) for a in t.args)
    return False


def unify(a: Term, b: Term, subst: Subst, occurs_check: bool = True) -> Optional[Subst]:
    """Unify two terms, returning an extended copy of ``subst`` or None.

    The input substitution is never mutated.
    """
    out = dict(subst)
    if _unify_into(a, b, out, occurs_check):
        return out
    return None


def _unify_into(a: Term, b: Term, subst: Subst, occurs_check: bool) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x = walk(x, subst)
        y = walk(y, subst)
        if x == y:
            continue
        if isinstance(x, Var):
            if occurs_check and occurs(x.name, y, subst):
                return False
            subst[x.name] = y
        elif isinstance(y, Var):
            if occurs_check and occurs(y.name, x, subst):
                return False
            subst[y.name] = x
        elif isinstance(x, Int) and isinstance(y, Int):
            if x.value != y.value:
                return False
        elif isinstance(x, Struct) and isinstance(y, Struct):
            if x.functor != y.functor or x.arity != y.arity:
                return False
            stack.extend(zip(x.args, y.args))
        else:
            return False
    return True


def term_vars(t: Term) -> set[str]:
    out: set[str] = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, Struct):
            stack.extend(x.args)
    return out


def subst_term(t: Term, mapping: dict[str, Term]) -> Term:
    """Syntactic substitution (no walking through bindings)."""
    if isinstance(t, Var):
        return mapping.get(t.name, t)
    if isinstance(t, Struct) and t.args:
        return Struct(t.functor, tuple(subst_term(a, mapping) for a in t.args))
    return t


def print_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Int):
        return str(t.value)
    if t == NIL:
        return "[]"
    if isinstance(t, Struct) and t.functor == "cons" and t.arity == 2:
        items, tail = list_parts(t)
        inner = ",".join(print_term(i) for i in items)
        if tail is None:
            return f"[{inner}]"
        return f"[{inner}|{print_term(tail)}]"
    if isinstance(t, Struct) and t.functor in ("+", "-", "*") and t.arity == 2:
        return f"{_arith_arg(t.args[0])}{t.functor}{_arith_arg(t.args[1])}"
    if isinstance(t, Struct) and t.functor == "-" and t.arity == 1:
        return f"-{_arith_arg(t.args[0])}"
    if not t.args:
        return t.functor
    return f"{t.functor}({','.join(print_term(a) for a in t.args)})"


def _arith_arg(t: Term) -> str:
    s = print_term(t)
    if isinstance(t, Struct) and t.functor in ("+", "-", "*") and t.args:
        return f"({s})"
    return s


_TRAILING_DIGITS = re.compile(r"\d+$")


class FreshNames:
    """Monotone per-prefix counters for renaming-apart.

    Names already seen (e.g. from the source program) are reserved so a
    freshly generated name can never collide with them.
    """

    def __init__(self) -> None:
        self._counters: dict[str, int] = {}

    def state(self) -> dict[str, int]:
        return dict(self._counters)

    def restore(self, state: dict[str, int]) -> None:
        self._counters = dict(state)

    def reserve(self, name: str) -> None:
        m = _TRAILING_DIGITS.search(name)
        if m:
            prefix, n = name[: m.start()], int(m.group())
        else:
            prefix, n = name, 0
        if n >= self._counters.get(prefix, 0):
            self._counters[prefix] = n

    def reserve_all(self, names: Iterable[str]) -> None:
        for name in names:
            self.reserve(name)

    def fresh(self, prefix: str) -> str:
        m = _TRAILING_DIGITS.search(prefix)
        if m:
            prefix = prefix[: m.start()]
        if not prefix:
            prefix = "V"
        n = self._counters.get(prefix, 0) + 1
        self._counters[prefix] = n
        return f"{prefix}{n}"

    def fresh_var(self, prefix: str) -> Var:
        return Var(self.fresh(prefix))
