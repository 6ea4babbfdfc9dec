"""Concrete syntax for CLP programs, CCP programs and assertions.

CLP follows the Prolog-like syntax of the usual listings (``%`` line
comments, ``.``-terminated clauses, GNU-style ``#=`` operators, ``is/2``
normalized to a linear equation at parse time).  CCP programs are
``def name(X,...) = Process.`` statements plus optional ``run Process.``
statements.  Assertions appear in clause bodies as ``inv(F)``/``post(F)``
literals or in sidecar ``.assert`` files.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from . import syntax as syn
from .constraints import (
    AllDifferentC,
    AndC,
    Constraint,
    EqC,
    ExistsC,
    FALSE,
    InExprC,
    LinRelC,
    ListDomainC,
    TRUE,
    TokenC,
)
from .terms import Int, NIL, Struct, Term, Var, make_list


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # 'var' | 'name' | 'int' | 'op' | 'eof'
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<name>[a-z][A-Za-z0-9_]*)
  | (?P<int>\d+)
  | (?P<op>\#\\=|\#=<|\#<=|\#>=|\#<|\#>|\#=|:-|\|\||/\\|\\/|->|\.\.|>=|=<|<=|\\=|[()\[\],|=+\-*.:/<>])
    """,
    re.VERBOSE,
)

RELOPS = {
    "=": "=",
    "#=": "=",
    "#\\=": "\\=",
    "\\=": "\\=",
    "#<": "<",
    "<": "<",
    "#=<": "=<",
    "#<=": "=<",
    "=<": "=<",
    "<=": "=<",
    "#>": ">",
    ">": ">",
    "#>=": ">=",
    ">=": ">=",
}

CONSTRAINT_SUGAR = {"all_different", "fd_all_different", "fd_domain"}
BUILTIN_CALLS = {"labeling", "fd_labeling"}


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0
        self._anon = 0

    # -- cursor helpers ---------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.i + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.i += 1
        return tok

    def at(self, text: str) -> bool:
        return self.peek().text == text and self.peek().kind in ("op", "name")

    def eat(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.eat(text):
            raise ParseError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.col)
        return tok

    def fail(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(f"{message} (found {tok.text!r})", tok.line, tok.col)

    # -- terms --------------------------------------------------------------

    def term(self) -> Term:
        t = self.term_product()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.next().text
            rhs = self.term_product()
            t = Struct(op, (t, rhs))
        return t

    def term_product(self) -> Term:
        t = self.term_primary()
        while self.at("*"):
            self.next()
            rhs = self.term_primary()
            t = Struct("*", (t, rhs))
        return t

    def term_primary(self) -> Term:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return Int(int(tok.text))
        if tok.text == "-" and tok.kind == "op":
            self.next()
            inner = self.term_primary()
            if isinstance(inner, Int):
                return Int(-inner.value)
            return Struct("-", (inner,))
        if tok.kind == "var":
            self.next()
            if tok.text == "_":
                self._anon += 1
                return Var(f"_G{self._anon}")  # each _ is a distinct variable
            return Var(tok.text)
        if tok.kind == "name":
            self.next()
            if self.eat("("):
                args = [self.term()]
                while self.eat(","):
                    args.append(self.term())
                self.expect(")")
                return Struct(tok.text, tuple(args))
            return Struct(tok.text)
        if tok.text == "[":
            return self.list_term()
        if tok.text == "(":
            self.next()
            t = self.term()
            self.expect(")")
            return t
        raise self.fail("term expected")

    def list_term(self) -> Term:
        self.expect("[")
        if self.eat("]"):
            return NIL
        items = [self.term()]
        while self.eat(","):
            items.append(self.term())
        tail: Term = NIL
        if self.eat("|"):
            tail = self.term()
        self.expect("]")
        return make_list(items, tail)

    # -- constraints ----------------------------------------------------------

    def constraint(self) -> Constraint:
        parts = [self.constraint_prim()]
        while self.eat("/\\"):
            parts.append(self.constraint_prim())
        if len(parts) == 1:
            return parts[0]
        return AndC(tuple(parts))

    def constraint_prim(self) -> Constraint:
        if self.at("exists"):
            self.next()
            v = self.peek()
            if v.kind != "var":
                raise self.fail("variable expected after 'exists'")
            self.next()
            self.expect(".")
            return ExistsC(v.text, self.constraint())
        # Relational constraints start with a term; backtrack when the
        # lookahead does not continue one.
        mark = self.i
        try:
            lhs = self.term()
            rel = self.relational_tail(lhs)
            if rel is not None:
                return rel
        except ParseError:
            pass
        self.i = mark
        tok = self.peek()
        if tok.text == "(":
            self.next()
            c = self.constraint()
            self.expect(")")
            return c
        if tok.kind == "name":
            return self.named_constraint()
        raise self.fail("constraint expected")

    def relational_tail(self, lhs: Term) -> Optional[Constraint]:
        tok = self.peek()
        if tok.text in RELOPS and tok.kind == "op":
            self.next()
            rhs = self.term()
            op = RELOPS[tok.text]
            if tok.text == "=":
                return EqC(lhs, rhs)
            return LinRelC(op, lhs, rhs)
        if tok.text == "in" and tok.kind == "name":
            self.next()
            lo = self.term()
            self.expect("..")
            hi = self.term()
            return InExprC(lhs, lo, hi)
        if tok.text == "is" and tok.kind == "name":
            self.next()
            rhs = self.term()
            return LinRelC("=", lhs, rhs)
        return None

    def named_constraint(self) -> Constraint:
        tok = self.next()
        name = tok.text
        if name == "t" and not self.at("("):
            return TRUE
        if name == "f" and not self.at("("):
            return FALSE
        if name in ("all_different", "fd_all_different"):
            self.expect("(")
            arg = self.term()
            self.expect(")")
            return AllDifferentC(arg)
        if name == "fd_domain":
            self.expect("(")
            arg = self.term()
            self.expect(",")
            lo = self.term()
            self.expect(",")
            hi = self.term()
            self.expect(")")
            return ListDomainC(arg, lo, hi)
        args: tuple[Term, ...] = ()
        if self.eat("("):
            items = [self.term()]
            while self.eat(","):
                items.append(self.term())
            self.expect(")")
            args = tuple(items)
        return TokenC(name, args)

    # -- assertions --------------------------------------------------------------

    def assertion(self) -> syn.Assertion:
        lhs = self.assertion_or()
        if self.eat("->"):
            return syn.ImpliesA(lhs, self.assertion())
        return lhs

    def assertion_or(self) -> syn.Assertion:
        f = self.assertion_and()
        while self.eat("\\/"):
            f = syn.OrA(f, self.assertion_and())
        return f

    def assertion_and(self) -> syn.Assertion:
        f = self.assertion_atom()
        while self.eat("/\\"):
            f = syn.AndA(f, self.assertion_atom())
        return f

    def assertion_atom(self) -> syn.Assertion:
        tok = self.peek()
        if tok.text == "(":
            self.next()
            f = self.assertion()
            self.expect(")")
            return f
        if tok.kind == "name" and tok.text in ("pos", "neg", "cons", "icons"):
            self.next()
            self.expect("(")
            c = self.constraint()
            self.expect(")")
            return {"pos": syn.Pos, "neg": syn.Neg, "cons": syn.Cons, "icons": syn.Icons}[
                tok.text
            ](c)
        if tok.kind == "name" and tok.text in ("forall", "exists"):
            self.next()
            pred = self.peek()
            if pred.kind != "name":
                raise self.fail("predicate name expected")
            self.next()
            self.expect("(")
            params = [self.var_name()]
            while self.eat(","):
                params.append(self.var_name())
            self.expect(")")
            self.expect(":")
            body = self.assertion_atom()
            cls = syn.ForAllCalls if tok.text == "forall" else syn.ExistsCall
            return cls(pred.text, tuple(params), body)
        raise self.fail("assertion expected")

    def var_name(self) -> str:
        tok = self.peek()
        if tok.kind != "var":
            raise self.fail("variable expected")
        self.next()
        return tok.text

    def wrapped_assertion(self) -> tuple[str, syn.Assertion]:
        tok = self.peek()
        if tok.kind != "name" or tok.text not in ("inv", "post"):
            raise self.fail("'inv' or 'post' expected")
        self.next()
        self.expect("(")
        f = self.assertion()
        self.expect(")")
        return tok.text, f

    # -- CLP -----------------------------------------------------------------

    def clp_program(self) -> list[syn.Rule]:
        rules = []
        while self.peek().kind != "eof":
            rules.append(self.clp_rule())
        return rules

    def clp_rule(self) -> syn.Rule:
        name, args = self.clp_head()
        body: list[syn.Literal] = []
        if self.eat(":-"):
            body.append(self.clp_literal())
            while self.eat(","):
                body.append(self.clp_literal())
        self.expect(".")
        return syn.Rule(name, args, tuple(body))

    def clp_head(self) -> tuple[str, tuple[Term, ...]]:
        tok = self.peek()
        if tok.kind != "name":
            raise self.fail("predicate name expected")
        self.next()
        args: tuple[Term, ...] = ()
        if self.eat("("):
            items = [self.term()]
            while self.eat(","):
                items.append(self.term())
            self.expect(")")
            args = tuple(items)
        return tok.text, args

    def clp_literal(self) -> syn.Literal:
        tok = self.peek()
        if tok.kind == "name" and tok.text in ("inv", "post") and self.peek(1).text == "(":
            kind, f = self.wrapped_assertion()
            return syn.AssertLit(kind, f)
        if tok.kind == "name" and tok.text in CONSTRAINT_SUGAR:
            return syn.ConstraintLit(self.named_constraint())
        if tok.kind == "name" and tok.text in ("t", "f") and self.peek(1).text != "(":
            return syn.ConstraintLit(self.named_constraint())
        mark = self.i
        try:
            lhs = self.term()
            rel = self.relational_tail(lhs)
            if rel is not None:
                return syn.ConstraintLit(rel)
            if isinstance(lhs, Struct) and lhs.functor not in ("+", "-", "*"):
                return syn.CallLit(lhs.functor, lhs.args)
        except ParseError:
            pass
        self.i = mark
        raise self.fail("body literal expected")

    def clp_goal(self) -> list[syn.Literal]:
        if self.peek().kind == "eof":
            return []
        lits = [self.clp_literal()]
        while self.eat(","):
            lits.append(self.clp_literal())
        self.eat(".")
        if self.peek().kind != "eof":
            raise self.fail("end of goal expected")
        return lits

    # -- CCP ------------------------------------------------------------------

    def ccp_program(self) -> tuple[list[syn.ProcDef], syn.Process]:
        defs: list[syn.ProcDef] = []
        mains: list[syn.Process] = []
        while self.peek().kind != "eof":
            if self.at("def"):
                defs.append(self.proc_def())
            elif self.at("run"):
                self.next()
                mains.append(self.process())
                self.expect(".")
            else:
                raise self.fail("'def' or 'run' expected")
        main = syn.par(mains) if mains else syn.SKIP
        return defs, main

    def proc_def(self) -> syn.ProcDef:
        tok = self.expect("def")
        name_tok = self.peek()
        if name_tok.kind != "name":
            raise self.fail("process name expected")
        self.next()
        params: list[str] = []
        if self.eat("("):
            params.append(self.var_name())
            while self.eat(","):
                params.append(self.var_name())
            self.expect(")")
        self.expect("=")
        body = self.process()
        self.expect(".")
        free = syn.process_free_vars(body) - set(params)
        if free:
            raise ParseError(
                f"unbound variables {sorted(free)} in body of {name_tok.text}",
                tok.line,
                tok.col,
            )
        if len(set(params)) != len(params):
            raise ParseError(
                f"duplicate formal parameters in {name_tok.text}", tok.line, tok.col
            )
        return syn.ProcDef(name_tok.text, tuple(params), body)

    def process(self) -> syn.Process:
        branches = [self.process_branch()]
        while self.eat("+"):
            branches.append(self.process_branch())
        if len(branches) == 1:
            guard_body = branches[0]
            if guard_body[0] is None:
                return guard_body[1]
            return syn.Sum(((guard_body[0], guard_body[1]),))
        resolved = []
        for guard, body in branches:
            if guard is None:
                raise self.fail("every branch of a choice must be an ask")
            resolved.append((guard, body))
        return syn.Sum(tuple(resolved))

    def process_branch(self) -> tuple[Optional[Constraint], syn.Process]:
        if self.at("ask"):
            self.next()
            guard = self.constraint()
            self.expect("then")
            return guard, self.process_par()
        return None, self.process_par()

    def process_par(self) -> syn.Process:
        parts = [self.process_prim()]
        while self.eat("||"):
            parts.append(self.process_prim())
        if len(parts) == 1:
            return parts[0]
        return syn.Par(tuple(parts))

    def process_prim(self) -> syn.Process:
        tok = self.peek()
        if tok.text == "(":
            self.next()
            p = self.process()
            self.expect(")")
            return p
        if tok.kind != "name":
            raise self.fail("process expected")
        if tok.text == "skip":
            self.next()
            return syn.SKIP
        if tok.text == "tell":
            self.next()
            self.expect("(")
            c = self.constraint()
            self.expect(")")
            return syn.Tell(c)
        if tok.text == "local":
            self.next()
            names = [self.var_name()]
            while self.eat(","):
                names.append(self.var_name())
            self.expect("in")
            body = self.process_prim()
            for name in reversed(names):
                body = syn.Local(name, body)
            return body
        if tok.text == "ask":
            # a nested unary ask, e.g. inside local ... in ask c then P
            self.next()
            guard = self.constraint()
            self.expect("then")
            return syn.Sum(((guard, self.process_par()),))
        if tok.text in ("inv", "post"):
            kind, f = self.wrapped_assertion()
            return syn.AssertProbe(kind, f)
        self.next()
        args: tuple[Term, ...] = ()
        if self.eat("("):
            items = [self.term()]
            while self.eat(","):
                items.append(self.term())
            self.expect(")")
            args = tuple(items)
        return syn.Call(tok.text, args)

    # -- sidecar assertion files ---------------------------------------------

    def sidecar(self) -> list[tuple[Optional[tuple[str, int]], str, syn.Assertion]]:
        """Parse ``on p/2: inv(F)`` / ``global: post(F)`` statements.

        Returns (attach-point, kind, formula) triples; attach-point None
        means whole-program.
        """
        out = []
        while self.peek().kind != "eof":
            if self.eat("on"):
                pred = self.peek()
                if pred.kind != "name":
                    raise self.fail("predicate name expected after 'on'")
                self.next()
                self.expect("/")
                arity_tok = self.peek()
                if arity_tok.kind != "int":
                    raise self.fail("arity expected")
                self.next()
                self.expect(":")
                kind, f = self.wrapped_assertion()
                out.append(((pred.text, int(arity_tok.text)), kind, f))
            elif self.eat("global"):
                self.expect(":")
                kind, f = self.wrapped_assertion()
                out.append((None, kind, f))
            else:
                raise self.fail("'on' or 'global' expected")
            self.eat(".")
        return out


# --- public entry points ------------------------------------------------------

def parse_clp(text: str) -> list[syn.Rule]:
    return _Parser(text).clp_program()


def parse_ccp(text: str) -> tuple[list[syn.ProcDef], syn.Process]:
    return _Parser(text).ccp_program()


def parse_goal(text: str) -> list[syn.Literal]:
    return _Parser(text).clp_goal()


def parse_process(text: str) -> syn.Process:
    p = _Parser(text)
    proc = p.process()
    p.eat(".")
    if p.peek().kind != "eof":
        raise p.fail("end of process expected")
    return proc


def parse_constraint(text: str) -> Constraint:
    p = _Parser(text)
    c = p.constraint()
    p.eat(".")
    if p.peek().kind != "eof":
        raise p.fail("end of constraint expected")
    return c


def parse_assertion(text: str) -> tuple[str, syn.Assertion]:
    p = _Parser(text)
    kind, f = p.wrapped_assertion()
    p.eat(".")
    if p.peek().kind != "eof":
        raise p.fail("end of assertion expected")
    return kind, f


def parse_sidecar(text: str):
    return _Parser(text).sidecar()
