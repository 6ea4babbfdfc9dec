"""Random terminating programs and traces for property suites.

CLP programs are acyclic (bodies only call lower-numbered predicates) so
every derivation terminates; constraints stay within 0..3 domains so the
solver is exact.  The CCP generator additionally produces guarded asks
over previously tellable tokens, exercising R_SUM entailment.
"""

from __future__ import annotations

import random

from clpslicer import syntax as syn
from clpslicer.constraints import EqC, InDomainC, LinRelC, TRUE, TokenC
from clpslicer.engine import Trace, run_ccp, run_clp
from clpslicer.terms import Int, NIL, Var, cons

CLAUSE_VARS = ["X", "Y", "Z", "W"]


def random_constraint(rng: random.Random, vars_: list[str]):
    v = Var(rng.choice(vars_))
    w = Var(rng.choice(vars_))
    kind = rng.randrange(6)
    if kind == 0:
        return EqC(v, Int(rng.randrange(0, 4)))
    if kind == 1:
        return EqC(v, w)
    if kind == 2:
        lo = rng.randrange(0, 4)
        return InDomainC(v.name, lo, min(3, lo + rng.randrange(0, 3)))
    if kind == 3:
        return LinRelC(rng.choice(["=", "\\=", "<", "=<"]), v, Int(rng.randrange(0, 4)))
    if kind == 4:
        return LinRelC(rng.choice(["\\=", "=<", ">="]), v, w)
    return EqC(v, rng.choice([NIL, cons(Int(rng.randrange(0, 3)), NIL)]))


def random_clp_program(rng: random.Random) -> list[syn.Rule]:
    n_preds = rng.randrange(1, 4)
    arities = {i: rng.randrange(1, 3) for i in range(1, n_preds + 1)}
    rules: list[syn.Rule] = []
    for i in range(1, n_preds + 1):
        for _ in range(rng.randrange(1, 3)):
            arity = arities[i]
            head_vars = CLAUSE_VARS[:arity]
            head = tuple(
                Var(v) if rng.random() < 0.7 else Int(rng.randrange(0, 4))
                for v in head_vars
            )
            body: list[syn.Literal] = []
            for _ in range(rng.randrange(0, 4)):
                if i > 1 and rng.random() < 0.4:
                    callee = rng.randrange(1, i)
                    args = tuple(
                        Var(rng.choice(CLAUSE_VARS[: max(arity, 2)]))
                        if rng.random() < 0.7
                        else Int(rng.randrange(0, 4))
                        for _ in range(arities[callee])
                    )
                    body.append(syn.CallLit(f"p{callee}", args))
                else:
                    body.append(
                        syn.ConstraintLit(
                            random_constraint(rng, CLAUSE_VARS[: max(arity, 2)])
                        )
                    )
            rules.append(syn.Rule(f"p{i}", head, tuple(body)))
    return rules


def top_predicate(rules: list[syn.Rule]) -> tuple[str, int]:
    return max((r.key for r in rules), key=lambda k: int(k[0][1:]))


def random_goal(rng: random.Random, rules: list[syn.Rule]) -> list[syn.Literal]:
    name, arity = top_predicate(rules)
    goal_vars = ["G1", "G2"][:arity]
    args = tuple(
        Var(v) if rng.random() < 0.8 else Int(rng.randrange(0, 4))
        for v in goal_vars
    )
    return [syn.CallLit(name, args)]


def random_check_constraint(rng: random.Random, goal: list[syn.Literal]):
    from clpslicer.syntax import literal_vars

    gvars = sorted(literal_vars(goal[0])) or ["G1"]
    v = Var(rng.choice(gvars))
    kind = rng.randrange(4)
    if kind == 0:
        return EqC(v, Int(rng.randrange(0, 4)))
    if kind == 1:
        return InDomainC(v.name, 0, rng.randrange(0, 4))
    if kind == 2:
        return EqC(v, NIL)
    return LinRelC("=<", v, Int(rng.randrange(0, 4)))


TOKENS = ["a", "b", "c"]


def random_ccp_process(rng: random.Random, depth: int = 0) -> syn.Process:
    roll = rng.random()
    if depth >= 3 or roll < 0.35:
        return syn.Tell(_ccp_constraint(rng))
    if roll < 0.55:
        branches = tuple(
            (_ccp_guard(rng), random_ccp_process(rng, depth + 1))
            for _ in range(rng.randrange(1, 3))
        )
        return syn.Sum(branches)
    if roll < 0.7:
        return syn.Local(
            rng.choice(CLAUSE_VARS), random_ccp_process(rng, depth + 1)
        )
    parts = tuple(random_ccp_process(rng, depth + 1) for _ in range(2))
    return syn.Par(parts)


def _ccp_constraint(rng: random.Random):
    if rng.random() < 0.5:
        return TokenC(rng.choice(TOKENS))
    return EqC(Var(rng.choice(CLAUSE_VARS)), Int(rng.randrange(0, 4)))


def _ccp_guard(rng: random.Random):
    if rng.random() < 0.4:
        return TRUE
    return _ccp_constraint(rng)


def random_traces(seed: int, count: int, mode: str = "mixed") -> list[Trace]:
    """Finished traces from random programs (possibly stuck or failed)."""
    rng = random.Random(seed)
    out: list[Trace] = []
    while len(out) < count:
        if mode == "ccp" or (mode == "mixed" and rng.random() < 0.5):
            process = random_ccp_process(rng)
            trace = run_ccp([], process, max_steps=60)
            if len(trace.configs) > 1:
                out.append(trace)
        else:
            rules = random_clp_program(rng)
            goal = random_goal(rng, rules)
            for trace in run_clp(rules, goal, max_steps=200, global_budget=2000):
                if len(trace.configs) > 1:
                    out.append(trace)
                break
    return out


def random_marking(rng: random.Random, trace: Trace):
    from clpslicer.assertions import Marking

    final = trace.final
    cids = [cid for cid, _ in final.store.atoms]
    pids = [pid for pid, _ in final.agents]
    picked_cids = frozenset(c for c in cids if rng.random() < 0.4)
    picked_pids = frozenset(p for p in pids if rng.random() < 0.3)
    return Marking(picked_cids, picked_pids)
