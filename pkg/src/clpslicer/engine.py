"""Enriched operational semantics for CCP and CLP with trace recording.

Every transition is labeled with the reduced agent's pid and, for choice
reductions, the 1-based branch index; the store is kept atomized so each
constraint's contribution is visible to the slicer.  CLP derivations are
explored depth-first with leftmost literal selection and clauses in
program order, yielding one trace per finished derivation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence, Union

from .constraints import EqC, TRUE, TrueC
from .store import DEFAULT_CONFIG, SolverConfig, Store
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
    Skip,
    Sum,
    Tell,
    flatten,
    print_literal,
    print_process,
    subst_literal,
    subst_process,
)
from .terms import FreshNames, Int, Struct, Term, Var, deep_walk, list_parts, walk

RUNNING = "running"
SUCCESS = "success"
FAILURE = "failure"
STUCK = "stuck"
BUDGET_EXCEEDED = "budget_exceeded"
ASSERTION_VIOLATION = "assertion_violation"

MODE_CCP = "ccp"
MODE_CLP = "clp"

LABELING_NAMES = {"labeling", "fd_labeling"}

Agent = Union[Process, Literal]


class EngineError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Configuration:
    agents: tuple[tuple[int, Agent], ...]
    store: Store

    @property
    def hidden(self) -> frozenset[str]:
        return self.store.hidden

    def agent(self, pid: int) -> Agent:
        for p, a in self.agents:
            if p == pid:
                return a
        raise KeyError(pid)


@dataclass(frozen=True)
class TransitionLabel:
    pid: int
    branch: Optional[int] = None
    children: tuple[int, ...] = ()
    added_cids: tuple[int, ...] = ()
    new_hidden: tuple[str, ...] = ()


@dataclass(frozen=True)
class Violation:
    index: int
    kind: str
    formula: object  # syntax.Assertion
    origin: str


@dataclass(eq=False)
class Trace:
    mode: str
    configs: list[Configuration]
    labels: list[TransitionLabel]
    verdict: str = RUNNING
    answer: Optional[Store] = None
    violation: Optional[Violation] = None
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.configs)

    @property
    def final(self) -> Configuration:
        return self.configs[-1]


# --- the assertion monitor ----------------------------------------------------


@dataclass(frozen=True)
class Obligation:
    kind: str  # "inv" | "post"
    formula: object  # syntax.Assertion
    origin: str


class Monitor:
    """Collects assertion obligations and schedules their evaluation.

    Path invariants in a falsity-persistent shape are checked after every
    step; the remaining invariants and all post-conditions only when an
    answer is found.
    """

    def __init__(self) -> None:
        self.obligations: list[Obligation] = []

    def mark(self) -> int:
        return len(self.obligations)

    def rollback(self, mark: int) -> None:
        """Drop obligations registered on an abandoned derivation branch."""
        del self.obligations[mark:]

    def register(self, kind: str, formula, origin: str = "") -> None:
        from .assertions import has_call_quantifier

        if kind == "post" and has_call_quantifier(formula):
            import logging

            logging.getLogger("clpslicer.monitor").warning(
                "ignoring post-condition with call quantifier (meaningless "
                "on empty answers): %s", origin or formula,
            )
            return
        self.obligations.append(Obligation(kind, formula, origin))

    def schedule(self, event: str) -> list[Obligation]:
        """Obligations to evaluate on ``step`` or ``answer``, in declaration order."""
        from .assertions import falsity_persistent

        out = []
        for ob in self.obligations:
            stoppable = ob.kind == "inv" and falsity_persistent(ob.formula)
            if event == "step" and stoppable:
                out.append(ob)
            elif event == "answer" and not (ob.kind == "inv" and stoppable):
                out.append(ob)
        return out

    def check(self, trace: Trace, event: str, fresh: FreshNames) -> Optional[Violation]:
        from .assertions import eval_assertion

        i = len(trace.configs) - 1
        if trace.configs[i].store.status == "inconsistent":
            return None  # a failed path is an ordinary failure, not a symptom
        for ob in self.schedule(event):
            if not eval_assertion(trace, i, ob.formula, fresh=fresh):
                return Violation(i, ob.kind, ob.formula, ob.origin)
        return None


def attach_monitor(assertions: list[tuple[str, object, str]]) -> Monitor:
    """Build a monitor from (kind, formula, origin) triples."""
    monitor = Monitor()
    for kind, formula, origin in assertions:
        monitor.register(kind, formula, origin)
    return monitor


# --- shared run machinery ----------------------------------------------------


class _Run:
    """Mutable state shared along one engine invocation."""

    def __init__(
        self,
        fresh: Optional[FreshNames],
        solver: SolverConfig,
        monitor: Optional[Monitor],
    ) -> None:
        self.fresh = fresh or FreshNames()
        self.solver = solver
        self.monitor = monitor
        self._next_pid = 1

    def pid(self) -> int:
        p = self._next_pid
        self._next_pid += 1
        return p

    def assign_pids(self, agents: Sequence[Agent]) -> list[tuple[int, Agent]]:
        out = []
        for a in agents:
            if isinstance(a, AssertProbe):
                if self.monitor is not None:
                    self.monitor.register(a.kind, a.formula, print_process(a))
                continue
            if isinstance(a, AssertLit):
                if self.monitor is not None:
                    self.monitor.register(a.kind, a.formula, print_literal(a))
                continue
            out.append((self.pid(), a))
        return out


def _replace_agent(
    agents: tuple[tuple[int, Agent], ...], pid: int, new: list[tuple[int, Agent]]
) -> tuple[tuple[int, Agent], ...]:
    out: list[tuple[int, Agent]] = []
    for p, a in agents:
        if p == pid:
            out.extend(new)
        else:
            out.append((p, a))
    return tuple(out)


# --- CCP ----------------------------------------------------------------------


@dataclass(frozen=True)
class Move:
    pid: int
    branch: Optional[int] = None


def enabled_moves(
    config: Configuration, defs: dict[tuple[str, int], ProcDef], run: _Run
) -> list[Move]:
    """All (pid, branch) reductions enabled in the configuration."""
    moves: list[Move] = []
    for pid, agent in config.agents:
        if isinstance(agent, (Tell, Local)):
            moves.append(Move(pid))
        elif isinstance(agent, Sum):
            for k, (guard, _) in enumerate(agent.branches, start=1):
                if isinstance(guard, TrueC) or config.store.entails(guard, run.fresh):
                    moves.append(Move(pid, k))
        elif isinstance(agent, Call):
            if (agent.name, len(agent.args)) in defs:
                moves.append(Move(pid))
        elif isinstance(agent, Skip):
            continue
    return moves


def apply_move(
    config: Configuration,
    move: Move,
    defs: dict[tuple[str, int], ProcDef],
    run: _Run,
) -> tuple[Configuration, TransitionLabel]:
    """One enriched reduction step (R_TELL / R_SUM / R_LOC / R_CALL)."""
    agent = config.agent(move.pid)
    store = config.store
    if isinstance(agent, Tell):
        from .constraints import atomize

        atoms, created = atomize(agent.c, run.fresh, store.subst)
        store, cids = store.add_many(atoms)
        if created:
            store = store.hide(created)
        agents = _replace_agent(config.agents, move.pid, [])
        label = TransitionLabel(
            move.pid, None, (), tuple(cids), tuple(created)
        )
        return Configuration(agents, store), label
    if isinstance(agent, Sum):
        _, body = agent.branches[move.branch - 1]
        new = run.assign_pids(flatten(body))
        agents = _replace_agent(config.agents, move.pid, new)
        label = TransitionLabel(move.pid, move.branch, tuple(p for p, _ in new))
        return Configuration(agents, store), label
    if isinstance(agent, Local):
        nv = run.fresh.fresh_var(agent.var)
        body = subst_process(agent.body, {agent.var: nv}, run.fresh)
        new = run.assign_pids(flatten(body))
        agents = _replace_agent(config.agents, move.pid, new)
        store = store.hide({nv.name})
        label = TransitionLabel(
            move.pid, None, tuple(p for p, _ in new), (), (nv.name,)
        )
        return Configuration(agents, store), label
    if isinstance(agent, Call):
        d = defs[(agent.name, len(agent.args))]
        body = subst_process(d.body, dict(zip(d.params, agent.args)), run.fresh)
        new = run.assign_pids(flatten(body))
        agents = _replace_agent(config.agents, move.pid, new)
        label = TransitionLabel(move.pid, None, tuple(p for p, _ in new))
        return Configuration(agents, store), label
    raise EngineError(f"agent cannot reduce: {agent!r}")


def step_ccp(
    config: Configuration,
    defs: dict[tuple[str, int], ProcDef],
    run: _Run,
    policy: str = "leftmost",
    rng: Optional[random.Random] = None,
    choice: Optional[Move] = None,
) -> Optional[tuple[Configuration, TransitionLabel]]:
    """Apply one step under the given policy; None when quiescent."""
    moves = enabled_moves(config, defs, run)
    if not moves:
        return None
    if choice is not None:
        if choice not in moves:
            raise EngineError(f"injected choice {choice} is not enabled")
        move = choice
    elif policy == "leftmost":
        move = moves[0]
    elif policy == "random":
        move = (rng or random).choice(moves)
    else:
        raise EngineError(f"unknown policy {policy!r}")
    return apply_move(config, move, defs, run)


def initial_configuration(process: Process, run: _Run, solver: SolverConfig) -> Configuration:
    agents = tuple(run.assign_pids(flatten(process)))
    return Configuration(agents, Store.empty(solver))


def run_ccp(
    defs: list[ProcDef] | dict[tuple[str, int], ProcDef],
    process: Process,
    policy: str = "leftmost",
    max_steps: int = 10_000,
    *,
    seed: Optional[int] = None,
    monitor: Optional[Monitor] = None,
    solver: SolverConfig = DEFAULT_CONFIG,
    fresh: Optional[FreshNames] = None,
    injected: Optional[Sequence[Move]] = None,
) -> Trace:
    """Iterate the enriched semantics to quiescence, failure or budget.

    ``policy`` is ``leftmost`` (deterministic), ``random`` (seeded) or
    ``dfs`` (backtrack over choice branches and return the first
    successful computation; used to realize translated CLP programs).
    """
    defs_map = _defs_map(defs)
    if policy == "dfs":
        return _run_ccp_dfs(defs_map, process, max_steps, monitor, solver, fresh)
    run = _Run(fresh, solver, monitor)
    rng = random.Random(seed) if seed is not None else None
    config = initial_configuration(process, run, solver)
    trace = Trace(MODE_CCP, [config], [])
    queue = list(injected) if injected is not None else None
    if not _monitor_ok(trace, run, "step"):
        return trace
    while len(trace.labels) < max_steps:
        if config.store.status == "inconsistent":
            trace.verdict = FAILURE
            return trace
        choice = None
        if queue is not None:
            choice = queue.pop(0) if queue else None
        stepped = step_ccp(config, defs_map, run, policy, rng, choice)
        if stepped is None:
            return _finish_quiescent(trace, run)
        config, label = stepped
        trace.configs.append(config)
        trace.labels.append(label)
        if not _monitor_ok(trace, run, "step"):
            return trace
    trace.verdict = BUDGET_EXCEEDED
    return trace


def _defs_map(defs) -> dict[tuple[str, int], ProcDef]:
    if isinstance(defs, dict):
        return defs
    return {d.key: d for d in defs}


def _monitor_ok(trace: Trace, run: _Run, event: str) -> bool:
    if run.monitor is None:
        return True
    violation = run.monitor.check(trace, event, run.fresh)
    if violation is None:
        return True
    trace.verdict = ASSERTION_VIOLATION
    trace.violation = violation
    return False


def _finish_quiescent(trace: Trace, run: _Run) -> Trace:
    config = trace.configs[-1]
    if config.store.status == "inconsistent":
        trace.verdict = FAILURE
        return trace
    if config.agents:
        trace.verdict = STUCK
    else:
        trace.verdict = SUCCESS
    trace.answer = config.store
    if not _monitor_ok(trace, run, "answer"):
        trace.answer = None
    return trace


def _run_ccp_dfs(
    defs: dict[tuple[str, int], ProcDef],
    process: Process,
    max_steps: int,
    monitor: Optional[Monitor],
    solver: SolverConfig,
    fresh: Optional[FreshNames],
) -> Trace:
    """Depth-first search over choice branches; first success wins.

    The search itself runs unmonitored; the winning path is replayed with
    the monitor attached so obligations fire exactly once, in path order.
    """
    fresh = fresh or FreshNames()
    probe_fresh = FreshNames()
    probe_fresh.restore(fresh.state())
    probe = _Run(probe_fresh, solver, None)
    found = _dfs_search(defs, process, max_steps, probe, solver)
    choices = [
        Move(lbl.pid, lbl.branch) for lbl in found.labels
    ]
    replay = _Run(fresh, solver, monitor)
    config = initial_configuration(process, replay, solver)
    trace = Trace(MODE_CCP, [config], [])
    if not _monitor_ok(trace, replay, "step"):
        return trace
    for move in choices:
        stepped = step_ccp(config, defs, replay, choice=Move(move.pid, move.branch))
        if stepped is None:
            break
        config, label = stepped
        trace.configs.append(config)
        trace.labels.append(label)
        if config.store.status == "inconsistent":
            trace.verdict = FAILURE
            return trace
        if not _monitor_ok(trace, replay, "step"):
            return trace
    if found.verdict in (SUCCESS, STUCK):
        return _finish_quiescent(trace, replay)
    trace.verdict = found.verdict
    return trace


def _dfs_search(
    defs: dict[tuple[str, int], ProcDef],
    process: Process,
    max_steps: int,
    run: _Run,
    solver: SolverConfig,
) -> Trace:
    """Explore branch choices of the leftmost enabled agent, backtracking
    on failure; returns the first successful trace, else the first
    completed one."""
    config = initial_configuration(process, run, solver)
    root = Trace(MODE_CCP, [config], [])
    best: Optional[Trace] = None
    budget = [max_steps]

    def explore(trace: Trace) -> Optional[Trace]:
        nonlocal best
        config = trace.configs[-1]
        if config.store.status == "inconsistent":
            done = _snapshot(trace, FAILURE)
            best = best or done
            return None
        if budget[0] <= 0:
            done = _snapshot(trace, BUDGET_EXCEEDED)
            best = best or done
            return None
        moves = enabled_moves(config, defs, run)
        if not moves:
            verdict = SUCCESS if not config.agents else STUCK
            done = _snapshot(trace, verdict)
            if verdict == SUCCESS:
                done.answer = config.store
                return done
            best = best or done
            return None
        # branch only over the leftmost agent's alternatives
        first_pid = moves[0].pid
        alternatives = [m for m in moves if m.pid == first_pid]
        for move in alternatives:
            budget[0] -= 1
            # abandoned branches must not disturb pid/fresh numbering, so a
            # found path is numbered exactly like a linear (replayable) run
            pid_mark = run._next_pid
            fresh_mark = run.fresh.state()
            nxt, label = apply_move(config, move, defs, run)
            trace.configs.append(nxt)
            trace.labels.append(label)
            result = explore(trace)
            if result is not None:
                return result
            trace.configs.pop()
            trace.labels.pop()
            run._next_pid = pid_mark
            run.fresh.restore(fresh_mark)
        return None

    result = explore(root)
    if result is not None:
        return result
    if best is not None:
        return best
    return _snapshot(root, STUCK)


def _snapshot(trace: Trace, verdict: str) -> Trace:
    return Trace(
        trace.mode, list(trace.configs), list(trace.labels), verdict,
        answer=trace.answer, violation=trace.violation, meta=dict(trace.meta),
    )


OBS_TRUE = "true"
OBS_FALSE = "false"
OBS_BUDGET = "budget_exceeded"


def observables_check(
    defs: list[ProcDef] | dict[tuple[str, int], ProcDef],
    process: Process,
    c,
    budget: int = 10_000,
    *,
    solver: SolverConfig = DEFAULT_CONFIG,
) -> str:
    """Can some execution end in a consistent quiescent store entailing c?

    Exhaustively enumerates the branch choices of the leftmost enabled
    agent (complete for blind choices, whose enabledness never changes).
    Observation happens at quiescent configurations: by monotonicity they
    subsume intermediate stores of terminating executions, and the
    restriction is what makes the CLP correspondence (success-based on
    that side) an equivalence.  Returns "true", "false", or
    "budget_exceeded" — budget exhaustion is distinct from a definite no.
    """
    defs_map = _defs_map(defs)
    run = _Run(FreshNames(), solver, None)
    config = initial_configuration(process, run, solver)
    remaining = [budget]
    exceeded = [False]

    def explore(cfg: Configuration, depth: int) -> bool:
        if cfg.store.status == "inconsistent":
            return False
        if remaining[0] <= 0:
            exceeded[0] = True
            return False
        moves = enabled_moves(cfg, defs_map, run)
        if not moves:
            return cfg.store.entails(c, run.fresh)
        first_pid = moves[0].pid
        for move in (m for m in moves if m.pid == first_pid):
            remaining[0] -= 1
            nxt, _ = apply_move(cfg, move, defs_map, run)
            if explore(nxt, depth + 1):
                return True
        return False

    if explore(config, 0):
        return OBS_TRUE
    return OBS_BUDGET if exceeded[0] else OBS_FALSE


# --- CLP -----------------------------------------------------------------------


def index_rules(program: list[Rule]) -> dict[tuple[str, int], list[Rule]]:
    index: dict[tuple[str, int], list[Rule]] = {}
    for rule in program:
        index.setdefault(rule.key, []).append(rule)
    return index


def undefined_predicates(program: list[Rule], goal: list[Literal]) -> set[tuple[str, int]]:
    index = index_rules(program)
    missing: set[tuple[str, int]] = set()

    def check(lit: Literal) -> None:
        if isinstance(lit, CallLit) and lit.name not in LABELING_NAMES:
            if (lit.name, len(lit.args)) not in index:
                missing.add((lit.name, len(lit.args)))

    for rule in program:
        for lit in rule.body:
            check(lit)
    for lit in goal:
        check(lit)
    return missing


def _rename_rule(rule: Rule, fresh: FreshNames) -> Rule:
    from .syntax import rule_vars
    from .terms import subst_term

    mapping: dict[str, Term] = {
        v: fresh.fresh_var(v) for v in sorted(rule_vars(rule))
    }
    return Rule(
        rule.name,
        tuple(subst_term(t, mapping) for t in rule.head_args),
        tuple(subst_literal(l, mapping) for l in rule.body),
    )


def run_clp(
    program: list[Rule],
    goal: list[Literal],
    *,
    max_steps: int = 10_000,
    global_budget: int = 1_000_000,
    monitor: Optional[Monitor] = None,
    solver: SolverConfig = DEFAULT_CONFIG,
    fresh: Optional[FreshNames] = None,
    sidecar: Optional[list] = None,
) -> Iterator[Trace]:
    """Depth-first CLP resolution, one trace per finished derivation.

    Literal selection is leftmost; clause alternatives are tried in
    program order with chronological backtracking over immutable
    configuration snapshots.  Success traces carry the answer store
    projected onto the goal variables.
    """
    from .translate import goal_vars

    index = index_rules(program)
    missing = undefined_predicates(program, goal)
    if missing:
        names = ", ".join(f"{n}/{a}" for n, a in sorted(missing))
        raise EngineError(f"undefined predicates: {names}")
    run = _Run(fresh, solver, monitor)
    gvars = goal_vars(goal)
    sidecar_by_pred: dict[tuple[str, int], list] = {}
    for entry in sidecar or []:
        attach, kind, formula = entry
        if attach is None:
            run.monitor and run.monitor.register(kind, formula, "global assertion")
        else:
            sidecar_by_pred.setdefault(attach, []).append((kind, formula))

    agents = tuple(run.assign_pids(list(goal)))
    config = Configuration(agents, Store.empty(solver))
    trace = Trace(MODE_CLP, [config], [])
    budget = [global_budget]
    halted = [False]

    if not _monitor_ok(trace, run, "step"):
        yield _snapshot(trace, ASSERTION_VIOLATION)
        return

    def finish(verdict: str) -> Trace:
        done = _snapshot(trace, verdict)
        done.verdict = verdict
        return done

    def derive() -> Iterator[Trace]:
        config = trace.configs[-1]
        if halted[0]:
            return
        if budget[0] <= 0 or len(trace.configs) - 1 >= max_steps:
            yield finish(BUDGET_EXCEEDED)
            return
        if not config.agents:
            if config.store.status == "inconsistent":
                yield finish(FAILURE)
                return
            done = finish(SUCCESS)
            done.answer = config.store.hide(config.store.all_vars() - gvars)
            if run.monitor is not None:
                violation = run.monitor.check(done, "answer", run.fresh)
                if violation is not None:
                    done.verdict = ASSERTION_VIOLATION
                    done.violation = violation
                    done.answer = None
                    halted[0] = True
            yield done
            return
        pid, lit = config.agents[0]
        if isinstance(lit, ConstraintLit):
            yield from _reduce_constraint(config, pid, lit)
            return
        if isinstance(lit, CallLit) and lit.name in LABELING_NAMES:
            yield from _reduce_labeling(config, pid, lit)
            return
        if isinstance(lit, CallLit):
            yield from _reduce_call(config, pid, lit)
            return
        raise EngineError(f"cannot reduce literal {lit!r}")

    def push_and_derive(config: Configuration, label: TransitionLabel) -> Iterator[Trace]:
        budget[0] -= 1
        trace.configs.append(config)
        trace.labels.append(label)
        if not _monitor_ok(trace, run, "step"):
            halted[0] = True
            yield finish(ASSERTION_VIOLATION)
        else:
            yield from derive()
        trace.verdict = RUNNING
        trace.violation = None
        trace.configs.pop()
        trace.labels.pop()

    def _reduce_constraint(config, pid, lit) -> Iterator[Trace]:
        from .constraints import atomize

        atoms, created = atomize(lit.c, run.fresh, config.store.subst)
        store, cids = config.store.add_many(atoms)
        if created:
            store = store.hide(created)
        if store.status == "inconsistent":
            # an inconsistent constraint collapses the whole goal to (empty ; f)
            nxt = Configuration((), store)
        else:
            nxt = Configuration(_replace_agent(config.agents, pid, []), store)
        label = TransitionLabel(pid, None, (), tuple(cids), tuple(created))
        yield from push_and_derive(nxt, label)

    def _reduce_call(config, pid, lit) -> Iterator[Trace]:
        for k, rule in enumerate(index[(lit.name, len(lit.args))], start=1):
            mark = run.monitor.mark() if run.monitor else 0
            renamed = _rename_rule(rule, run.fresh)
            eqs: list[Literal] = [
                ConstraintLit(EqC(s, t)) for s, t in zip(renamed.head_args, lit.args)
            ]
            for kind, formula in sidecar_by_pred.get((lit.name, len(lit.args)), []):
                inst = _instantiate_sidecar(formula, lit.args)
                if run.monitor is not None:
                    run.monitor.register(kind, inst, f"on {lit.name}/{len(lit.args)}")
            delta = eqs + list(renamed.body)
            new = run.assign_pids(delta)
            nxt = Configuration(_replace_agent(config.agents, pid, new), config.store)
            label = TransitionLabel(pid, k, tuple(p for p, _ in new))
            yield from push_and_derive(nxt, label)
            if halted[0]:
                return
            if run.monitor:
                run.monitor.rollback(mark)

    def _reduce_labeling(config, pid, lit) -> Iterator[Trace]:
        if not lit.args:
            raise EngineError("labeling/1 expects a list argument")
        store = config.store
        items = _closed_list(lit.args[0], store)
        if items is None:
            raise EngineError("labeling argument is not a closed list")
        candidates: list[tuple[int, str]] = []
        seen: set[str] = set()
        for item in items:
            t = walk(item, store.subst)
            if isinstance(t, Var):
                dom = store.domains.get(t.name)
                if dom is None or not dom.finite:
                    raise EngineError(
                        f"labeling requires a finite domain for {t.name}"
                    )
                # singleton domains still need the binding told
                if t.name not in seen:
                    seen.add(t.name)
                    candidates.append((dom.size() or 0, t.name))
            elif isinstance(t, Struct):
                raise EngineError("labeling over a non-integer term")
        if not candidates:
            nxt = Configuration(_replace_agent(config.agents, pid, []), store)
            yield from push_and_derive(nxt, TransitionLabel(pid, None))
            return
        candidates.sort(key=lambda s: s[0])  # smallest domain first
        name = candidates[0][1]
        dom = store.domains[name]
        for k, value in enumerate(dom.values(), start=1):
            cid = store.next_cid
            nstore = store.add(EqC(Var(name), Int(value)), cid)
            if nstore.status == "inconsistent":
                nxt = Configuration((), nstore)
                label = TransitionLabel(pid, k, (), (cid,))
                yield from push_and_derive(nxt, label)
            else:
                relit = (run.pid(), lit)
                nxt = Configuration(
                    _replace_agent(config.agents, pid, [relit]), nstore
                )
                label = TransitionLabel(pid, k, (relit[0],), (cid,))
                yield from push_and_derive(nxt, label)
            if halted[0]:
                return

    yield from derive()


def _closed_list(t: Term, store: Store) -> Optional[list[Term]]:
    resolved = deep_walk(t, store.subst)
    items, tail = list_parts(resolved)
    if tail is not None:
        return None
    return items


def _instantiate_sidecar(formula, args: tuple[Term, ...]):
    """Bind the positional argument variables A1..Ak of a sidecar assertion."""
    from .syntax import subst_assertion

    mapping = {f"A{i}": t for i, t in enumerate(args, start=1)}
    return subst_assertion(formula, mapping)


def answers(
    program: list[Rule],
    goal: list[Literal],
    limit: int = 10,
    **kwargs,
) -> list[Trace]:
    """The first ``limit`` successful derivations of the goal."""
    out = []
    for trace in run_clp(program, goal, **kwargs):
        if trace.verdict == SUCCESS:
            out.append(trace)
            if len(out) >= limit:
                break
        elif trace.verdict == ASSERTION_VIOLATION:
            out.append(trace)
            break
    return out


# --- rendering ------------------------------------------------------------


def print_agent(agent: Agent) -> str:
    if isinstance(agent, (ConstraintLit, CallLit, AssertLit)):
        return print_literal(agent)
    return print_process(agent)


def render_configuration(config: Configuration) -> str:
    hidden = " ".join(sorted(config.hidden)) if config.hidden else "0"
    agents = " || ".join(print_agent(a) for _, a in config.agents)
    if not config.agents:
        agents = "[]"
    if config.store.status == "inconsistent":
        store = "f"
    else:
        store = config.store.print_atoms()
    return f"[{hidden} ; {agents} ; {store}]"


def render_trace(trace: Trace) -> str:
    lines = [render_configuration(c) for c in trace.configs]
    return " ->\n".join(lines)
