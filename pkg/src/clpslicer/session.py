"""Workbench sessions: the operations behind both the CLI and the service.

A session loads programs and assertion sidecars, runs them under the
requested mode and budgets, persists trace documents into the
content-addressed trace directory, and drives assertion-triggered or
manual slicing.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import syntax as syn
from .assertions import Marking, symp
from .engine import (
    ASSERTION_VIOLATION,
    BUDGET_EXCEEDED,
    EngineError,
    MODE_CCP,
    MODE_CLP,
    Monitor,
    SUCCESS,
    Trace,
    run_ccp,
    run_clp,
    undefined_predicates,
)
from .parser import parse_ccp, parse_clp, parse_constraint, parse_goal, parse_process, parse_sidecar
from .slicer import SlicedTrace, mark, slice_trace
from .store import SolverConfig
from .terms import FreshNames, Var, deep_walk, print_term
from .tracedoc import TraceDir, sliced_to_doc, trace_from_doc, trace_to_doc
from .translate import clp_to_ccp, goal_vars, translate_goal

log = logging.getLogger("clpslicer.session")


@dataclass
class SessionConfig:
    mode: str = MODE_CLP  # "clp" | "ccp"
    program_paths: list[str] = field(default_factory=list)
    program_text: Optional[str] = None  # alternative to paths (service)
    goal: str = ""
    assert_paths: list[str] = field(default_factory=list)
    assert_text: Optional[str] = None
    seed: Optional[int] = None
    max_steps: int = 10_000
    answers: int = 10
    solver_nodes: int = 1_000_000
    subset_budget: int = 20_000
    var_closure: bool = True
    via_ccp: bool = False  # run a CLP program through its CCP translation
    policy: str = "leftmost"
    include_failures: bool = False
    trace_dir: Optional[str] = None

    def validate(self) -> None:
        if self.mode not in (MODE_CLP, MODE_CCP):
            raise ValueError(f"unknown mode {self.mode!r}")
        for name, value in (
            ("max_steps", self.max_steps),
            ("answers", self.answers),
            ("solver_nodes", self.solver_nodes),
            ("subset_budget", self.subset_budget),
        ):
            if value <= 0:
                raise ValueError(f"budget {name} must be positive")
        for path in self.program_paths:
            suffix = Path(path).suffix
            if self.mode == MODE_CLP and suffix == ".ccp":
                raise ValueError(f"{path}: .ccp file in clp mode")
            if self.mode == MODE_CCP and suffix == ".clp":
                raise ValueError(f"{path}: .clp file in ccp mode")

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(node_budget=self.solver_nodes)


@dataclass
class LoadedProgram:
    mode: str
    text: str
    rules: list[syn.Rule] = field(default_factory=list)
    defs: list[syn.ProcDef] = field(default_factory=list)
    main: syn.Process = syn.SKIP
    sidecar: list = field(default_factory=list)

    @property
    def program_hash(self) -> str:
        return hashlib.sha256(self.text.encode()).hexdigest()[:16]


def load_program(config: SessionConfig) -> LoadedProgram:
    config.validate()
    chunks = [Path(p).read_text() for p in config.program_paths]
    if config.program_text is not None:
        chunks.append(config.program_text)
    text = "\n".join(chunks)
    sidecar = []
    for p in config.assert_paths:
        sidecar.extend(parse_sidecar(Path(p).read_text()))
    if config.assert_text:
        sidecar.extend(parse_sidecar(config.assert_text))
    if config.mode == MODE_CLP:
        rules = parse_clp(text)
        return LoadedProgram(MODE_CLP, text, rules=rules, sidecar=sidecar)
    defs, main = parse_ccp(text)
    return LoadedProgram(MODE_CCP, text, defs=defs, main=main, sidecar=sidecar)


def _fresh_for(loaded: LoadedProgram, goal_lits) -> FreshNames:
    fresh = FreshNames()
    names: set[str] = set()
    for rule in loaded.rules:
        names |= syn.rule_vars(rule)
    for d in loaded.defs:
        names |= set(d.params) | syn.process_free_vars(d.body)
    for lit in goal_lits or []:
        names |= syn.literal_vars(lit)
    fresh.reserve_all(names)
    return fresh


def _meta(config: SessionConfig, loaded: LoadedProgram) -> dict:
    return {
        "mode": config.mode if not config.via_ccp else "clp-via-ccp",
        "seed": config.seed,
        "budgets": {
            "maxSteps": config.max_steps,
            "answers": config.answers,
            "solverNodes": config.solver_nodes,
            "subsetBudget": config.subset_budget,
        },
        "programHash": loaded.program_hash,
        "goal": config.goal,
    }


@dataclass
class RunResult:
    traces: list[Trace]
    docs: list[dict]
    ids: list[str]
    answers: list[str]
    verdicts: list[str]

    @property
    def budget_exceeded(self) -> bool:
        return any(v == BUDGET_EXCEEDED for v in self.verdicts)


def answer_bindings(trace: Trace, goal_names: list[str]) -> str:
    """Render a success answer projected onto the goal variables."""
    answer = trace.answer
    if answer is None:
        return "no"
    if not goal_names:
        return "t"
    parts = []
    for name in goal_names:
        value = deep_walk(Var(name), answer.subst)
        if value == Var(name):
            dom = answer.domains.get(name)
            if dom is not None and dom.finite:
                parts.append(f"{name} in {dom.lo}..{dom.hi}")
            else:
                parts.append(f"{name} free")
        else:
            parts.append(f"{name} = {print_term(value)}")
    return ", ".join(parts)


def run_session(
    config: SessionConfig, monitor: Optional[Monitor] = None
) -> RunResult:
    loaded = load_program(config)
    trace_dir = TraceDir(config.trace_dir)
    meta = _meta(config, loaded)

    traces: list[Trace] = []
    answers_out: list[str] = []

    if loaded.mode == MODE_CLP:
        goal_lits = parse_goal(config.goal)
        fresh = _fresh_for(loaded, goal_lits)
        goal_names = sorted(goal_vars(goal_lits))
        missing = undefined_predicates(loaded.rules, goal_lits)
        if missing:
            names = ", ".join(f"{n}/{a}" for n, a in sorted(missing))
            raise EngineError(f"undefined predicates: {names}")
        if config.via_ccp:
            defs = clp_to_ccp(loaded.rules)
            process = translate_goal(goal_lits)
            if monitor is not None:
                _register_global_sidecar(monitor, loaded.sidecar)
            trace = run_ccp(
                defs,
                process,
                policy="dfs",
                max_steps=config.max_steps,
                monitor=monitor,
                solver=config.solver,
                fresh=fresh,
            )
            trace.meta = meta
            traces.append(trace)
            if trace.verdict == SUCCESS:
                answers_out.append(answer_bindings(trace, goal_names))
        else:
            successes = 0
            for trace in run_clp(
                loaded.rules,
                goal_lits,
                max_steps=config.max_steps,
                global_budget=max(config.max_steps * 100, 100_000),
                monitor=monitor,
                solver=config.solver,
                fresh=fresh,
                sidecar=loaded.sidecar,
            ):
                trace.meta = meta
                if trace.verdict == SUCCESS:
                    traces.append(trace)
                    answers_out.append(answer_bindings(trace, goal_names))
                    successes += 1
                    if successes >= config.answers:
                        break
                elif trace.verdict == ASSERTION_VIOLATION:
                    traces.append(trace)
                    break
                elif config.include_failures or trace.verdict == BUDGET_EXCEEDED:
                    traces.append(trace)
    else:
        defs = loaded.defs
        process = parse_process(config.goal) if config.goal else loaded.main
        fresh = _fresh_for(loaded, None)
        fresh.reserve_all(syn.process_free_vars(process))
        if monitor is not None:
            _register_global_sidecar(monitor, loaded.sidecar)
        trace = run_ccp(
            defs,
            process,
            policy=config.policy,
            max_steps=config.max_steps,
            seed=config.seed,
            monitor=monitor,
            solver=config.solver,
            fresh=fresh,
        )
        trace.meta = meta
        traces.append(trace)
        if trace.verdict == SUCCESS:
            names = sorted(syn.process_free_vars(process))
            answers_out.append(answer_bindings(trace, names))

    docs = [trace_to_doc(t) for t in traces]
    ids = [trace_dir.save(d) for d in docs]
    return RunResult(traces, docs, ids, answers_out, [t.verdict for t in traces])


def _register_global_sidecar(monitor: Monitor, sidecar: list) -> None:
    # In CCP mode (and via-ccp) only whole-program sidecar assertions make
    # sense; per-predicate ones attach inside run_clp.
    for attach, kind, formula in sidecar:
        if attach is None:
            monitor.register(kind, formula, "global assertion")


@dataclass
class CheckResult:
    run: RunResult
    violation_trace: Optional[Trace]
    marking: Optional[Marking]
    sliced: Optional[SlicedTrace]
    sliced_doc: Optional[dict]
    sliced_id: Optional[str]

    @property
    def violated(self) -> bool:
        return self.violation_trace is not None


def check_session(config: SessionConfig) -> CheckResult:
    """Run under the monitor; on a violation compute symp and auto-slice."""
    monitor = Monitor()
    result = run_session(config, monitor=monitor)
    violation_trace = next(
        (t for t in result.traces if t.verdict == ASSERTION_VIOLATION), None
    )
    if violation_trace is None:
        return CheckResult(result, None, None, None, None, None)
    violation = violation_trace.violation
    fresh = FreshNames()
    marking = symp(
        violation_trace,
        violation.formula,
        violation.index,
        var_closure=config.var_closure,
        subset_budget=config.subset_budget,
        solver=config.solver,
        fresh=fresh,
    )
    sliced = slice_trace(
        violation_trace,
        marking,
        subset_budget=config.subset_budget,
        solver=config.solver,
    )
    doc = sliced_to_doc(sliced)
    ident = TraceDir(config.trace_dir).save(doc)
    return CheckResult(result, violation_trace, marking, sliced, doc, ident)


@dataclass
class SliceRequest:
    cids: Optional[list[int]] = None
    pids: Optional[list[int]] = None
    mark_all: bool = False
    variables: Optional[list[str]] = None
    unexpected: Optional[str] = None  # criterion 3 constraint text
    inconsistent_with: Optional[str] = None  # criterion 4 constraint text
    var_closure: bool = True
    subset_budget: int = 20_000


def marking_for(trace: Trace, request: SliceRequest, solver: SolverConfig) -> Marking:
    final = trace.final
    if request.mark_all:
        return Marking(
            frozenset(cid for cid, _ in final.store.atoms),
            frozenset(pid for pid, _ in final.agents),
        )
    if request.variables:
        return mark(
            final,
            "vars",
            variables=request.variables,
            pids=request.pids,
            var_closure=request.var_closure,
            solver=solver,
        )
    if request.unexpected:
        return mark(
            final,
            "entails",
            constraint=parse_constraint(request.unexpected),
            pids=request.pids,
            subset_budget=request.subset_budget,
            solver=solver,
        )
    if request.inconsistent_with:
        return mark(
            final,
            "inconsistent",
            constraint=parse_constraint(request.inconsistent_with),
            pids=request.pids,
            subset_budget=request.subset_budget,
            solver=solver,
        )
    return mark(final, "explicit", cids=request.cids or [], pids=request.pids)


def slice_document(
    doc: dict,
    request: SliceRequest,
    solver: Optional[SolverConfig] = None,
) -> tuple[dict, SlicedTrace]:
    solver = solver or SolverConfig()
    trace = trace_from_doc(doc, solver)
    marking = marking_for(trace, request, solver)
    sliced = slice_trace(
        trace, marking, subset_budget=request.subset_budget, solver=solver
    )
    return sliced_to_doc(sliced), sliced
