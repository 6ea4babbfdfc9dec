"""Enriched semantics: CCP steps and runs, CLP derivations, observables."""

from __future__ import annotations

from pathlib import Path

import pytest

from clpslicer import syntax as syn
from clpslicer.constraints import EqC, TokenC, TRUE
from clpslicer.engine import (
    ASSERTION_VIOLATION,
    EngineError,
    FAILURE,
    Monitor,
    Move,
    OBS_FALSE,
    OBS_TRUE,
    STUCK,
    SUCCESS,
    answers,
    observables_check,
    render_configuration,
    run_ccp,
    run_clp,
    undefined_predicates,
)
from clpslicer.parser import parse_ccp, parse_clp, parse_goal, parse_process
from clpslicer.terms import Int, NIL, Var
from clpslicer.translate import clp_to_ccp, translate_goal

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"

length_rules = parse_clp((PROGRAMS / "length.clp").read_text())


def test_tell_reduces_to_store_atom_with_label():
    trace = run_ccp([], parse_process("tell(X=1)"))
    assert trace.verdict == SUCCESS
    assert len(trace.labels) == 1
    label = trace.labels[0]
    assert label.branch is None and label.added_cids == (1,)
    assert trace.final.store.atom_list() == [EqC(Var("X"), Int(1))]
    assert trace.final.agents == ()


def test_enabled_sum_branch_is_recorded():
    # Q = ask c' then P + ask c then tell(d /\ e), with c already told
    text = "run tell(c) || (ask w then skip + ask c then tell(d /\\ e))."
    defs, main = parse_ccp(text)
    trace = run_ccp(defs, main)
    assert trace.verdict == SUCCESS
    sum_labels = [l for l in trace.labels if l.branch is not None]
    assert [l.branch for l in sum_labels] == [2]
    assert TokenC("d") in trace.final.store.atom_list()
    assert TokenC("e") in trace.final.store.atom_list()


def test_blocked_asks_make_a_stuck_configuration():
    trace = run_ccp([], parse_process("ask w then skip"))
    assert trace.verdict == STUCK
    assert len(trace.configs) == 1


def test_skip_is_quiescent_success():
    trace = run_ccp([], parse_process("skip"))
    assert trace.verdict == SUCCESS and len(trace.configs) == 1


def test_conflicting_tells_fail():
    trace = run_ccp([], parse_process("tell(X=1) || tell(X=2)"))
    assert trace.verdict == FAILURE
    assert trace.final.store.status == "inconsistent"


def test_call_branch_one_reaches_empty_lists():
    program = parse_clp("p([], []).\np([H1|L1],[H2|L2]) :- p(L1, L2).")
    defs = clp_to_ccp(program)
    goal = translate_goal(parse_goal("p(LA, LB)"))
    trace = run_ccp(defs, goal)  # leftmost picks branch 1
    assert trace.verdict == SUCCESS
    store = trace.final.store
    assert store.entails(EqC(Var("LA"), NIL))
    assert store.entails(EqC(Var("LB"), NIL))


def test_local_creates_fresh_hidden_variable():
    trace = run_ccp([], parse_process("local X in tell(X=1)"))
    assert trace.verdict == SUCCESS
    assert len(trace.final.hidden) == 1
    created = next(iter(trace.final.hidden))
    assert created != "X" or created == "X"  # fresh name, tracked as hidden
    assert trace.labels[0].new_hidden == (created,)


def test_run_ccp_is_reproducible():
    defs = clp_to_ccp(length_rules)
    goal = translate_goal(parse_goal("length([10,20], Ans)"))
    t1 = run_ccp(defs, goal, policy="dfs")
    t2 = run_ccp(defs, goal, policy="dfs")
    assert [render_configuration(c) for c in t1.configs] == [
        render_configuration(c) for c in t2.configs
    ]


def test_translated_length_run_matches_listing_shape():
    defs = clp_to_ccp(length_rules)
    goal = translate_goal(parse_goal("length([10,20], Ans)"))
    trace = run_ccp(defs, goal, policy="dfs")
    assert trace.verdict == SUCCESS
    # store atoms: three list equalities, five numeric ones
    atoms = trace.final.store.atom_list()
    assert len(atoms) == 8
    assert trace.final.store.entails(EqC(Var("Ans"), Int(0)))
    # the first configuration is the goal call, the second the blind choice
    assert isinstance(trace.configs[0].agents[0][1], syn.Call)
    assert isinstance(trace.configs[1].agents[0][1], syn.Sum)
    # branch 2 was chosen at every unfolding of the second clause
    chosen = [l.branch for l in trace.labels if l.branch is not None]
    assert chosen == [2, 2, 1]


def test_store_monotonicity_along_traces():
    defs = clp_to_ccp(length_rules)
    goal = translate_goal(parse_goal("length([10,20], Ans)"))
    trace = run_ccp(defs, goal, policy="dfs")
    for a, b in zip(trace.configs, trace.configs[1:]):
        assert set(a.store.cids()) <= set(b.store.cids())


def test_labels_reference_source_configuration():
    defs = clp_to_ccp(length_rules)
    goal = translate_goal(parse_goal("length([10,20], Ans)"))
    trace = run_ccp(defs, goal, policy="dfs")
    for config, label in zip(trace.configs, trace.labels):
        pids = {pid for pid, _ in config.agents}
        assert label.pid in pids
        if label.branch is not None:
            agent = config.agent(label.pid)
            if isinstance(agent, syn.Sum):
                assert 1 <= label.branch <= len(agent.branches)


def test_observables_check_on_translated_goal():
    program = parse_clp("p([], []).\np([H1|L1],[H2|L2]) :- p(L1, L2).")
    defs = clp_to_ccp(program)
    goal = translate_goal(parse_goal("p(LA, LB)"))
    assert observables_check(defs, goal, EqC(Var("LA"), NIL)) == OBS_TRUE
    assert observables_check([], syn.SKIP, TRUE) == OBS_TRUE
    assert (
        observables_check([], parse_process("tell(X=1)"), EqC(Var("X"), Int(2)))
        == OBS_FALSE
    )


def test_injected_choices_replay_a_path():
    defs = clp_to_ccp(length_rules)
    goal = translate_goal(parse_goal("length([], Ans)"))
    found = run_ccp(defs, goal, policy="dfs")
    moves = [Move(l.pid, l.branch) for l in found.labels]
    replay = run_ccp(defs, goal, injected=moves)
    assert replay.verdict == SUCCESS
    assert replay.final.store.entails(EqC(Var("Ans"), Int(0)))


# --- CLP ----------------------------------------------------------------


def test_clp_first_answer_of_buggy_length_entails_zero():
    goal = parse_goal("length([10,20], Ans)")
    got = answers(length_rules, goal, limit=1)
    assert len(got) == 1 and got[0].verdict == SUCCESS
    assert got[0].answer.entails(EqC(Var("Ans"), Int(0)))
    # locals are hidden in the answer, the goal variable stays observable
    assert "Ans" not in got[0].answer.hidden


def test_clp_failure_trace_ends_with_empty_goal_and_f():
    rules = parse_clp("fail_c :- X = 1, X = 2.")
    traces = list(run_clp(rules, parse_goal("fail_c")))
    assert [t.verdict for t in traces] == [FAILURE]
    final = traces[0].final
    assert final.agents == ()
    assert final.store.status == "inconsistent"


def test_clp_enumerates_alternatives_in_clause_order():
    rules = parse_clp("pick(1).\npick(2).\npick(3).")
    goal = parse_goal("pick(X)")
    got = [t.answer for t in answers(rules, goal, limit=5)]
    values = [a.subst[next(iter(a.free_vars() & {"X"}))] for a in got]
    assert [v.value for v in values] == [1, 2, 3]


def test_clp_labeling_orders_values_ascending():
    rules = parse_clp("pair(X, Y) :- X in 1..2, Y in 1..2, X #\\= Y, labeling([X, Y]).")
    got = answers(rules, parse_goal("pair(A, B)"), limit=5)
    assert len(got) == 2
    pairs = []
    for t in got:
        sub = t.answer.subst
        walk = lambda n: t.answer.subst.get(n)
        a = [v for k, v in sub.items() if k.startswith("X")]
        pairs.append(t.answer)
    assert got[0].answer.entails(EqC(Var("A"), Int(1)))
    assert got[1].answer.entails(EqC(Var("A"), Int(2)))


def test_undefined_predicates_are_reported():
    rules = parse_clp("p(X) :- q(X).")
    assert undefined_predicates(rules, parse_goal("p(1)")) == {("q", 1)}
    with pytest.raises(EngineError, match="undefined"):
        list(run_clp(rules, parse_goal("p(1)")))


def test_empty_goal_succeeds_immediately():
    traces = list(run_clp([], []))
    assert [t.verdict for t in traces] == [SUCCESS]
    assert traces[0].answer.print_atoms() == "t"


def test_budget_exceeded_is_a_verdict():
    rules = parse_clp("loop :- loop.")
    got = list(run_clp(rules, parse_goal("loop"), max_steps=20, global_budget=50))
    assert got and all(t.verdict == "budget_exceeded" for t in got)


# --- monitors -----------------------------------------------------------


def test_inv_pos_on_buggy_length_violates_at_answer():
    rules = parse_clp((PROGRAMS / "length_checked.clp").read_text())
    goal = parse_goal("length([10,20], Ans)")
    monitor = Monitor()
    traces = list(run_clp(rules, goal, monitor=monitor))
    assert traces[-1].verdict == ASSERTION_VIOLATION
    violation = traces[-1].violation
    assert violation is not None
    assert violation.index == len(traces[-1].configs) - 1
    # the failing instance talks about the first unfolding's M
    assert violation.kind == "inv"


def test_no_assertions_leaves_run_unchanged():
    goal = parse_goal("length([10,20], Ans)")
    plain = answers(length_rules, goal, limit=1)
    monitored = answers(length_rules, goal, limit=1, monitor=Monitor())
    assert plain[0].verdict == monitored[0].verdict == SUCCESS


def test_conditional_invariant_stops_mid_run():
    defs, main = parse_ccp((PROGRAMS / "beat_stop.ccp").read_text())
    from clpslicer.parser import parse_assertion

    kind, f = parse_assertion("inv(pos(beat) -> neg(stop))")
    monitor = Monitor()
    monitor.register(kind, f, "conditional invariant")
    trace = run_ccp(defs, main, monitor=monitor)
    assert trace.verdict == ASSERTION_VIOLATION
    # violation at the first configuration entailing both tokens
    n = trace.violation.index
    store = trace.configs[n].store
    assert store.entails(TokenC("beat")) and store.entails(TokenC("stop"))
    before = trace.configs[n - 1].store
    assert not (before.entails(TokenC("beat")) and before.entails(TokenC("stop")))
