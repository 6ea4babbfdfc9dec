"""Session-level flows: sidecar assertions, CCP checking, budgets."""

from __future__ import annotations

from pathlib import Path

import pytest

from clpslicer.engine import (
    ASSERTION_VIOLATION,
    OBS_BUDGET,
    OBS_TRUE,
    SUCCESS,
    observables_check,
)
from clpslicer.parser import parse_clp, parse_goal
from clpslicer.session import SessionConfig, check_session, run_session
from clpslicer.store import Store
from clpslicer.constraints import EqC, InDomainC
from clpslicer.terms import NIL, Var
from clpslicer.translate import clp_to_ccp, translate_goal

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def test_sidecar_invariant_triggers_like_inline_annotation(tmp_path):
    sidecar = tmp_path / "length.assert"
    sidecar.write_text("on length/2: inv(pos(A2 > 0)).\n")
    result = check_session(
        SessionConfig(
            mode="clp",
            program_paths=[str(PROGRAMS / "length.clp")],
            goal="length([10,20], Ans)",
            assert_paths=[str(sidecar)],
            trace_dir=str(tmp_path),
        )
    )
    assert result.violated
    assert result.violation_trace.violation.kind == "inv"
    assert result.sliced is not None


def test_sidecar_global_post_condition(tmp_path):
    sidecar = tmp_path / "global.assert"
    sidecar.write_text("global: post(neg(Ans = 0)).\n")
    result = check_session(
        SessionConfig(
            mode="clp",
            program_paths=[str(PROGRAMS / "length.clp")],
            goal="length([10,20], Ans)",
            assert_paths=[str(sidecar)],
            trace_dir=str(tmp_path),
        )
    )
    # the buggy program answers Ans=0, so neg(Ans=0) fails at the answer
    assert result.violated
    assert result.violation_trace.verdict == ASSERTION_VIOLATION


def test_satisfied_sidecar_leaves_run_clean(tmp_path):
    sidecar = tmp_path / "ok.assert"
    sidecar.write_text("on length/2: inv(pos(A2 >= 0)).\n")
    result = check_session(
        SessionConfig(
            mode="clp",
            program_paths=[str(PROGRAMS / "length.clp")],
            goal="length([10,20], Ans)",
            assert_paths=[str(sidecar)],
            trace_dir=str(tmp_path),
        )
    )
    assert not result.violated
    assert result.run.answers == ["Ans = 0"]


def test_ccp_mode_check_with_global_sidecar(tmp_path):
    sidecar = tmp_path / "beat.assert"
    sidecar.write_text("global: inv(pos(beat) -> neg(stop)).\n")
    result = check_session(
        SessionConfig(
            mode="ccp",
            program_paths=[str(PROGRAMS / "beat_stop.ccp")],
            assert_paths=[str(sidecar)],
            trace_dir=str(tmp_path),
        )
    )
    assert result.violated
    # both tokens end up in the marking
    assert len(result.marking.cids) == 2
    assert result.sliced_id


def test_mode_extension_mismatch_is_rejected(tmp_path):
    config = SessionConfig(
        mode="ccp", program_paths=[str(PROGRAMS / "length.clp")]
    )
    with pytest.raises(ValueError, match="clp file in ccp mode|.clp"):
        config.validate()


def test_budgets_must_be_positive():
    with pytest.raises(ValueError, match="positive"):
        SessionConfig(answers=0).validate()


def test_seeded_random_policy_is_reproducible(tmp_path):
    config = dict(
        mode="ccp",
        program_paths=[str(PROGRAMS / "beat_stop.ccp")],
        policy="random",
        seed=7,
    )
    a = run_session(SessionConfig(**config, trace_dir=str(tmp_path / "a")))
    b = run_session(SessionConfig(**config, trace_dir=str(tmp_path / "b")))
    assert a.ids == b.ids  # content hashes agree, so the traces are identical


def test_observables_budget_reported_distinctly():
    rules = parse_clp("p(X) :- p(X).\nq(a).")
    defs = clp_to_ccp(rules)
    looping = translate_goal(parse_goal("p(Z)"))
    assert observables_check(defs, looping, EqC(Var("Z"), NIL), budget=50) == OBS_BUDGET
    fine = translate_goal(parse_goal("q(W)"))
    assert (
        observables_check(defs, fine, EqC(Var("W"), Var("W")), budget=50) == OBS_TRUE
    )


def test_stuck_branch_does_not_block_observables():
    # the recursive branch calls an undefined predicate and gets stuck;
    # the base branch still reaches the observable
    rules = parse_clp("p([], []).\np([H1|L1],[H2|L2]) :- c(H1, H2), p(L1, L2).")
    defs = clp_to_ccp(rules)
    goal = translate_goal(parse_goal("p(LA, LB)"))
    assert observables_check(defs, goal, EqC(Var("LA"), NIL)) == OBS_TRUE


def test_empty_integer_domain_is_inconsistent():
    store = Store.empty().add(InDomainC("X", 5, 2))
    assert store.status == "inconsistent"


def test_run_session_caps_answers(tmp_path):
    result = run_session(
        SessionConfig(
            mode="clp",
            program_paths=[str(PROGRAMS / "queens.clp")],
            goal="queens(5, X)",
            answers=4,
            trace_dir=str(tmp_path),
        )
    )
    assert len(result.answers) == 4
    assert all(v == SUCCESS for v in result.verdicts)
