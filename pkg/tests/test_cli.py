"""The command-line client: run/check/slice behavior and exit codes."""

from __future__ import annotations

import json
from pathlib import Path


from clpslicer.cli import main

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_prints_buggy_length_answer(tmp_path, capsys):
    code, out, err = run_cli(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([10,20], Ans)",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    assert "Ans = 0" in out
    assert "trace" in err and "[success]" in err


def test_run_empty_goal_is_immediate_success(tmp_path, capsys):
    code, out, _ = run_cli(
        ["run", str(PROGRAMS / "length.clp"), "--goal", "", "--trace-dir", str(tmp_path)],
        capsys,
    )
    assert code == 0
    assert out.strip().splitlines()[0] == "t"


def test_run_queens_includes_the_wrong_answer(tmp_path, capsys):
    code, out, _ = run_cli(
        [
            "run",
            str(PROGRAMS / "queens.clp"),
            "--goal",
            "queens(5, X)",
            "--answers",
            "20",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    assert "X = [1,5,4,3,2]" in out


def test_parse_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.clp"
    bad.write_text("p(X :- q.")
    code, _, err = run_cli(["run", str(bad), "--goal", "p(1)"], capsys)
    assert code == 2
    assert "error" in err


def test_check_reports_violation_and_slices(tmp_path, capsys):
    code, out, err = run_cli(
        [
            "check",
            str(PROGRAMS / "length_checked.clp"),
            "--goal",
            "length([10,20], Ans)",
            "--via-ccp",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    assert code == 1
    assert "assertion violated: inv(pos(" in out
    assert "marking: 5 constraint(s)" in out
    assert "sliced trace" in out


def test_check_without_violations_exits_0(tmp_path, capsys):
    code, out, _ = run_cli(
        [
            "check",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([10,20], Ans)",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    assert "no violations" in out


def test_slice_by_explicit_cids_prints_star_listing(tmp_path, capsys):
    code, _, err = run_cli(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([10,20], Ans)",
            "--via-ccp",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    ident = err.split()[1]
    doc = json.loads((tmp_path / f"{ident}.json").read_text())
    numeric = [
        e["cid"]
        for e in doc["configs"][-1]["store"]
        if "[" not in e["printedForm"]
    ]
    assert len(numeric) == 5
    out_file = tmp_path / "sliced.json"
    code, out, _ = run_cli(
        [
            "slice",
            str(tmp_path / f"{ident}.json"),
            "--mark-constraints",
            ",".join(map(str, numeric)),
            "--out",
            str(out_file),
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    assert code == 0
    assert "* + ask t then" in out
    assert out_file.exists()
    sliced = json.loads(out_file.read_text())
    assert sliced["sliced"] is True


def test_slice_vars_criterion_matches_explicit_marking(tmp_path, capsys):
    code, _, err = run_cli(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([10,20], Ans)",
            "--via-ccp",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    ident = err.split()[1]
    doc_path = tmp_path / f"{ident}.json"
    doc = json.loads(doc_path.read_text())
    numeric = [
        e["cid"] for e in doc["configs"][-1]["store"] if "[" not in e["printedForm"]
    ]
    code, out_vars, _ = run_cli(
        ["slice", str(doc_path), "--vars", "Ans", "--trace-dir", str(tmp_path)],
        capsys,
    )
    assert code == 0
    code, out_explicit, _ = run_cli(
        [
            "slice",
            str(doc_path),
            "--mark-constraints",
            ",".join(map(str, numeric)),
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    assert out_vars == out_explicit


def test_slice_mark_all_keeps_all_stores_and_agents(tmp_path, capsys):
    run_cli(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([10], A)",
            "--via-ccp",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    docs = sorted(tmp_path.glob("*.json"))
    original = json.loads(docs[0].read_text())
    code, out, _ = run_cli(
        ["slice", str(docs[0]), "--mark-all", "--trace-dir", str(tmp_path)], capsys
    )
    assert code == 0
    # every constraint of every configuration survives
    final_store = [e["printedForm"] for e in original["configs"][-1]["store"]]
    for printed in final_store:
        assert printed in out
    # no agent collapses to a bare placeholder; the only stars left are the
    # never-taken branches of choice points (the slicer abstracts those
    # unconditionally)
    for line in out.splitlines():
        assert " ; * ;" not in line
        assert "|| *" not in line and "* ||" not in line


def test_slice_unknown_reference_exits_2(tmp_path, capsys):
    run_cli(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([], A)",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    doc = next(iter(sorted(tmp_path.glob("*.json"))))
    code, _, err = run_cli(
        ["slice", str(doc), "--mark-constraints", "999", "--trace-dir", str(tmp_path)],
        capsys,
    )
    assert code == 2
    assert "999" in err


def test_marking_file_spec(tmp_path, capsys):
    run_cli(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([10,20], Ans)",
            "--via-ccp",
            "--trace-dir",
            str(tmp_path),
        ],
        capsys,
    )
    doc = sorted(tmp_path.glob("*.json"))[0]
    spec = tmp_path / "marking.json"
    spec.write_text(json.dumps({"vars": ["Ans"]}))
    code, out, _ = run_cli(
        ["slice", str(doc), "--marking-file", str(spec), "--trace-dir", str(tmp_path)],
        capsys,
    )
    assert code == 0
    assert "Ans=" in out
