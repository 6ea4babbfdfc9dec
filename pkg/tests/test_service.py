"""The trace service: endpoints return the same documents the CLI writes."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from clpslicer.cli import main as cli_main
from clpslicer.service.app import create_app
from clpslicer.tracedoc import canonical_json

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


@pytest.fixture()
def client(tmp_path):
    app = create_app(trace_dir=str(tmp_path / "traces"))
    with TestClient(app) as c:
        c.trace_dir = tmp_path / "traces"
        yield c


def test_health_and_empty_listing(client):
    health = client.get("/health").json()
    assert health["status"] == "ok" and health["version"] == 1
    assert client.get("/traces").json() == {"traces": []}


def test_run_returns_trace_ids_and_answers(client):
    body = {
        "mode": "clp",
        "program": (PROGRAMS / "queens.clp").read_text(),
        "goal": "queens(5, X)",
        "answers": 20,
    }
    got = client.post("/run", json=body).json()
    assert "X = [1,5,4,3,2]" in got["answers"]
    assert got["traces"]
    listed = client.get("/traces").json()["traces"]
    assert set(got["traces"]) <= set(listed)
    doc = client.get(f"/traces/{got['traces'][0]}").json()
    assert doc["version"] == 1 and doc["verdict"] == "success"


def test_unknown_trace_is_404(client):
    assert client.get("/traces/nope").status_code == 404
    assert client.post("/traces/nope/slice", json={}).status_code == 404


def test_parse_errors_are_422(client):
    got = client.post(
        "/run", json={"mode": "clp", "program": "p(X :- q.", "goal": "p(1)"}
    )
    assert got.status_code == 422


def test_slice_endpoint_equals_cli_output(client, tmp_path, capsys):
    # one trace produced by the CLI, the same one uploaded through /run
    trace_dir = tmp_path / "traces"
    code = cli_main(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([10,20], Ans)",
            "--via-ccp",
            "--trace-dir",
            str(trace_dir),
        ]
    )
    capsys.readouterr()
    assert code == 0
    ids = sorted(p.stem for p in trace_dir.glob("*.json"))
    (ident,) = ids
    doc = json.loads((trace_dir / f"{ident}.json").read_text())
    numeric = [
        e["cid"] for e in doc["configs"][-1]["store"] if "[" not in e["printedForm"]
    ]

    via_service = client.post(
        f"/traces/{ident}/slice", json={"cids": numeric}
    ).json()

    out_file = tmp_path / "cli_sliced.json"
    code = cli_main(
        [
            "slice",
            str(trace_dir / f"{ident}.json"),
            "--mark-constraints",
            ",".join(map(str, numeric)),
            "--out",
            str(out_file),
            "--trace-dir",
            str(trace_dir),
        ]
    )
    capsys.readouterr()
    assert code == 0
    via_cli = json.loads(out_file.read_text())
    assert canonical_json(via_service) == canonical_json(via_cli)


def test_run_with_check_reports_violation_and_sliced_trace(client):
    body = {
        "mode": "clp",
        "program": (PROGRAMS / "length_checked.clp").read_text(),
        "goal": "length([10,20], Ans)",
        "viaCcp": True,
        "check": True,
    }
    got = client.post("/run", json=body).json()
    assert got["verdicts"][-1] == "assertion_violation"
    assert got["violation"]["kind"] == "inv"
    assert len(got["violation"]["markingCids"]) == 5
    assert got["slicedTrace"]
    sliced = client.get(f"/traces/{got['slicedTrace']}").json()
    assert sliced["sliced"] is True


def test_invalid_marking_reports_unknown_ids(client):
    body = {
        "mode": "clp",
        "program": (PROGRAMS / "length.clp").read_text(),
        "goal": "length([], N)",
    }
    got = client.post("/run", json=body).json()
    ident = got["traces"][0]
    bad = client.post(f"/traces/{ident}/slice", json={"cids": [404]})
    assert bad.status_code == 422
    assert bad.json()["unknownCids"] == [404]


def test_explorer_flow_matches_cli_slice_byte_for_byte(client, tmp_path, capsys):
    """[SECONDARY] The explorer's request flow: load the exported trace,
    click the five numeric constraint badges, request a slice.  The
    response must be byte-identical to cmd_slice for the same marking and
    carry origin links into the full trace."""
    trace_dir = client.trace_dir
    code = cli_main(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([10,20], Ans)",
            "--via-ccp",
            "--trace-dir",
            str(trace_dir),
        ]
    )
    capsys.readouterr()
    assert code == 0
    (ident,) = client.get("/traces").json()["traces"]
    doc = client.get(f"/traces/{ident}").json()

    final_store = doc["configs"][-1]["store"]
    clicked = [e["cid"] for e in final_store if "[" not in e["printedForm"]]
    assert len(clicked) == 5

    # exactly the body frontend/src/api.ts sends for this marking
    response = client.post(
        f"/traces/{ident}/slice", json={"cids": sorted(clicked), "pids": []}
    )
    assert response.status_code == 200
    via_service = response.content

    out_file = tmp_path / "cli_sliced.json"
    code = cli_main(
        [
            "slice",
            str(trace_dir / f"{ident}.json"),
            "--mark-constraints",
            ",".join(map(str, sorted(clicked))),
            "--out",
            str(out_file),
            "--trace-dir",
            str(trace_dir),
        ]
    )
    capsys.readouterr()
    assert code == 0
    via_cli = json.loads(out_file.read_text())
    assert json.loads(via_service) == via_cli
    assert canonical_json(json.loads(via_service)) == canonical_json(via_cli)

    # provenance: every surviving element names an origin present in the
    # full trace's final configuration
    sliced = json.loads(via_service)
    full_cids = {e["cid"] for e in final_store}
    full_pids = {a["pid"] for c in doc["configs"] for a in c["agents"]}
    for config in sliced["configs"]:
        for entry in config["store"]:
            assert entry["origin"] in full_cids
        for agent in config["agents"]:
            assert agent["origin"] in full_pids


def test_ccp_program_with_check_over_the_service(client):
    got = client.post(
        "/run",
        json={
            "mode": "ccp",
            "program": "run tell(beat) || tell(stop).",
            "assertions": "global: inv(pos(beat) -> neg(stop)).",
            "check": True,
        },
    ).json()
    assert got["verdicts"] == ["assertion_violation"]
    assert got["violation"]["assertion"] == "pos(beat) -> neg(stop)"
    assert len(got["violation"]["markingCids"]) == 2
    sliced = client.get(f"/traces/{got['slicedTrace']}").json()
    kept = [e["printedForm"] for e in sliced["configs"][-1]["store"]]
    assert sorted(kept) == ["beat", "stop"]


def test_repeated_seeded_runs_yield_identical_ids(client):
    body = {
        "mode": "ccp",
        "program": "run tell(X=1) || (ask t then tell(a) + ask t then tell(b)).",
        "policy": "random",
        "seed": 11,
    }
    first = client.post("/run", json=body).json()
    second = client.post("/run", json=body).json()
    assert first["traces"] == second["traces"]


def test_service_and_cli_documents_match_for_same_seed(client, tmp_path, capsys):
    program = (PROGRAMS / "length.clp").read_text()
    got = client.post(
        "/run",
        json={"mode": "clp", "program": program, "goal": "length([5], N)"},
    ).json()
    trace_dir = tmp_path / "cli_traces"
    code = cli_main(
        [
            "run",
            str(PROGRAMS / "length.clp"),
            "--goal",
            "length([5], N)",
            "--trace-dir",
            str(trace_dir),
        ]
    )
    capsys.readouterr()
    assert code == 0
    cli_ids = sorted(p.stem for p in trace_dir.glob("*.json"))
    assert got["traces"] == cli_ids
