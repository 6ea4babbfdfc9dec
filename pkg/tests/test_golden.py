"""Golden renderings: the printed trace format is a stable interface."""

from __future__ import annotations

from pathlib import Path

from clpslicer.engine import render_trace
from clpslicer.session import SessionConfig, check_session
from clpslicer.slicer import render_sliced

GOLDEN = Path(__file__).resolve().parent / "golden"
PROGRAMS = Path(__file__).resolve().parent.parent / "programs"


def _checked(tmp_path):
    return check_session(
        SessionConfig(
            mode="clp",
            program_paths=[str(PROGRAMS / "length_checked.clp")],
            goal="length([10,20], Ans)",
            via_ccp=True,
            trace_dir=str(tmp_path),
        )
    )


def test_full_trace_rendering_is_stable(tmp_path):
    result = _checked(tmp_path)
    expected = (GOLDEN / "length_full.txt").read_text()
    assert render_trace(result.violation_trace) + "\n" == expected


def test_sliced_trace_rendering_is_stable(tmp_path):
    result = _checked(tmp_path)
    expected = (GOLDEN / "length_sliced.txt").read_text()
    assert render_sliced(result.sliced) + "\n" == expected
