"""Command-line client: run, check, slice, serve.

Exit codes: 0 success, 1 assertion violation, 2 parse or usage error,
3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import EngineError, render_trace
from .parser import ParseError
from .session import (
    SessionConfig,
    SliceRequest,
    check_session,
    run_session,
    slice_document,
)
from .slicer import MarkingError, render_sliced
from .store import BudgetExceededError
from .syntax import print_assertion
from .tracedoc import TraceDir

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_BUDGET = 3


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="clpslicer",
        description="Constraint-logic workbench: run CLP/CCP programs, "
        "monitor assertions, slice traces.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("programs", nargs="+", help="program files (.clp / .ccp)")
        sp.add_argument("--mode", choices=("clp", "ccp"), default=None)
        sp.add_argument("--goal", default="", help="goal literals (clp) or process (ccp)")
        sp.add_argument("--assert-file", action="append", default=[], dest="asserts",
                        help="sidecar .assert file (repeatable)")
        sp.add_argument("--answers", type=int, default=10)
        sp.add_argument("--max-steps", type=int, default=10_000)
        sp.add_argument("--solver-nodes", type=int, default=1_000_000)
        sp.add_argument("--subset-budget", type=int, default=20_000)
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--policy", choices=("leftmost", "random", "dfs"),
                        default="leftmost")
        sp.add_argument("--via-ccp", action="store_true",
                        help="execute a CLP program through its CCP translation")
        sp.add_argument("--no-var-closure", action="store_true",
                        help="strict one-step variable sharing in markings")
        sp.add_argument("--trace-dir", default=None)
        sp.add_argument("--include-failures", action="store_true")

    run_p = sub.add_parser("run", help="run a program and export traces")
    common(run_p)
    run_p.add_argument("--print-trace", action="store_true")

    check_p = sub.add_parser("check", help="run under the assertion monitor; auto-slice on violation")
    common(check_p)
    check_p.add_argument("--print-trace", action="store_true")

    slice_p = sub.add_parser("slice", help="slice an exported trace")
    slice_p.add_argument("trace", help="trace file or trace id")
    slice_p.add_argument("--mark-constraints", default=None,
                         help="comma-separated cids")
    slice_p.add_argument("--mark-pids", default=None, help="comma-separated pids")
    slice_p.add_argument("--mark-all", action="store_true")
    slice_p.add_argument("--vars", default=None,
                         help="criterion 2: comma-separated variables")
    slice_p.add_argument("--unexpected", default=None,
                         help="criterion 3: constraint that should not hold")
    slice_p.add_argument("--inconsistent-with", default=None,
                         help="criterion 4: constraint the store must stay consistent with")
    slice_p.add_argument("--marking-file", default=None,
                         help="JSON file with cids/pids or a criterion spec")
    slice_p.add_argument("--no-var-closure", action="store_true")
    slice_p.add_argument("--subset-budget", type=int, default=20_000)
    slice_p.add_argument("--out", default=None, help="output path for the sliced document")
    slice_p.add_argument("--trace-dir", default=None)

    serve_p = sub.add_parser("serve", help="serve traces and slicing over HTTP")
    serve_p.add_argument("--port", type=int, default=8571)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--trace-dir", default=None)

    return p


def _session_config(args) -> SessionConfig:
    mode = args.mode
    if mode is None:
        suffixes = {Path(p).suffix for p in args.programs}
        mode = "ccp" if suffixes == {".ccp"} else "clp"
    return SessionConfig(
        mode=mode,
        program_paths=list(args.programs),
        goal=args.goal,
        assert_paths=list(args.asserts),
        seed=args.seed,
        max_steps=args.max_steps,
        answers=args.answers,
        solver_nodes=args.solver_nodes,
        subset_budget=args.subset_budget,
        var_closure=not args.no_var_closure,
        via_ccp=args.via_ccp,
        policy=args.policy,
        include_failures=args.include_failures,
        trace_dir=args.trace_dir,
    )


def cmd_run(args) -> int:
    config = _session_config(args)
    result = run_session(config)
    for answer in result.answers:
        print(answer)
    if not result.answers:
        print("no")
    for ident, verdict in zip(result.ids, result.verdicts):
        print(f"trace {ident} [{verdict}]", file=sys.stderr)
    if args.print_trace and result.traces:
        print(render_trace(result.traces[0]))
    return EXIT_BUDGET if result.budget_exceeded and not result.answers else EXIT_OK


def cmd_check(args) -> int:
    config = _session_config(args)
    result = check_session(config)
    for answer in result.run.answers:
        print(answer)
    if not result.violated:
        print("no violations")
        return EXIT_OK
    trace = result.violation_trace
    violation = trace.violation
    print(f"assertion violated: {violation.kind}({print_assertion(violation.formula)})")
    print(f"  at position {violation.index} of trace {result.run.ids[-1]}")
    marked = sorted(result.marking.cids)
    print(f"  marking: {len(marked)} constraint(s) {marked}, "
          f"{len(result.marking.pids)} process(es) {sorted(result.marking.pids)}")
    if result.marking.over_approximated:
        print("  (marking over-approximated: subset budget exceeded)")
    print(f"  sliced trace {result.sliced_id}")
    if args.print_trace:
        print(render_sliced(result.sliced))
    return EXIT_VIOLATION


def _load_trace_doc(args) -> dict:
    path = Path(args.trace)
    if path.exists():
        return json.loads(path.read_text())
    return TraceDir(args.trace_dir).load(args.trace)


def _ints(text: str) -> list[int]:
    return [int(part) for part in text.split(",") if part.strip()]


def cmd_slice(args) -> int:
    doc = _load_trace_doc(args)
    request = SliceRequest(
        cids=_ints(args.mark_constraints) if args.mark_constraints else None,
        pids=_ints(args.mark_pids) if args.mark_pids else None,
        mark_all=args.mark_all,
        variables=args.vars.split(",") if args.vars else None,
        unexpected=args.unexpected,
        inconsistent_with=args.inconsistent_with,
        var_closure=not args.no_var_closure,
        subset_budget=args.subset_budget,
    )
    if args.marking_file:
        spec = json.loads(Path(args.marking_file).read_text())
        request.cids = spec.get("cids", request.cids)
        request.pids = spec.get("pids", request.pids)
        if "vars" in spec:
            request.variables = spec["vars"]
        if "unexpected" in spec:
            request.unexpected = spec["unexpected"]
        if "inconsistentWith" in spec:
            request.inconsistent_with = spec["inconsistentWith"]
    sliced_doc, sliced = slice_document(doc, request)
    ident = TraceDir(args.trace_dir).save(sliced_doc)
    if args.out:
        Path(args.out).write_text(json.dumps(sliced_doc, indent=2, sort_keys=True))
    print(render_sliced(sliced))
    print(f"sliced trace {ident}", file=sys.stderr)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(trace_dir=args.trace_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": cmd_run,
        "check": cmd_check,
        "slice": cmd_slice,
        "serve": cmd_serve,
    }[args.command]
    try:
        return handler(args)
    except (ParseError, MarkingError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except EngineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except KeyError as exc:
        print(f"error: unknown trace {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
