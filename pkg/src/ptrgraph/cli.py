"""Command-line driver.

Exit codes: 0 success, 2 constraint violation, 3 runtime error (null
dereference and friends), 4 parse error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from ptrgraph import kernel_backend
from ptrgraph.constraints import RI_FORMULA, WF_FORMULA
from ptrgraph.errors import (
    PtrGraphError,
    SchemaViolation,
    SourceError,
    UnsupportedVersion,
)
from ptrgraph.frontend import parse_declarations
from ptrgraph.io_export import (
    config_to_json,
    from_json,
    graph_digest,
    to_dot,
    to_json,
    trace_to_json,
)
from ptrgraph.simulator import (
    SimConfig,
    Session,
    Trace,
    apply_what_if,
    explore,
    model_check,
    new_session,
    run as run_program,
    step,
    undo,
    what_if_matches,
)

EXIT_OK = 0
EXIT_VIOLATION = 2
EXIT_RUNTIME = 3
EXIT_PARSE = 4


def _exit_code_for(exc: PtrGraphError) -> int:
    if isinstance(exc, (SourceError, SchemaViolation, UnsupportedVersion)):
        return EXIT_PARSE
    return EXIT_RUNTIME


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pool", type=int, default=8, help="free address pool size")
    p.add_argument("--strict-c", action="store_true", help="report C undefined behaviour instead of modelling it")
    p.add_argument("--materialize-addresses", action="store_true", help="allocate an address when & hits an unaddressed variable")
    p.add_argument("--ignore-names", action="store_true", help="ignore the name attribute when collapsing isomorphic states")


def _config(args: argparse.Namespace) -> SimConfig:
    return SimConfig(
        address_pool=args.pool,
        strict_c=args.strict_c,
        materialize_addresses=args.materialize_addresses,
        ignore_names=args.ignore_names,
    )


def _parse_ints(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(part) for part in text.split(",")]


def _load_decls(path: str):
    return parse_declarations(Path(path).read_text())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ptrgraph",
        description="Simulate C pointer statements as graph rewrites.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a program in batch mode")
    p_run.add_argument("decls", help="declarations file (.pgs)")
    p_run.add_argument("program", help="program file (.pgs), one statement per line")
    p_run.add_argument("--stdin-ints", default="", help="comma-separated ints for scanf")
    p_run.add_argument("--export-trace", help="write the trace JSON here")
    p_run.add_argument("--dot-frames", help="write one DOT file per state into this directory")
    _add_config_flags(p_run)

    p_repl = sub.add_parser("repl", help="interactive stepping session")
    p_repl.add_argument("decls", help="declarations file (.pgs)")
    p_repl.add_argument("--stdin-ints", default="", help="comma-separated ints for scanf")
    _add_config_flags(p_repl)

    p_check = sub.add_parser("check", help="well-formedness and referential integrity of a graph JSON")
    p_check.add_argument("graph", help="GraphDocument JSON file")

    p_explore = sub.add_parser("explore", help="bounded state-space exploration")
    p_explore.add_argument("decls", help="declarations file (.pgs)")
    p_explore.add_argument("--rules", required=True, help="comma-separated rule names")
    p_explore.add_argument("--depth", type=int, required=True)
    p_explore.add_argument("--budget", type=int, default=10_000)
    p_explore.add_argument("--export", help="write the LTS JSON here")
    _add_config_flags(p_explore)

    p_serve = sub.add_parser("serve", help="start the HTTP API")
    p_serve.add_argument("--port", type=int, default=None, help="defaults to PTRGRAPH_PORT or 8080")
    p_serve.add_argument("--data-dir", default=None, help="session persistence directory")
    p_serve.add_argument("--ui", default=None, help="static UI bundle to serve under /ui")

    sub.add_parser("openapi", help="print the OpenAPI description of the HTTP API")
    sub.add_parser("version", help="print version and kernel backend")
    return parser


def cmd_run(args: argparse.Namespace) -> int:
    try:
        decls = _load_decls(args.decls)
        program = Path(args.program).read_text()
        trace = run_program(decls, program, _parse_ints(args.stdin_ints), _config(args))
    except PtrGraphError as exc:
        print(f"error[{exc.kind}]: {exc.message}", file=sys.stderr)
        return _exit_code_for(exc)

    for s in trace.steps:
        rule = s.rule_name or "-"
        extra = f"  // prints {s.output}" if s.output is not None else ""
        print(f"[{s.index + 1}] {s.statement_text}  ->  {rule}{extra}")
    if trace.transcript:
        print("output:", " ".join(trace.transcript))

    if args.export_trace:
        Path(args.export_trace).write_text(json.dumps(trace_to_json(trace), indent=2))
    if args.dot_frames:
        frames = Path(args.dot_frames)
        frames.mkdir(parents=True, exist_ok=True)
        for i, state in enumerate(trace.states):
            diff = trace.steps[i - 1].diff if i > 0 else None
            (frames / f"state{i:03d}.dot").write_text(
                to_dot(state, diff, title=f"state {i}")
            )

    wf = model_check(trace, WF_FORMULA)
    ri = model_check(trace, RI_FORMULA)
    if trace.error is not None:
        print(f"error[{trace.error.kind}]: {trace.error.message}", file=sys.stderr)
        return _exit_code_for(trace.error)
    if not wf.holds or not ri.holds or trace.violated_reports():
        which = "well-formedness" if not wf.holds else "referential integrity"
        print(f"constraint violation: {which}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    try:
        doc = json.loads(Path(args.graph).read_text())
        g = from_json(doc)
    except json.JSONDecodeError as exc:
        print(f"error[SyntaxError]: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PtrGraphError as exc:
        print(f"error[{exc.kind}]: {exc.message}", file=sys.stderr)
        return _exit_code_for(exc)
    from ptrgraph.constraints import check_referential_integrity, check_wellformed

    violated = False
    for report in check_wellformed(g) + check_referential_integrity(g):
        mark = "ok " if report.holds else "VIOLATED"
        witness = f"  witness={report.witness}" if report.witness else ""
        print(f"{mark:8s} {report.constraint}{witness}")
        violated = violated or not report.holds
    return EXIT_VIOLATION if violated else EXIT_OK


def cmd_explore(args: argparse.Namespace) -> int:
    try:
        decls = _load_decls(args.decls)
        session = new_session(decls, _config(args))
        lts = explore(
            session.graph,
            [r.strip() for r in args.rules.split(",") if r.strip()],
            args.depth,
            ignore_names=args.ignore_names,
            state_budget=args.budget,
        )
    except PtrGraphError as exc:
        print(f"error[{exc.kind}]: {exc.message}", file=sys.stderr)
        return _exit_code_for(exc)
    print(f"states: {len(lts.states)}  transitions: {len(lts.transitions)}")
    if args.export:
        doc = {
            "version": 1,
            "states": [to_json(s) for s in lts.states],
            "digests": [graph_digest(s) for s in lts.states],
            "transitions": [t.to_dict() for t in lts.transitions],
        }
        Path(args.export).write_text(json.dumps(doc, indent=2))
    return EXIT_OK


_REPL_HELP = """commands:
  <statement>            execute a C statement (e.g. s = *agep;)
  :rules                 list catalog rules
  :matches <rule>        list current matches of a rule
  :apply <rule> <i>      apply the i-th match as a what-if step
  :undo                  undo the last step
  :check <formula>       check G(...) over the trace so far
  :state                 print the current graph as JSON
  :dot [file]            print (or write) the current graph as DOT
  :trace                 list executed steps
  :help                  this text
  :quit                  leave
"""


def cmd_repl(args: argparse.Namespace) -> int:
    try:
        decls = _load_decls(args.decls)
        session = new_session(decls, _config(args), _parse_ints(args.stdin_ints))
    except PtrGraphError as exc:
        print(f"error[{exc.kind}]: {exc.message}", file=sys.stderr)
        return _exit_code_for(exc)
    print(f"ptrgraph repl: {len(session.graph.nodes)} nodes; :help for commands")
    while True:
        try:
            line = input("ptr> ").strip()
        except EOFError:
            print()
            return EXIT_OK
        if not line:
            continue
        if line in (":quit", ":q", ":exit"):
            return EXIT_OK
        try:
            _repl_dispatch(session, line)
        except PtrGraphError as exc:
            print(f"error[{exc.kind}]: {exc.message}")
    return EXIT_OK


def _repl_dispatch(session: Session, line: str) -> None:
    if line == ":help":
        print(_REPL_HELP, end="")
        return
    if line == ":rules":
        from ptrgraph.model import rule_catalog

        for name, rule in sorted(rule_catalog().items()):
            print(f"  {name:28s} {rule.description}")
        print("  pointerArrayAt(k)            indexed array binding, e.g. pointerArrayAt(3)")
        return
    if line.startswith(":matches"):
        _, _, rule_name = line.partition(" ")
        for m in what_if_matches(session, rule_name.strip()):
            print(f"  [{m.index}] {m.description}")
        return
    if line.startswith(":apply"):
        parts = line.split()
        if len(parts) != 3:
            print("usage: :apply <rule> <index>")
            return
        result = apply_what_if(session, parts[1], int(parts[2]))
        _print_step(session, result)
        return
    if line == ":undo":
        undo(session)
        print(f"undone; {len(session.history)} steps remain")
        return
    if line.startswith(":check"):
        _, _, formula = line.partition(" ")
        verdict = model_check(session, formula.strip())
        if verdict.holds:
            print("holds on all states")
        else:
            print(f"violated at state {verdict.violation_index}")
            for r in verdict.reports:
                if not r.holds:
                    print(f"  {r.constraint}: {r.detail} witness={r.witness}")
        return
    if line == ":state":
        print(json.dumps(to_json(session.graph), indent=2))
        return
    if line.startswith(":dot"):
        _, _, path = line.partition(" ")
        diff = session.history[-1].diff if session.history else None
        text = to_dot(session.graph, diff)
        if path.strip():
            Path(path.strip()).write_text(text)
            print(f"wrote {path.strip()}")
        else:
            print(text, end="")
        return
    if line == ":trace":
        for s in session.history:
            print(f"  [{s.index + 1}] {s.statement_text}  ->  {s.rule_name or '-'}")
        return
    if line.startswith(":"):
        print(f"unknown command {line.split()[0]!r}; :help lists commands")
        return
    result = step(session, line)
    _print_step(session, result)


def _print_step(session: Session, result) -> None:
    rule = result.rule_name or "-"
    print(f"applied {rule}")
    if result.output is not None:
        print(f"prints: {result.output}")
    for report in result.reports:
        if not report.holds:
            print(f"  VIOLATED {report.constraint}  witness={report.witness}")


def cmd_serve(args: argparse.Namespace) -> int:
    from ptrgraph.service import ServiceConfig, serve_forever

    port = args.port
    if port is None:
        port = int(os.environ.get("PTRGRAPH_PORT", "8080"))
    config = ServiceConfig(
        port=port,
        data_dir=args.data_dir or os.environ.get("PTRGRAPH_DATA_DIR"),
        ui_dir=args.ui,
    )
    serve_forever(config)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args)
    if args.command == "repl":
        return cmd_repl(args)
    if args.command == "check":
        return cmd_check(args)
    if args.command == "explore":
        return cmd_explore(args)
    if args.command == "serve":
        return cmd_serve(args)
    if args.command == "openapi":
        from ptrgraph.service import openapi_document

        print(json.dumps(openapi_document(), indent=2))
        return EXIT_OK
    print(f"ptrgraph {__import__('ptrgraph').__version__} (kernel: {kernel_backend()})")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
