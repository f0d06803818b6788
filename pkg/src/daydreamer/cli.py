"""Command line entry points: run, serve, report."""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

from .domain import load_domain, load_persona, parse_script
from .engine import Engine, TRACE_LEVELS, render_event, run_script
from .episodes import EpisodicMemory
from .report import build_report
from .server import DEFAULT_PORT, serve


def _data_path(name: str) -> Path:
    return Path(str(resources.files("daydreamer").joinpath("data", name)))


def _add_session_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--domain",
        default=str(_data_path("nuart_domain.cd")),
        help="domain declarations file",
    )
    parser.add_argument(
        "--persona",
        default=str(_data_path("nuart_persona.cd")),
        help="persona declarations file",
    )
    parser.add_argument(
        "--memory",
        default=str(_data_path("nuart_memory.cd")),
        help="episodic memory file to preload; pass 'none' to start empty",
    )
    parser.add_argument("--seed", type=int, default=None, help="shuffle rule order")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="daydreamer",
        description="Run, serve, or report on daydreaming sessions.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    run_p = sub.add_parser("run", help="run a scripted or piped session")
    _add_session_args(run_p)
    run_p.add_argument("--script", default=None, help="session script; stdin if omitted")
    run_p.add_argument(
        "--trace-level",
        choices=TRACE_LEVELS,
        default="banner",
        help="how much of the session to print",
    )
    run_p.add_argument("--event-log", default=None, help="write events as JSON lines")
    run_p.add_argument("--save-memory", default=None, help="write episodic memory after the run")
    run_p.add_argument("--max-cycles", type=int, default=100, help="cap for until-quiescent")

    serve_p = sub.add_parser("serve", help="serve sessions over TCP as JSON lines")
    _add_session_args(serve_p)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=DEFAULT_PORT)

    report_p = sub.add_parser("report", help="render figures and CSV from an event log")
    report_p.add_argument("event_log", help="JSON lines file written by run --event-log")
    report_p.add_argument("--out", default=None, help="output directory (default: <log>_report)")

    return parser


def _load_memory(value: Optional[str]) -> Optional[EpisodicMemory]:
    if not value or value.lower() == "none":
        return None
    return EpisodicMemory.load(value)


def _run(args: argparse.Namespace) -> int:
    domain = load_domain(args.domain)
    persona = load_persona(args.persona)
    memory = _load_memory(args.memory)
    engine = Engine(
        domain, persona, memory=memory, seed=args.seed, max_cycles=args.max_cycles
    )

    log_handle = open(args.event_log, "w", encoding="utf-8") if args.event_log else None

    def render_sink(event) -> None:
        for line in render_event(event, args.trace_level):
            print(line)

    def log_sink(event) -> None:
        assert log_handle is not None
        log_handle.write(json.dumps(event.to_json()) + "\n")

    engine.sinks.append(render_sink)
    if log_handle is not None:
        engine.sinks.append(log_sink)

    try:
        if args.script:
            text = Path(args.script).read_text(encoding="utf-8")
        else:
            text = sys.stdin.read()
        run_script(engine, parse_script(text))
    finally:
        if log_handle is not None:
            log_handle.close()
    if args.save_memory:
        engine.memory.save(args.save_memory)
    return 0


def _serve(args: argparse.Namespace) -> int:
    domain = load_domain(args.domain)
    persona = load_persona(args.persona)
    memory_path = args.memory
    if not memory_path or memory_path.lower() == "none":
        memory_path = None
    server = serve(
        domain,
        persona,
        memory_path=memory_path,
        host=args.host,
        port=args.port,
        seed=args.seed,
    )
    host, port = server.server_address[:2]
    print(f"listening on {host}:{port}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _report(args: argparse.Namespace) -> int:
    out_dir = args.out or f"{Path(args.event_log).with_suffix('')}_report"
    written = build_report(args.event_log, out_dir)
    for path in written:
        print(path)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.subcommand == "run":
        return _run(args)
    if args.subcommand == "serve":
        return _serve(args)
    if args.subcommand == "report":
        return _report(args)
    raise AssertionError(f"unhandled subcommand {args.subcommand}")


if __name__ == "__main__":
    sys.exit(main())
