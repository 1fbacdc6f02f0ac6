"""Command-line entry point: ``valnet run|repl|validate|scenarios``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from ..calculi import registry
from ..scenarios import bundled, scenario_path
from .session import Session, validate_document
from .syntax import ParseError, parse

EXIT_OK, EXIT_STATEMENT, EXIT_PARSE = 0, 1, 2


def _read(source: str) -> str:
    path = Path(source)
    if not path.exists() and source in bundled():
        path = scenario_path(source)
    return path.read_text(encoding="utf-8")


def _load(source: str):
    try:
        text = _read(source)
    except OSError as exc:
        print(f"error: cannot read {source}: {exc.strerror or exc}", file=sys.stderr)
        return None
    try:
        return parse(text)
    except ParseError as exc:
        print(f"{source}:{exc}", file=sys.stderr)
        return None


def cmd_run(args) -> int:
    doc = _load(args.file)
    if doc is None:
        return EXIT_PARSE
    session = Session(calculus=args.calculus, normalized=not args.unnormalized, oracle_check=args.oracle_check)
    return session.run(doc)


def cmd_validate(args) -> int:
    doc = _load(args.file)
    if doc is None:
        return EXIT_PARSE
    return validate_document(doc)


def cmd_repl(args) -> int:
    session = Session(calculus=args.calculus, normalized=not args.unnormalized)
    status = EXIT_OK
    if args.file:
        doc = _load(args.file)
        if doc is None:
            return EXIT_PARSE
        status = session.run(doc)
    interactive = sys.stdin.isatty()
    buffer = ""
    while True:
        if interactive:
            sys.stdout.write("... " if buffer else "> ")
            sys.stdout.flush()
        line = sys.stdin.readline()
        if not line:
            break
        buffer += line
        try:
            doc = parse(buffer, registry=session.registry, variables={
                n: v.frame for n, v in session.system.variables.items()
            }, relations=dict(session.system.relations))
        except ParseError as exc:
            if exc.code == "eof":
                continue
            print(f"<stdin>:{exc}", file=sys.stderr)
            status = max(status, EXIT_STATEMENT)
            buffer = ""
            continue
        buffer = ""
        if session.run(doc):
            status = EXIT_STATEMENT
    if buffer.strip():
        print("error: incomplete statement at end of input", file=sys.stderr)
        status = EXIT_STATEMENT
    return status


def cmd_scenarios(args) -> int:
    for name in bundled():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="valnet", description="Propagate uncertainty in valuation networks.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a network document")
    run.add_argument("file", help="document path, or the name of a bundled scenario")
    run.add_argument("--calculus", default="probability", choices=registry.names(),
                     help="calculus active before the first statement (default: probability)")
    run.add_argument("--unnormalized", action="store_true", help="make bare 'propagate' unnormalized")
    run.add_argument("--oracle-check", action="store_true",
                     help="compare every propagation against brute-force global evaluation")
    run.set_defaults(func=cmd_run)

    repl = sub.add_parser("repl", help="load a document, then read statements from standard input")
    repl.add_argument("file", nargs="?")
    repl.add_argument("--calculus", default="probability", choices=registry.names())
    repl.add_argument("--unnormalized", action="store_true")
    repl.set_defaults(func=cmd_repl)

    val = sub.add_parser("validate", help="parse a document and check its Markov trees")
    val.add_argument("file")
    val.set_defaults(func=cmd_validate)

    sc = sub.add_parser("scenarios", help="list bundled scenario documents")
    sc.set_defaults(func=cmd_scenarios)
    return p


def main(argv=None) -> int:
    if hasattr(sys.stdout, "reconfigure"):
        sys.stdout.reconfigure(encoding="utf-8")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
