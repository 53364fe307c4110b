"""Command-line front end: ``aoslice parse|graph|run|slice``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

from aoslice.aosg import Aosg, build_aosg
from aoslice.errors import ExecutionError, InvariantViolation, MiniAJError
from aoslice.interp import DEFAULT_STEP_BUDGET, BUDGET_ENV, Execution, budget_from_env, run
from aoslice.lang import ast as A
from aoslice.lang import parse_source
from aoslice.slicer import SliceState, SlicingCriterion, initialize

EXIT_OK = 0
EXIT_USER = 1
EXIT_INTERNAL = 2


@dataclass
class Pipeline:
    unit: A.SourceUnit
    graph: Aosg
    state: SliceState | None = None
    execution: Execution | None = None


def load(path: str) -> Pipeline:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise MiniAJError(f"cannot read {path}: {exc.strerror or exc}") from None
    unit = parse_source(text, path)
    return Pipeline(unit, build_aosg(unit))


def execute(p: Pipeline, args: Sequence[str], budget: int, trace: TextIO | None = None) -> Pipeline:
    """Run the program with the slicer attached; events optionally dumped as NDJSON."""
    state = initialize(p.graph)

    def listener(ev) -> None:
        state.on_event(ev)
        if trace is not None:
            trace.write(ev.to_json() + "\n")

    p.state = state
    p.execution = run(p.unit, p.graph, list(args), budget, listener)
    return p


# --- statement table ----------------------------------------------------------


def _describe(node: object) -> str:
    return {
        A.MethodDecl: "method", A.AspectDecl: "aspect", A.PointcutDecl: "pointcut",
        A.AdviceDecl: "advice", A.VarDecl: "declare", A.Assign: "assign", A.If: "if",
        A.While: "while", A.For: "for", A.ExprStmt: "call", A.Return: "return", A.Print: "print",
    }[type(node)]


def statement_table(unit: A.SourceUnit) -> list[dict]:
    lines = unit.text.splitlines()
    rows = []
    for n, node in sorted(A.numbered_nodes(unit).items()):
        span = getattr(node, "span", None)
        line = span.line if span is not None else None
        text = lines[line - 1].strip() if line is not None and line <= len(lines) else ""
        rows.append({"stmt": n, "line": line, "kind": _describe(node), "text": text})
    return rows


# --- commands -----------------------------------------------------------------


def cmd_parse(ns: argparse.Namespace, out: TextIO) -> int:
    p = load(ns.file)
    ns.unit = p.unit
    rows = statement_table(p.unit)
    if ns.format == "json":
        out.write(json.dumps(rows, indent=2) + "\n")
    else:
        for r in rows:
            out.write(f"{r['stmt']:>4}  {r['kind']:<8}  line {r['line']:<4}  {r['text']}\n")
    return EXIT_OK


def cmd_graph(ns: argparse.Namespace, out: TextIO) -> int:
    p = load(ns.file)
    ns.unit = p.unit
    if ns.format == "json":
        out.write(p.graph.to_json() + "\n")
    elif ns.format == "dot":
        out.write(p.graph.to_dot())
    else:
        for e in p.graph.edges:
            out.write(e.describe() + "\n")
    return EXIT_OK


def _trace_stream(ns: argparse.Namespace, err: TextIO) -> TextIO | None:
    if not ns.trace:
        return None
    if ns.trace == "-":
        return err
    return open(ns.trace, "w", encoding="utf-8")


def cmd_run(ns: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    p = load(ns.file)
    ns.unit = p.unit
    trace = _trace_stream(ns, err)
    try:
        execute(p, ns.args, ns.step_budget, trace)
    except ExecutionError as exc:
        for line in getattr(exc, "execution", Execution()).output:
            out.write(line + "\n")
        raise
    finally:
        if trace is not None and trace is not err:
            trace.close()
    assert p.execution is not None
    if ns.format == "json":
        out.write(json.dumps({"input": list(ns.args), "output": p.execution.output,
                              "executedStmts": p.execution.executed_stmts()}, indent=2) + "\n")
    else:
        for line in p.execution.output:
            out.write(line + "\n")
    return EXIT_OK


def cmd_slice(ns: argparse.Namespace, out: TextIO, err: TextIO) -> int:
    if len(ns.at) != len(ns.var):
        raise MiniAJError("every --at needs a matching --var")
    criteria = [SlicingCriterion(s, v) for s, v in zip(ns.at, ns.var)]
    p = load(ns.file)
    ns.unit = p.unit
    trace = _trace_stream(ns, err)
    try:
        execute(p, ns.args, ns.step_budget, trace)
    finally:
        if trace is not None and trace is not err:
            trace.close()
    assert p.state is not None and p.execution is not None
    slices = [p.state.lookup(c) for c in criteria]
    if ns.marks:
        with open(ns.marks, "w", encoding="utf-8") as fh:
            json.dump(p.state.mark_dump(), fh, indent=2)
            fh.write("\n")
    union = sorted({s for sl in slices for s in sl.stmts})
    executed = p.execution.executed_stmts()
    if ns.format == "json":
        if len(slices) == 1:
            doc: dict = {"criterion": {"stmt": criteria[0].stmt, "var": criteria[0].var},
                         "slice": list(slices[0].stmts)}
        else:
            doc = {"criteria": [{"criterion": {"stmt": c.stmt, "var": c.var}, "slice": list(sl.stmts)}
                                for c, sl in zip(criteria, slices)],
                   "slice": union}
        doc["input"] = list(ns.args)
        doc["executedStmts"] = executed
        out.write(json.dumps(doc, indent=2) + "\n")
    elif ns.format == "dot":
        out.write(p.graph.to_dot(p.state.marks))
    else:
        for c, sl in zip(criteria, slices):
            out.write(f"<{c.stmt},{c.var}>: {' '.join(map(str, sl.stmts))}\n")
        if len(slices) > 1:
            out.write(f"union: {' '.join(map(str, union))}\n")
    return EXIT_OK


# --- argument parsing --------------------------------------------------------


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aoslice", description="Dynamic slicer for MiniAJ programs.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", help="print the numbered statement table")
    sp.add_argument("file")
    sp.add_argument("--format", choices=("text", "json"), default="text")

    sp = sub.add_parser("graph", help="emit the dependence graph")
    sp.add_argument("file")
    sp.add_argument("--format", choices=("text", "json", "dot"), default="dot")

    for name, helptext in (("run", "execute the program"), ("slice", "execute, then slice")):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("file")
        sp.add_argument("--args", nargs="*", default=[], metavar="ARG",
                        help="program arguments, read with Integer.parseInt(args[i])")
        sp.add_argument("--step-budget", type=_positive, default=None,
                        help=f"maximum number of execution events (default {DEFAULT_STEP_BUDGET}, "
                             f"or ${BUDGET_ENV})")
        sp.add_argument("--trace", metavar="PATH",
                        help="write every execution event as one JSON line ('-' for stderr)")
        if name == "run":
            sp.add_argument("--format", choices=("text", "json"), default="text")
        else:
            sp.add_argument("--at", type=int, action="append", default=[], required=True,
                            metavar="STMT", help="criterion statement number (repeatable)")
            sp.add_argument("--var", action="append", default=[], required=True,
                            help="criterion variable, paired with --at in order (repeatable)")
            sp.add_argument("--format", choices=("text", "json", "dot"), default="text")
            sp.add_argument("--marks", metavar="PATH", help="write the final edge marks as JSON")
    return ap


def main(argv: Sequence[str] | None = None, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USER
    try:
        if getattr(ns, "step_budget", None) is None and ns.command in ("run", "slice"):
            ns.step_budget = budget_from_env()
        if ns.command == "parse":
            return cmd_parse(ns, out)
        if ns.command == "graph":
            return cmd_graph(ns, out)
        if ns.command == "run":
            return cmd_run(ns, out, err)
        return cmd_slice(ns, out, err)
    except InvariantViolation as exc:
        err.write(f"aoslice: internal error: {exc}\n")
        return EXIT_INTERNAL
    except MiniAJError as exc:
        err.write(diagnostic(getattr(ns, "file", "aoslice"), exc, getattr(ns, "unit", None)) + "\n")
        return EXIT_USER


def diagnostic(path: str, exc: MiniAJError, unit: A.SourceUnit | None = None) -> str:
    """``path:line:col: error: Kind: message``; runtime errors are located via their statement."""
    line, col = exc.line, exc.column
    stmt = getattr(exc, "stmt", None)
    if line is None and stmt is not None and unit is not None:
        span = getattr(A.numbered_nodes(unit).get(stmt), "span", None)
        if span is not None:
            line, col = span.line, span.column
    where = path
    if line is not None:
        where += f":{line}" + (f":{col}" if col is not None else "")
    return f"{where}: error: {type(exc).__name__}: {exc.message}"


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
