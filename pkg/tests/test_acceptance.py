"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line with the measured
figures (shown in the terminal summary). ``python tests/test_acceptance.py``
runs the same checks without pytest.
"""

from __future__ import annotations

import json
import os
import random
import subprocess
import sys
import time
from functools import lru_cache
from pathlib import Path

HERE = Path(__file__).parent
sys.path[:0] = [str(HERE), str(HERE.parent / "src")]

from aoslice.aosg import INITIALLY_MARKED, build_aosg  # noqa: E402
from aoslice.errors import ExecutionError  # noqa: E402
from aoslice.interp import run  # noqa: E402
from aoslice.lang import parse_source  # noqa: E402
from aoslice.oracle import build_trace, trace_slice  # noqa: E402
from aoslice.slicer import SlicingCriterion, initialize  # noqa: E402

from progen import generate, random_inputs, straight_line  # noqa: E402

FIXTURES = HERE / "fixtures"
PRIME = FIXTURES / "prime.maj"
GOLDEN = (1, 2, 3, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16)
CORPUS_SIZE = 500
CORPUS_BUDGET = 5000
RESULTS: list[str] = []


def report(number: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    RESULTS.append(line)
    print(line)


def run_sliced(text: str, args, budget: int = 1_000_000):
    unit = parse_source(text)
    graph = build_aosg(unit)
    state = initialize(graph)
    try:
        ex = run(unit, graph, list(args), budget, state.on_event)
    except ExecutionError as exc:
        ex = exc.execution
    return unit, graph, state, ex


def criteria_of(events):
    out = set()
    for ev in events:
        if ev.stmt is not None:
            out |= {(ev.stmt, v) for v in set(ev.uses) | {n for n, _ in ev.defs}}
    return sorted(out)


@lru_cache(maxsize=1)
def corpus() -> tuple[tuple[str, tuple[str, ...]], ...]:
    return tuple((generate(seed, with_aspect=seed % 2 == 0), tuple(random_inputs(random.Random(seed))))
                 for seed in range(CORPUS_SIZE))


# 1 -----------------------------------------------------------------------------


def test_golden_slice():
    text = PRIME.read_text()
    t0 = time.perf_counter()
    _, _, state, _ = run_sliced(text, ["7"])
    got = state.lookup(SlicingCriterion(16, "n")).stmts
    elapsed = time.perf_counter() - t0
    ok = got == GOLDEN and elapsed < 1.0
    report(1, ok, f"<16,n> = {set(got)} in {elapsed * 1000:.1f} ms (limit 1 s)")
    assert got == GOLDEN
    assert elapsed < 1.0


# 2 -----------------------------------------------------------------------------

EXACT = {16: {15}, 14: {13}, 13: {12}, 2: {1}, 12: {3, 11}, 8: {6, 7}, 7: {6}, 6: {3, 14}}
# dependence-path lines: every listed parent must appear
SUBSET = {15: {9, 10, 12}, 3: {1, 2, 9, 10, 16}}


def test_recursion_table():
    _, _, state, _ = run_sliced(PRIME.read_text(), ["7"])
    wrong = {s: sorted(state.contributors_of(s, "n")) for s, want in EXACT.items()
             if state.contributors_of(s, "n") != want}
    missing = {s: sorted(want - state.contributors_of(s, "n")) for s, want in SUBSET.items()
               if not want <= state.contributors_of(s, "n")}
    ok = not wrong and not missing
    report(2, ok, f"{len(EXACT)} exact contributor sets, {len(SUBSET)} subset checks; "
                  f"mismatched={wrong or 'none'} missing={missing or 'none'}")
    assert not wrong
    assert not missing


# 3 -----------------------------------------------------------------------------


def test_oracle_equivalence():
    t0 = time.perf_counter()
    programs = with_aspect = with_match = criteria = budget_stops = 0
    mismatches = []
    for text, args in corpus():
        unit, graph, state, ex = run_sliced(text, args, CORPUS_BUDGET)
        programs += 1
        with_aspect += bool(unit.aspects)
        with_match += bool(graph.matches)
        budget_stops += ex is not None and len(ex.events) >= CORPUS_BUDGET
        trace = build_trace(unit, ex.events)
        for stmt, var in criteria_of(ex.events):
            criteria += 1
            a = state.lookup(SlicingCriterion(stmt, var)).stmts
            b = trace_slice(trace, stmt, var)
            if a != b:
                mismatches.append((text, stmt, var, a, b))
    elapsed = time.perf_counter() - t0
    ok = (programs >= 500 and with_aspect * 2 >= programs and not mismatches and elapsed < 60)
    report(3, ok, f"{programs} programs ({with_aspect} with an aspect, {with_match} with a woven call), "
                  f"{criteria} criteria, {len(mismatches)} mismatches, {elapsed:.1f} s (limit 60 s)")
    assert programs >= 500
    assert with_aspect * 2 >= programs
    assert not mismatches, mismatches[:3]
    assert elapsed < 60


# 4 -----------------------------------------------------------------------------


def test_lookup_is_available_without_traversal():
    runs = [run_sliced(PRIME.read_text(), ["7"])]
    runs += [run_sliced(text, args, CORPUS_BUDGET) for text, args in corpus()[:20]]
    visits = changed = queries = 0
    for _, graph, state, ex in runs:
        crits = [SlicingCriterion(*c) for c in criteria_of(ex.events)]
        if not crits:
            continue
        before = (graph.edge_visits, dict(state.dslice), dict(state.marks), dict(state.contributors))
        first = {c: state.lookup(c).stmts for c in crits}
        for i in range(1000):
            c = crits[i % len(crits)]
            changed += state.lookup(c).stmts != first[c]
            queries += 1
        visits += graph.edge_visits - before[0]
        after = (graph.edge_visits, dict(state.dslice), dict(state.marks), dict(state.contributors))
        changed += after != before
    ok = visits == 0 and changed == 0
    report(4, ok, f"{queries} lookups over {len(runs)} executions: {visits} edge visits, "
                  f"{changed} state or answer changes")
    assert visits == 0
    assert changed == 0


# 5 -----------------------------------------------------------------------------


def chain(n: int) -> str:
    """Worst case for stored slices: every statement reads all earlier ones transitively."""
    lines = ["int v0 = Integer.parseInt(args[0]);"]
    lines += [f"int v{i} = v{i - 1} + {i % 7};" for i in range(1, n - 1)]
    return "\n".join(lines + [f"print(v{n - 2});"])


def test_space_is_quadratic():
    sizes = (50, 100, 200)
    stored = {}
    for n in sizes:
        texts = [chain(n)] + [straight_line(n, random.Random(seed)).text for seed in range(5)]
        stored[n] = max(run_sliced(t, ["3"])[2].stored_elements() for t in texts)
    c = stored[sizes[0]] / sizes[0] ** 2
    ratios = {n: stored[n] / (c * n * n) for n in sizes}
    ok = all(r <= 4.0 for r in ratios.values())
    report(5, ok, f"stored elements {stored}; c = {c:.3f} fitted at n={sizes[0]}; "
                  f"observed / c*n^2 = {', '.join(f'{r:.2f}' for r in ratios.values())} (limit 4)")
    assert ok


# 6 -----------------------------------------------------------------------------


def test_initial_marks():
    edges = wrong = 0
    for text, _ in corpus():
        graph = build_aosg(parse_source(text))
        state = initialize(graph)
        if set(state.marks) != set(graph.edges):
            wrong += 1
        for e in graph.edges:
            edges += 1
            wrong += state.marks[e] != (e.kind in INITIALLY_MARKED)
    ok = wrong == 0
    report(6, ok, f"{edges} edges over {len(corpus())} programs; {wrong} marked differently from "
                  f"kind in {{ControlDep, Weave}}")
    assert ok


# 7 -----------------------------------------------------------------------------

FIXTURE_ARGS = {"prime.maj": ["7"], "account.maj": ["250", "2"], "collatz.maj": ["9"], "script.maj": ["5"]}


def _cli(argv: list[str], hashseed: str) -> str:
    env = dict(os.environ, PYTHONHASHSEED=hashseed, PYTHONPATH=str(HERE.parent / "src"))
    proc = subprocess.run([sys.executable, "-m", "aoslice", *argv], capture_output=True, text=True, env=env,
                          check=False)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout


def test_determinism():
    differing = []
    for name, args in FIXTURE_ARGS.items():
        path = FIXTURES / name
        _, _, _, ex = run_sliced(path.read_text(), args)
        flags = [f for s, v in criteria_of(ex.events) for f in ("--at", str(s), "--var", v)]
        commands = {
            "slice-json": ["slice", str(path), "--args", *args, *flags, "--format", "json"],
            "graph-dot": ["graph", str(path), "--format", "dot"],
            "graph-json": ["graph", str(path), "--format", "json"],
            "marked-dot": ["slice", str(path), "--args", *args, *flags, "--format", "dot"],
        }
        for label, argv in commands.items():
            if _cli(argv, "1") != _cli(argv, "2"):
                differing.append(f"{name}:{label}")
    ok = not differing
    report(7, ok, f"{len(FIXTURE_ARGS)} fixtures x 4 outputs, two processes with different hash seeds; "
                  f"differing: {differing or 'none'}")
    assert ok


if __name__ == "__main__":
    failed = 0
    for fn in (test_golden_slice, test_recursion_table, test_oracle_equivalence,
               test_lookup_is_available_without_traversal, test_space_is_quadratic, test_initial_marks,
               test_determinism):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
