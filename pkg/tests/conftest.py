from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pytest

from aoslice.aosg import Aosg, build_aosg
from aoslice.errors import ExecutionError
from aoslice.interp import Execution, run
from aoslice.lang import ast as A
from aoslice.lang import parse_source
from aoslice.oracle import Trace, build_trace, trace_slice
from aoslice.slicer import SliceState, SlicingCriterion, initialize

FIXTURES = Path(__file__).parent / "fixtures"
PRIME = FIXTURES / "prime.maj"


@dataclass
class Run:
    unit: A.SourceUnit
    graph: Aosg
    state: SliceState
    execution: Execution
    error: ExecutionError | None = None

    def slice(self, stmt: int, var: str) -> tuple[int, ...]:
        return self.state.lookup(SlicingCriterion(stmt, var)).stmts

    def trace(self) -> Trace:
        return build_trace(self.unit, self.execution.events)

    def oracle(self, stmt: int, var: str) -> tuple[int, ...]:
        return trace_slice(self.trace(), stmt, var)

    def criteria(self) -> list[tuple[int, str]]:
        seen = set()
        for ev in self.execution.events:
            if ev.stmt is None:
                continue
            for v in set(ev.uses) | {n for n, _ in ev.defs}:
                seen.add((ev.stmt, v))
        return sorted(seen)


def execute(text: str, args=(), step_budget: int = 100_000, tolerate: bool = False) -> Run:
    unit = parse_source(text)
    graph = build_aosg(unit)
    state = initialize(graph)
    try:
        ex = run(unit, graph, list(args), step_budget, state.on_event)
    except ExecutionError as exc:
        if not tolerate:
            raise
        return Run(unit, graph, state, exc.execution, exc)
    return Run(unit, graph, state, ex)


@pytest.fixture(scope="session")
def prime_text() -> str:
    return PRIME.read_text()


@pytest.fixture
def prime_run(prime_text: str) -> Run:
    return execute(prime_text, ["7"])


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
