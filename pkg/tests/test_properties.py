"""Property tests over randomly generated programs."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from aoslice.aosg import INITIALLY_MARKED
from aoslice.oracle import trace_slice
from aoslice.slicer import initialize

from conftest import execute
from progen import generate, random_inputs

seeds = st.integers(min_value=0, max_value=1_000_000)


def generated_run(seed, with_aspect=None):
    text = generate(seed, with_aspect)
    return execute(text, random_inputs(random.Random(seed)), step_budget=5000, tolerate=True)


@settings(max_examples=120, deadline=None)
@given(seeds, st.booleans())
def test_slicer_matches_oracle(seed, with_aspect):
    r = generated_run(seed, with_aspect)
    trace = r.trace()
    for stmt, var in r.criteria():
        assert r.slice(stmt, var) == trace_slice(trace, stmt, var), (stmt, var)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_initial_marks_are_control_and_weave_edges(seed):
    r = generated_run(seed)
    fresh = initialize(r.graph)
    assert set(fresh.marks) == set(r.graph.edges)
    for e, m in fresh.marks.items():
        assert m == (e.kind in INITIALLY_MARKED)


@settings(max_examples=80, deadline=None)
@given(seeds)
def test_slices_are_well_formed(seed):
    r = generated_run(seed)
    numbered = set(range(1, r.unit.statement_count() + 1))
    for stmt, var in r.criteria():
        got = r.slice(stmt, var)
        assert stmt in got
        assert set(got) <= numbered
        assert list(got) == sorted(set(got))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_lookup_is_a_pure_read(seed):
    r = generated_run(seed)
    crits = r.criteria()
    snapshot = (dict(r.state.dslice), dict(r.state.marks), r.graph.edge_visits)
    first = [r.slice(*c) for c in crits]
    again = [r.slice(*c) for c in crits]
    assert first == again
    assert (dict(r.state.dslice), dict(r.state.marks), r.graph.edge_visits) == snapshot


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_execution_is_deterministic(seed):
    a, b = generated_run(seed), generated_run(seed)
    assert [e.to_json() for e in a.execution.events] == [e.to_json() for e in b.execution.events]
    assert a.execution.output == b.execution.output
    assert a.state.mark_dump() == b.state.mark_dump()


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_contributors_are_inside_the_slice(seed):
    r = generated_run(seed)
    for stmt, var in r.criteria():
        assert r.state.contributors_of(stmt, var) <= set(r.slice(stmt, var))
