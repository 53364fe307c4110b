import json

from hypothesis import given, settings
from hypothesis import strategies as st

from aoslice.aosg import INITIALLY_MARKED, EdgeKind, VertexKind, build_aosg
from aoslice.lang import parse_source

from progen import generate


def kinds_of(g, kind):
    return {(e.src, e.dst) for e in g.edges if e.kind == kind}


def test_prime_has_one_membership_edge(prime_text):
    g = build_aosg(parse_source(prime_text))
    assert kinds_of(g, EdgeKind.MEMBERSHIP) == {(3, 12)}


def test_prime_call_and_parameter_edges(prime_text):
    g = build_aosg(parse_source(prime_text))
    ain, aout = g.actual_in[(3, 0)], g.actual_out[3]
    assert kinds_of(g, EdgeKind.CALL) == {(3, 6)}
    assert kinds_of(g, EdgeKind.SUMMARY) == {(ain, aout)}
    assert (ain, g.formal_in[(6, "n")]) in kinds_of(g, EdgeKind.PARAM_IN)
    assert (aout, 3) in kinds_of(g, EdgeKind.PARAM_OUT)
    assert kinds_of(g, EdgeKind.RETURN) == {(9, g.formal_out[6]), (10, g.formal_out[6])}
    assert kinds_of(g, EdgeKind.ADVICE) == {(12, 13), (12, 15)}


def test_prime_weaving_through_a_cnode(prime_text):
    g = build_aosg(parse_source(prime_text))
    match = g.matches[3]
    assert (match.pointcut, match.method, match.before, match.after) == (12, "isprime", (13,), (15,))
    c = match.cnode
    assert g.vertices[c].kind == VertexKind.CNODE
    assert g.vertices[c].stmt is None
    assert kinds_of(g, EdgeKind.WEAVE) == {(14, c), (16, c), (c, 6), (c, 3)}


def test_extra_vertices_follow_statements(prime_text):
    g = build_aosg(parse_source(prime_text))
    numbered = sorted(v.id for v in g.vertices.values() if v.stmt is not None)
    extra = sorted(v.id for v in g.vertices.values() if v.stmt is None)
    assert numbered == list(range(1, 17))
    assert extra == list(range(17, 17 + len(extra)))
    assert all(v.id == v.stmt for v in g.vertices.values() if v.stmt is not None)


def test_static_marks_follow_edge_kind(prime_text):
    g = build_aosg(parse_source(prime_text))
    for e in g.edges:
        assert g.static_marks[e] == (e.kind in INITIALLY_MARKED)


def test_empty_program_graph():
    g = build_aosg(parse_source(""))
    assert not g.vertices and not g.edges
    assert g.to_dot().startswith("digraph aosg {")


def test_unmatched_call_gets_no_cnode():
    text = """
    class P {
        static int f(int a) { return a + 1; }
        static int h(int a) { return a; }
        public static void main(String[] args) { int x = f(1); print(h(x)); }
    }
    aspect A {
        pointcut p(int k): call(int P.h(int)) && args(k);
        before(int k): p(k) { print(k); }
    }
    """
    g = build_aosg(parse_source(text))
    assert list(g.matches) == [7]
    assert len(kinds_of(g, EdgeKind.MEMBERSHIP)) == 1


def test_dot_marks_render_solid_and_dashed(prime_text):
    g = build_aosg(parse_source(prime_text))
    dot = g.to_dot()
    assert "style=dashed" in dot and "style=solid" in dot
    all_marked = g.to_dot({e: True for e in g.edges})
    assert "style=dashed" not in all_marked


def test_json_lists_every_vertex_and_edge(prime_text):
    g = build_aosg(parse_source(prime_text))
    doc = json.loads(g.to_json())
    assert len(doc["vertices"]) == len(g.vertices)
    assert len(doc["edges"]) == len(g.edges)


def test_building_twice_is_identical(prime_text):
    a = build_aosg(parse_source(prime_text))
    b = build_aosg(parse_source(prime_text))
    assert a.to_json() == b.to_json()
    assert a.to_dot() == b.to_dot()


# Call covers advice bodies invoking ordinary methods
_CROSSING = {EdgeKind.MEMBERSHIP, EdgeKind.CALL, EdgeKind.PARAM_IN, EdgeKind.PARAM_OUT}


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=50_000))
def test_graph_invariants_on_generated_programs(seed):
    g = build_aosg(parse_source(generate(seed)))
    ids = set(g.vertices)
    for e in g.edges:
        # closure: no dangling endpoints
        assert e.src in ids and e.dst in ids
        a, b = g.vertices[e.src], g.vertices[e.dst]
        # the two sides meet only through membership, call, parameter and C-node edges
        if a.aspect_side != b.aspect_side and VertexKind.CNODE not in (a.kind, b.kind):
            assert e.kind in _CROSSING, e.describe()
        if e.kind == EdgeKind.WEAVE:
            assert VertexKind.CNODE in (a.kind, b.kind)
    assert len(kinds_of(g, EdgeKind.MEMBERSHIP)) == len(g.matches)
    assert list(g.edges) == sorted(g.edges)
