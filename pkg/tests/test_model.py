import json

from hypothesis import given, settings
from hypothesis import strategies as st

from aoslice.lang import parse_source
from aoslice.model import (ENTRY, EXIT, build_cfg, build_model, init_node, reaching_definitions,
                           step_node)
from aoslice.oracle import control_parents as brute_control_parents

from progen import generate

LOOP = "int x = 1; for (int i = 0; i < 3; i++) { x = x + i; } print(x);"


def test_prime_control_parents(prime_text):
    m = build_model(parse_source(prime_text))
    got = {s: set(m.control_parents(s)) for s, owner in m.owner_of.items() if s != owner}
    assert got == {2: {1}, 3: {1}, 4: {3}, 5: {3}, 7: {6}, 8: {7}, 9: {8}, 10: {7, 8},
                   14: {13}, 16: {15}}


def test_prime_def_use(prime_text):
    du = build_model(parse_source(prime_text)).def_use
    assert du.defs(2) == {"n"} and du.uses(2) == {"args"}
    assert du.uses(3) == {"n"}
    assert du.defs(7) == {"i"} and du.uses(7) == {"i", "n"}
    assert du.defs(15) == {"n", "result"}
    assert du.def_set["n"] == {2, 6, 12, 13, 15}
    assert du.use_set["n"] == {3, 7, 8, 14, 16}


def test_statics_are_known_per_body(prime_text):
    m = build_model(parse_source(prime_text))
    # the parameter of isprime shadows the static n
    assert m.static_vars[1] == {"n"}
    assert m.static_vars[6] == frozenset()


def test_for_loop_cfg_shape():
    m = build_model(parse_source(LOOP))
    cfg = next(iter(m.cfgs.values()))
    assert cfg.succ[init_node(2)] == [2]
    assert cfg.succ[2] == [3, 4]
    assert cfg.succ[3] == [step_node(2)]
    assert cfg.back_edges == {(step_node(2), 2)}
    assert cfg.loop_exit == {2: 4}
    assert cfg.succ[4] == [EXIT]


def test_reaching_definitions_through_a_loop():
    cfg = next(iter(build_model(parse_source(LOOP)).cfgs.values()))
    rd = reaching_definitions(cfg)
    assert {d for d in rd[3] if d[0] == "x"} == {("x", 1), ("x", 3)}
    assert {d for d in rd[init_node(2)] if d[0] == "x"} == {("x", 1)}
    assert {d for d in rd[4] if d[0] == "i"} == {("i", init_node(2)), ("i", step_node(2))}


def test_straight_line_reaching_definitions_kill():
    unit = parse_source("int x = 1; x = 2; print(x);")
    cfg = build_cfg(unit.methods()[0].body, ENTRY)
    rd = reaching_definitions(cfg)
    assert {d for d in rd[3] if d[0] == "x"} == {("x", 2)}


def test_while_body_depends_on_header_only():
    m = build_model(parse_source("int c = 0; while (c < 3) { if (c == 1) { print(c); } c = c + 1; } print(c);"))
    assert m.control_parents(3) == (2,)
    assert m.control_parents(4) == (3,)
    assert m.control_parents(5) == (2,)
    assert m.control_parents(6) == (ENTRY,)


def test_statement_after_early_return_depends_on_guard():
    text = """
    class P {
        static int f(int a) {
            if (a > 0) { return 1; }
            return 2;
        }
        public static void main(String[] args) { print(f(1)); }
    }
    """
    m = build_model(parse_source(text))
    assert m.control_parents(3) == (2,)
    assert m.control_parents(4) == (2,)


def test_model_json_round_trip(prime_text):
    doc = json.loads(build_model(parse_source(prime_text)).to_json())
    assert doc["10"] == {"parents": [7, 8], "defs": [], "uses": []}
    assert doc["7"]["defs"] == ["i"]


def _normalise(parents, entry):
    return {p if p != entry else "E" for p in parents}


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=0, max_value=50_000))
def test_control_dependence_matches_brute_force(seed):
    unit = parse_source(generate(seed))
    m = build_model(unit)
    owners = list(unit.methods()) + [a for asp in unit.aspects for a in asp.advices]
    for owner in owners:
        entry = ENTRY if owner.number is None else owner.number
        brute = brute_control_parents(owner.body, entry)
        for stmt, parents in brute.items():
            assert _normalise(m.control_parents(stmt), entry) == _normalise(parents, entry), stmt


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=50_000))
def test_def_use_sets_are_inverse(seed):
    du = build_model(parse_source(generate(seed))).def_use
    for stmt, (defs, uses) in du.per_statement.items():
        for v in defs:
            assert stmt in du.def_set[v]
        for v in uses:
            assert stmt in du.use_set[v]
    for v, stmts in du.def_set.items():
        assert all(v in du.defs(s) for s in stmts)
