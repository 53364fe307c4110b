import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aoslice.aosg import build_aosg
from aoslice.errors import (CallDepthExceeded, DivisionByZero, InputError, StepBudgetExceeded)
from aoslice.interp import EventKind, budget_from_env, run, wrap
from aoslice.lang import parse_source

K = EventKind


def execute(text, args=(), **kw):
    unit = parse_source(text)
    return run(unit, build_aosg(unit), list(args), **kw)


def output(text, args=()):
    return execute(text, args).output


@pytest.mark.parametrize("arg, verdict", [("7", "Is Prime"), ("4", "Is not Prime"), ("2", "Is Prime")])
def test_prime_output(prime_text, arg, verdict):
    assert output(prime_text, [arg]) == [f"Testing the prime no for :{arg}",
                                          f"Showing the prime status for :{arg}", verdict]


def test_prime_event_order(prime_text):
    ex = execute(prime_text, ["4"])
    got = [(e.kind, e.vertex) for e in ex.events]
    assert got == [
        (K.ASPECT_INIT, 11), (K.METHOD_ENTER, 1), (K.STATEMENT, 2), (K.CALL, 3), (K.POINTCUT, 12),
        (K.ADVICE_ENTER, 13), (K.STATEMENT, 14), (K.ADVICE_EXIT, 13),
        (K.METHOD_ENTER, 6), (K.STATEMENT, 7), (K.STATEMENT, 8), (K.STATEMENT, 9), (K.METHOD_EXIT, 6),
        (K.ADVICE_ENTER, 15), (K.STATEMENT, 16), (K.ADVICE_EXIT, 15),
        (K.STATEMENT, 3), (K.STATEMENT, 5), (K.METHOD_EXIT, 1),
    ]
    assert [e.index for e in ex.events] == list(range(len(ex.events)))
    after = ex.events[13]
    assert dict(after.defs) == {"n": 4, "result": False}
    assert after.call_site == 3 and after.caller == 1


def test_for_header_events_merge_init_and_step():
    ex = execute("int s = 0; for (int i = 0; i < 2; i++) { s = s + i; } print(s);")
    heads = [e for e in ex.events if e.stmt == 2]
    assert len(heads) == 3
    assert heads[0].defs == (("i", 0),) and heads[0].uses == ()
    assert heads[1].defs == (("i", 1),) and set(heads[1].uses) == {"i"}
    assert ex.output == ["1"]


def test_trace_lines_are_json(prime_text):
    ex = execute(prime_text, ["7"])
    docs = [json.loads(e.to_json()) for e in ex.events]
    assert docs[3] == {"index": 3, "kind": "CallStarted", "vertex": 3, "stmt": 3, "frame": 1,
                       "defs": [], "uses": ["n"], "statics": ["n"]}


def test_executed_statements(prime_text):
    assert execute(prime_text, ["7"]).executed_stmts() == [1, 2, 3, 4, 6, 7, 8, 10, 11, 12, 13, 14, 15, 16]


@pytest.mark.parametrize("expr, value", [
    ("7 / 2", 3), ("-7 / 2", -3), ("7 / -2", -3), ("-7 % 3", -1), ("7 % -3", 1), ("-7 % -3", -1),
    ("9223372036854775807 + 1", -9223372036854775808), ("3 * 4 - 10", 2), ("-(2 - 5)", 3),
])
def test_integer_semantics(expr, value):
    assert output(f"print({expr});") == [str(value)]


@pytest.mark.parametrize("expr, value", [
    ("1 < 2 && 2 < 1", "false"), ("1 < 2 || 2 < 1", "true"), ("!(1 == 1)", "false"), ("3 != 4", "true"),
])
def test_boolean_semantics(expr, value):
    assert output(f"boolean b = {expr}; print(b);") == [value]


def test_string_concatenation():
    assert output('int x = 4; print("x=" + x + 1);') == ["x=41"]


@given(st.integers(-(2**70), 2**70))
def test_wrap_stays_in_range(n):
    w = wrap(n)
    assert -(2**63) <= w < 2**63
    assert (w - n) % 2**64 == 0


def test_objects_and_constructors():
    text = """
    class P {
        static int total;
        P(int z) { total = total + z; }
        public static void main(String[] args) {
            P a = new P(3);
            P b = new P(4);
            print(total);
        }
    }
    """
    ex = execute(text)
    assert ex.output == ["7"]
    assert [e.kind for e in ex.events].count(K.OBJECT_CREATED) == 2


def test_division_by_zero_keeps_partial_trace():
    with pytest.raises(DivisionByZero) as info:
        execute("int x = Integer.parseInt(args[0]); print(x); print(10 / x);", ["0"])
    assert info.value.stmt == 3
    assert info.value.execution.output == ["0"]


@pytest.mark.parametrize("args", [[], ["abc"], ["99999999999999999999999"]])
def test_bad_program_arguments(args):
    with pytest.raises(InputError):
        execute("int x = Integer.parseInt(args[0]); print(x);", args)


def test_step_budget():
    with pytest.raises(StepBudgetExceeded):
        execute("int x = 0; while (x >= 0) { x = x + 1; }", step_budget=500)


def test_unbounded_recursion_hits_depth_limit():
    text = """
    class P {
        static int f(int a) { return f(a + 1); }
        public static void main(String[] args) { print(f(0)); }
    }
    """
    with pytest.raises(CallDepthExceeded):
        execute(text)


def test_budget_from_environment(monkeypatch):
    monkeypatch.setenv("AOSLICE_STEP_BUDGET", "1234")
    assert budget_from_env() == 1234
    monkeypatch.setenv("AOSLICE_STEP_BUDGET", "zero")
    with pytest.raises(InputError):
        budget_from_env()
    monkeypatch.delenv("AOSLICE_STEP_BUDGET")
    assert budget_from_env() == 1_000_000


def test_after_advice_sees_return_value():
    text = """
    class P {
        static int twice(int a) { return a * 2; }
        public static void main(String[] args) { int r = twice(5); print(r); }
    }
    aspect Log {
        pointcut t(int a): call(int P.twice(int)) && args(a);
        before(int a): t(a) { print("in " + a); }
        after(int a) returning(int res): t(a) { print("out " + res); }
    }
    """
    assert output(text) == ["in 5", "out 10", "10"]
