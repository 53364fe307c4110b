"""Tree-walking interpreter for woven MiniAJ programs.

Execution is reported as a flat stream of :class:`Event` objects. A
statement containing a call produces a ``CallStarted`` event when its
arguments have been evaluated, then the woven call (pointcut, before
advice, callee, after advice), and finally a ``StatementExecuted`` event
once the rest of the statement has been evaluated with the call's value.
The call is always evaluated before the other operands of its statement.
"""

from __future__ import annotations

import json
import os
import sys
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Union

from aoslice.aosg import Aosg
from aoslice.errors import (CallDepthExceeded, DivisionByZero, ExecutionError, InputError,
                            StepBudgetExceeded)
from aoslice.lang import ast as A
from aoslice.lang.semantics import local_names
from aoslice.model import expr_vars

DEFAULT_STEP_BUDGET = 1_000_000
MAX_CALL_DEPTH = 500
BUDGET_ENV = "AOSLICE_STEP_BUDGET"

_MASK = (1 << 64) - 1
_SIGN = 1 << 63


def wrap(x: int) -> int:
    """Two's-complement 64-bit wrap-around."""
    x &= _MASK
    return x - (1 << 64) if x & _SIGN else x


@dataclass(frozen=True)
class ObjectRef:
    cls: str
    id: int

    def __str__(self) -> str:
        return f"{self.cls}@{self.id}"


Value = Union[int, bool, ObjectRef, None]


def show(v: Value) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _jsonable(v: Value) -> object:
    if isinstance(v, ObjectRef):
        return str(v)
    return v


class EventKind(str, Enum):
    STATEMENT = "StatementExecuted"
    CALL = "CallStarted"
    OBJECT_CREATED = "ObjectCreated"
    POINTCUT = "PointcutFired"
    METHOD_ENTER = "MethodEntered"
    METHOD_EXIT = "MethodExited"
    ADVICE_ENTER = "AdviceEntered"
    ADVICE_EXIT = "AdviceExited"
    ASPECT_INIT = "AspectInitialized"


@dataclass(frozen=True)
class Event:
    index: int
    kind: EventKind
    vertex: int
    stmt: int | None
    frame: int
    defs: tuple[tuple[str, Value], ...] = ()
    uses: tuple[str, ...] = ()
    post_uses: tuple[str, ...] = ()  # read after the statement's call returned
    statics: frozenset[str] = frozenset()
    call_site: int | None = None
    caller: int | None = None  # frame of the caller, on entry events

    def to_json(self) -> str:
        doc = {
            "index": self.index, "kind": self.kind.value, "vertex": self.vertex,
            "stmt": self.stmt, "frame": self.frame,
            "defs": [[n, _jsonable(v)] for n, v in self.defs],
            "uses": list(self.uses),
        }
        if self.post_uses:
            doc["postUses"] = list(self.post_uses)
        if self.statics:
            doc["statics"] = sorted(self.statics)
        if self.call_site is not None:
            doc["callSite"] = self.call_site
        if self.caller is not None:
            doc["caller"] = self.caller
        return json.dumps(doc)


@dataclass
class Execution:
    events: list[Event] = field(default_factory=list)
    output: list[str] = field(default_factory=list)

    def executed_stmts(self) -> list[int]:
        return sorted({e.stmt for e in self.events if e.stmt is not None})


@dataclass
class _Frame:
    id: int
    owner: A.MethodDecl | A.AdviceDecl
    locals: dict[str, Value]
    local_names: frozenset[str]


class _Return(Exception):
    def __init__(self, value: Value):
        self.value = value


def _unique(names: list[str]) -> tuple[str, ...]:
    return tuple(dict.fromkeys(names))


def _outside_call(e: A.Expr | None) -> list[str]:
    """Variables of *e* that are not inside a call's argument list."""
    if e is None:
        return []
    if isinstance(e, A.Var):
        return [e.name]
    if isinstance(e, A.ArgRead):
        return [e.array] + _outside_call(e.index)
    if isinstance(e, A.Binary):
        return _outside_call(e.left) + _outside_call(e.right)
    if isinstance(e, A.Unary):
        return _outside_call(e.operand)
    return []


def budget_from_env(default: int = DEFAULT_STEP_BUDGET) -> int:
    raw = os.environ.get(BUDGET_ENV)
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        raise InputError(f"{BUDGET_ENV} must be a positive integer, got {raw!r}") from None
    if value <= 0:
        raise InputError(f"{BUDGET_ENV} must be a positive integer, got {raw!r}")
    return value


class Interpreter:
    def __init__(self, unit: A.SourceUnit, aosg: Aosg, args: list[str] | tuple[str, ...],
                 step_budget: int = DEFAULT_STEP_BUDGET,
                 listener: Callable[[Event], None] | None = None):
        self.unit = unit
        self.g = aosg
        self.args = tuple(args)
        self.budget = step_budget
        self.listener = listener
        self.result = Execution()
        self.statics: dict[str, Value] = {}
        self.static_types: dict[str, str] = {}
        if unit.classes:
            for f in unit.cls.fields:
                self.statics[f.name] = self._default(f.type)
                self.static_types[f.name] = f.type
        self.advices = {a.number: a for asp in unit.aspects for a in asp.advices}
        self.pointcuts = {pc.number: pc for asp in unit.aspects for pc in asp.pointcuts}
        self._locals_cache: dict[int, frozenset[str]] = {}
        self._next_frame = 0
        self._next_object = 0
        self._depth = 0

    @staticmethod
    def _default(t: str) -> Value:
        if t == A.INT:
            return 0
        if t == A.BOOL:
            return False
        return None

    # --- events ------------------------------------------------------------

    def emit(self, kind: EventKind, vertex: int, stmt: int | None, frame: _Frame | int, **kw) -> None:
        if len(self.result.events) >= self.budget:
            raise StepBudgetExceeded(f"step budget of {self.budget} events exceeded", stmt=stmt)
        fid = frame if isinstance(frame, int) else frame.id
        if not isinstance(frame, int):
            names = [n for n, _ in kw.get("defs", ())] + list(kw.get("uses", ()))
            statics = frozenset(n for n in names if self._is_static(frame, n))
            if statics:
                kw["statics"] = statics
        ev = Event(len(self.result.events), kind, vertex, stmt, fid, **kw)
        self.result.events.append(ev)
        if self.listener is not None:
            self.listener(ev)

    def _is_static(self, frame: _Frame, name: str) -> bool:
        return name not in frame.local_names and name in self.statics

    # --- frames ------------------------------------------------------------

    def new_frame(self, owner: A.MethodDecl | A.AdviceDecl) -> _Frame:
        if self._depth >= MAX_CALL_DEPTH:
            raise CallDepthExceeded(f"more than {MAX_CALL_DEPTH} nested activations")
        self._next_frame += 1
        key = id(owner)
        if key not in self._locals_cache:
            self._locals_cache[key] = local_names(owner)
        return _Frame(self._next_frame, owner, {}, self._locals_cache[key])

    def read(self, frame: _Frame, name: str) -> Value:
        if name in frame.local_names:
            return frame.locals[name]
        return self.statics[name]

    def write(self, frame: _Frame, name: str, value: Value) -> None:
        if name in frame.local_names:
            frame.locals[name] = value
        else:
            self.statics[name] = value

    # --- program -------------------------------------------------------------

    def run(self) -> Execution:
        if not self.unit.classes:
            return self.result
        for asp in self.unit.aspects:
            self.emit(EventKind.ASPECT_INIT, asp.number, asp.number, 0)
        main = self.unit.method("main")
        assert main is not None
        frame = self.new_frame(main)
        defs = []
        for p in main.params:
            frame.locals[p.name] = self.args  # type: ignore[assignment]
            defs.append((p.name, self.args))
        entry = self.g.method_entry["main"]
        self.emit(EventKind.METHOD_ENTER, entry, main.number, frame, defs=tuple(defs))
        try:
            self.exec_block(main.body, frame)
        except _Return:
            pass
        self.emit(EventKind.METHOD_EXIT, entry, main.number, frame)
        return self.result

    # --- statements ----------------------------------------------------------

    def exec_block(self, block: A.Block, frame: _Frame) -> None:
        for s in block.stmts:
            self.exec_stmt(s, frame)

    def exec_stmt(self, s: A.Stmt, frame: _Frame) -> None:
        n = s.number
        if isinstance(s, A.For):
            self.exec_for(s, frame)
            return
        call_value, arg_vars = self.do_call(s, frame)
        uses = _unique([v for e in A.stmt_exprs(s) for v in expr_vars(e)])
        post = _unique([v for e in A.stmt_exprs(s) for v in _outside_call(e)]) if arg_vars is not None else ()

        def ev(e: A.Expr) -> Value:
            return self.eval(e, frame, n, call_value)

        extra = {"post_uses": post} if arg_vars is not None else {}
        if isinstance(s, (A.VarDecl, A.Assign)):
            value = ev(s.init if isinstance(s, A.VarDecl) else s.value)
            self.write(frame, s.name, value)
            self.emit(EventKind.STATEMENT, n, n, frame, defs=((s.name, value),), uses=uses, **extra)
        elif isinstance(s, A.If):
            cond = ev(s.cond)
            self.emit(EventKind.STATEMENT, n, n, frame, uses=uses, **extra)
            if cond:
                self.exec_block(s.then, frame)
            elif s.orelse is not None:
                self.exec_block(s.orelse, frame)
        elif isinstance(s, A.While):
            while True:
                cond = ev(s.cond)
                self.emit(EventKind.STATEMENT, n, n, frame, uses=uses, **extra)
                if not cond:
                    break
                self.exec_block(s.body, frame)
                call_value, arg_vars = self.do_call(s, frame)
        elif isinstance(s, A.ExprStmt):
            self.emit(EventKind.STATEMENT, n, n, frame, uses=uses, **extra)
        elif isinstance(s, A.Return):
            value = None if s.value is None else ev(s.value)
            self.emit(EventKind.STATEMENT, n, n, frame, uses=uses, **extra)
            raise _Return(value)
        elif isinstance(s, A.Print):
            text = self.render(s.value, frame, n, call_value)
            self.result.output.append(text)
            self.emit(EventKind.STATEMENT, n, n, frame, uses=uses, **extra)
        else:  # pragma: no cover
            raise ExecutionError(f"cannot execute {type(s).__name__}", stmt=n)

    def exec_for(self, s: A.For, frame: _Frame) -> None:
        n = s.number
        cond_vars = expr_vars(s.cond)
        defs: tuple[tuple[str, Value], ...] = ()
        uses = cond_vars
        # the condition reads the value the init/step clause just stored,
        # so that variable is not a use of the combined event
        if s.init is not None:
            value = self.eval(s.init.value, frame, n)
            self.write(frame, s.init.name, value)
            defs = ((s.init.name, value),)
            uses = expr_vars(s.init.value) + [v for v in cond_vars if v != s.init.name]
        while True:
            cond = self.eval(s.cond, frame, n)
            self.emit(EventKind.STATEMENT, n, n, frame, defs=defs, uses=_unique(uses))
            if not cond:
                return
            self.exec_block(s.body, frame)
            defs, uses = (), cond_vars
            if s.step is not None:
                value = self.eval(s.step.value, frame, n)
                self.write(frame, s.step.name, value)
                defs = ((s.step.name, value),)
                uses = expr_vars(s.step.value) + [v for v in cond_vars if v != s.step.name]

    # --- calls ---------------------------------------------------------------

    def do_call(self, s: A.Stmt, frame: _Frame) -> tuple[Value, tuple[str, ...] | None]:
        call = A.call_of(s)
        if call is None:
            return None, None
        n = s.number
        values = [self.eval(a, frame, n) for a in call.args]
        arg_vars = _unique([v for a in call.args for v in expr_vars(a)])
        if isinstance(call, A.NewExpr):
            self._next_object += 1
            obj = ObjectRef(call.cls, self._next_object)
            self.emit(EventKind.OBJECT_CREATED, n, n, frame, uses=arg_vars)
            ctor = self.unit.cls.constructor
            if ctor is not None:
                self.invoke(ctor, values, frame, n)
            return obj, arg_vars
        self.emit(EventKind.CALL, n, n, frame, uses=arg_vars)
        method = self.unit.method(call.name)
        assert method is not None
        jp = self.g.matches.get(n)
        if jp is None:
            return self.invoke(method, values, frame, n), arg_vars
        pc = self.pointcuts[jp.pointcut]
        bound = {pname: values[i] for i, pname in jp.bindings}
        self.emit(EventKind.POINTCUT, pc.number, pc.number, frame.id,
                  defs=tuple((p.name, bound[p.name]) for p in pc.params), call_site=n)
        for a in jp.before:
            self.run_advice(self.advices[a], pc, bound, frame, n)
        result = self.invoke(method, values, frame, n)
        for a in jp.after:
            self.run_advice(self.advices[a], pc, bound, frame, n, result=result)
        return result, arg_vars

    def invoke(self, method: A.MethodDecl, values: list[Value], caller: _Frame, site: int) -> Value:
        frame = self.new_frame(method)
        for p, v in zip(method.params, values):
            frame.locals[p.name] = v
        entry = self.g.method_entry[method.name]
        self.emit(EventKind.METHOD_ENTER, entry, method.number, frame.id,
                  defs=tuple((p.name, v) for p, v in zip(method.params, values)),
                  call_site=site, caller=caller.id)
        value: Value = None
        self._depth += 1
        try:
            self.exec_block(method.body, frame)
        except _Return as r:
            value = r.value
        finally:
            self._depth -= 1
        self.emit(EventKind.METHOD_EXIT, entry, method.number, frame.id, call_site=site)
        return value

    def run_advice(self, adv: A.AdviceDecl, pc: A.PointcutDecl, bound: dict[str, Value],
                   caller: _Frame, site: int, result: Value = None) -> None:
        frame = self.new_frame(adv)
        defs = []
        for name, pparam in zip(adv.pointcut_args, pc.params):
            frame.locals[name] = bound[pparam.name]
        for p in adv.params:
            defs.append((p.name, frame.locals[p.name]))
        if adv.result is not None:
            frame.locals[adv.result.name] = result
            defs.append((adv.result.name, result))
        self.emit(EventKind.ADVICE_ENTER, adv.number, adv.number, frame.id, defs=tuple(defs),
                  call_site=site, caller=caller.id)
        self._depth += 1
        try:
            self.exec_block(adv.body, frame)
        finally:
            self._depth -= 1
        self.emit(EventKind.ADVICE_EXIT, adv.number, adv.number, frame.id, call_site=site)

    # --- expressions -------------------------------------------------------

    def render(self, e: A.Expr, frame: _Frame, stmt: int, call_value: Value = None) -> str:
        if isinstance(e, A.StrLit):
            return e.value
        if isinstance(e, A.Binary) and e.op == "+" and _is_text(e):
            return self.render(e.left, frame, stmt, call_value) + self.render(e.right, frame, stmt, call_value)
        return show(self.eval(e, frame, stmt, call_value))

    def eval(self, e: A.Expr, frame: _Frame, stmt: int, call_value: Value = None) -> Value:
        if isinstance(e, A.IntLit):
            return wrap(e.value)
        if isinstance(e, A.BoolLit):
            return e.value
        if isinstance(e, A.Var):
            return self.read(frame, e.name)
        if isinstance(e, A.ArgRead):
            index = self.eval(e.index, frame, stmt)
            arr = self.read(frame, e.array)
            assert isinstance(arr, tuple) and isinstance(index, int)
            if not 0 <= index < len(arr):
                raise InputError(f"missing program argument {index}", stmt=stmt)
            try:
                value = int(arr[index])
            except ValueError:
                raise InputError(f"program argument {index} is not an integer: {arr[index]!r}",
                                 stmt=stmt) from None
            if wrap(value) != value:
                raise InputError(f"program argument {index} is out of range: {arr[index]!r}", stmt=stmt)
            return value
        if isinstance(e, (A.CallExpr, A.NewExpr)):
            return call_value
        if isinstance(e, A.Unary):
            v = self.eval(e.operand, frame, stmt, call_value)
            return (not v) if e.op == "!" else wrap(-v)  # type: ignore[operator]
        if isinstance(e, A.Binary):
            return self.binary(e, frame, stmt, call_value)
        raise ExecutionError(f"cannot evaluate {type(e).__name__}", stmt=stmt)  # pragma: no cover

    def binary(self, e: A.Binary, frame: _Frame, stmt: int, call_value: Value) -> Value:
        op = e.op
        left = self.eval(e.left, frame, stmt, call_value)
        if op == "&&":
            return bool(left) and bool(self.eval(e.right, frame, stmt, call_value))
        if op == "||":
            return bool(left) or bool(self.eval(e.right, frame, stmt, call_value))
        right = self.eval(e.right, frame, stmt, call_value)
        if op == "==":
            return left == right and type(left) is type(right)
        if op == "!=":
            return not (left == right and type(left) is type(right))
        a, b = left, right
        assert isinstance(a, int) and isinstance(b, int)
        if op == "+":
            return wrap(a + b)
        if op == "-":
            return wrap(a - b)
        if op == "*":
            return wrap(a * b)
        if op in ("/", "%"):
            if b == 0:
                raise DivisionByZero("division by zero", stmt=stmt)
            q = abs(a) // abs(b)
            if (a < 0) != (b < 0):
                q = -q
            return wrap(q) if op == "/" else wrap(a - b * q)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        raise ExecutionError(f"unknown operator {op!r}", stmt=stmt)  # pragma: no cover


def _is_text(e: A.Expr) -> bool:
    if isinstance(e, A.StrLit):
        return True
    if isinstance(e, A.Binary) and e.op == "+":
        return _is_text(e.left) or _is_text(e.right)
    return False


def run(unit: A.SourceUnit, aosg: Aosg, args: list[str] | tuple[str, ...] = (),
        step_budget: int = DEFAULT_STEP_BUDGET,
        listener: Callable[[Event], None] | None = None) -> Execution:
    """Execute *unit*; raises :class:`ExecutionError` subclasses on failure.

    The partially collected execution is attached to the exception as
    ``execution``.
    """
    interp = Interpreter(unit, aosg, args, step_budget, listener)
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20 * MAX_CALL_DEPTH + 1000))
    try:
        return interp.run()
    except ExecutionError as exc:
        exc.execution = interp.result  # type: ignore[attr-defined]
        raise
    finally:
        sys.setrecursionlimit(limit)
