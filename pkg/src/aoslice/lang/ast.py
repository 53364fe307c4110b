"""MiniAJ syntax tree.

Statement-level nodes carry ``number``: the tool-assigned statement number
used by every later stage. Source spans are informational and excluded from
equality so that a pretty-printed and re-parsed tree compares equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    end_line: int
    end_column: int


def _span() -> Span | None:
    return field(default=None, compare=False, repr=False)


# --- types ------------------------------------------------------------------

INT = "int"
BOOL = "boolean"
VOID = "void"
STRING = "String"
STRING_ARRAY = "String[]"


@dataclass(frozen=True)
class Param:
    type: str
    name: str


# --- expressions ----------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ArgRead:
    """``args[index]``: read one integer program argument."""

    array: str
    index: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"


@dataclass(frozen=True)
class CallExpr:
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class NewExpr:
    cls: str
    args: tuple["Expr", ...]


Expr = Union[IntLit, BoolLit, StrLit, Var, ArgRead, Binary, Unary, CallExpr, NewExpr]


# --- statements -------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    stmts: tuple["Stmt", ...]


@dataclass(frozen=True)
class VarDecl:
    number: int
    type: str
    name: str
    init: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class Assign:
    number: int
    name: str
    value: Expr
    span: Span | None = _span()


@dataclass(frozen=True)
class If:
    number: int
    cond: Expr
    then: Block
    orelse: Block | None
    span: Span | None = _span()


@dataclass(frozen=True)
class While:
    number: int
    cond: Expr
    body: Block
    span: Span | None = _span()


@dataclass(frozen=True)
class ForInit:
    """Init clause of a ``for``: a declaration (``type`` set) or plain assignment."""

    type: str | None
    name: str
    value: Expr


@dataclass(frozen=True)
class ForStep:
    name: str
    value: Expr


@dataclass(frozen=True)
class For:
    number: int
    init: ForInit | None
    cond: Expr
    step: ForStep | None
    body: Block
    span: Span | None = _span()


@dataclass(frozen=True)
class ExprStmt:
    number: int
    expr: CallExpr | NewExpr
    span: Span | None = _span()


@dataclass(frozen=True)
class Return:
    number: int
    value: Expr | None
    span: Span | None = _span()


@dataclass(frozen=True)
class Print:
    number: int
    value: Expr
    span: Span | None = _span()


Stmt = Union[VarDecl, Assign, If, While, For, ExprStmt, Return, Print]


# --- declarations -----------------------------------------------------------


@dataclass(frozen=True)
class FieldDecl:
    type: str
    name: str


@dataclass(frozen=True)
class MethodDecl:
    name: str
    params: tuple[Param, ...]
    return_type: str
    body: Block
    number: int | None  # None only for the implicit main of a script
    is_constructor: bool = False
    span: Span | None = _span()


@dataclass(frozen=True)
class ClassDecl:
    name: str
    fields: tuple[FieldDecl, ...]
    methods: tuple[MethodDecl, ...]
    constructor: MethodDecl | None = None


@dataclass(frozen=True)
class CallDesignator:
    return_type: str
    cls: str
    method: str
    param_types: tuple[str, ...]
    args_binding: tuple[str, ...]


@dataclass(frozen=True)
class PointcutDecl:
    name: str
    params: tuple[Param, ...]
    designator: CallDesignator
    number: int
    span: Span | None = _span()


BEFORE = "before"
AFTER_RETURNING = "after"


@dataclass(frozen=True)
class AdviceDecl:
    kind: str
    params: tuple[Param, ...]
    result: Param | None
    pointcut: str
    pointcut_args: tuple[str, ...]
    body: Block
    number: int
    span: Span | None = _span()


@dataclass(frozen=True)
class AspectDecl:
    name: str
    pointcuts: tuple[PointcutDecl, ...]
    advices: tuple[AdviceDecl, ...]
    number: int
    span: Span | None = _span()


@dataclass(frozen=True)
class SourceUnit:
    path: str = field(compare=False)
    text: str = field(compare=False, repr=False)
    classes: tuple[ClassDecl, ...]
    aspects: tuple[AspectDecl, ...]
    script: bool = False

    @property
    def cls(self) -> ClassDecl:
        return self.classes[0]

    def methods(self) -> tuple[MethodDecl, ...]:
        if not self.classes:
            return ()
        c = self.cls
        return c.methods + ((c.constructor,) if c.constructor else ())

    def method(self, name: str) -> MethodDecl | None:
        for m in self.methods():
            if m.name == name and m is not self.cls.constructor:
                return m
        return None

    def bodies(self) -> Iterator[tuple[MethodDecl | AdviceDecl, Block]]:
        for m in self.methods():
            yield m, m.body
        for a in self.aspects:
            for adv in a.advices:
                yield adv, adv.body

    def statement_count(self) -> int:
        return max(numbered_nodes(self), default=0)


# --- traversal helpers ------------------------------------------------------


def iter_stmts(block: Block | None) -> Iterator[Stmt]:
    """All statements in *block*, pre-order, nested ones included."""
    if block is None:
        return
    for s in block.stmts:
        yield s
        if isinstance(s, If):
            yield from iter_stmts(s.then)
            yield from iter_stmts(s.orelse)
        elif isinstance(s, (While, For)):
            yield from iter_stmts(s.body)


def iter_exprs(expr: Expr | None) -> Iterator[Expr]:
    if expr is None:
        return
    yield expr
    if isinstance(expr, Binary):
        yield from iter_exprs(expr.left)
        yield from iter_exprs(expr.right)
    elif isinstance(expr, Unary):
        yield from iter_exprs(expr.operand)
    elif isinstance(expr, ArgRead):
        yield from iter_exprs(expr.index)
    elif isinstance(expr, (CallExpr, NewExpr)):
        for a in expr.args:
            yield from iter_exprs(a)


def stmt_exprs(stmt: Stmt) -> list[Expr]:
    """Top-level expressions evaluated by *stmt* itself (not nested statements)."""
    if isinstance(stmt, (VarDecl, Assign)):
        return [stmt.init if isinstance(stmt, VarDecl) else stmt.value]
    if isinstance(stmt, (If, While)):
        return [stmt.cond]
    if isinstance(stmt, For):
        out = [stmt.cond]
        if stmt.init is not None:
            out.insert(0, stmt.init.value)
        if stmt.step is not None:
            out.append(stmt.step.value)
        return out
    if isinstance(stmt, ExprStmt):
        return [stmt.expr]
    if isinstance(stmt, (Return, Print)):
        return [] if stmt.value is None else [stmt.value]
    raise TypeError(stmt)


def call_of(stmt: Stmt) -> CallExpr | NewExpr | None:
    """The single call or ``new`` expression inside *stmt*, if any."""
    for e in stmt_exprs(stmt):
        for sub in iter_exprs(e):
            if isinstance(sub, (CallExpr, NewExpr)):
                return sub
    return None


def numbered_nodes(unit: SourceUnit) -> dict[int, object]:
    """Map statement number -> the construct that owns it."""
    out: dict[int, object] = {}
    for m in unit.methods():
        if m.number is not None:
            out[m.number] = m
        for s in iter_stmts(m.body):
            out[s.number] = s
    for a in unit.aspects:
        out[a.number] = a
        for p in a.pointcuts:
            out[p.number] = p
        for adv in a.advices:
            out[adv.number] = adv
            for s in iter_stmts(adv.body):
                out[s.number] = s
    return out


def number_of(node: object) -> int:
    """Statement number of a numbered construct."""
    n = getattr(node, "number", None)
    if not isinstance(n, int):
        raise TypeError(f"{type(node).__name__} carries no statement number")
    return n
