"""Name resolution and type checking for MiniAJ.

Besides rejecting ill-formed programs, this module answers the one scoping
question every later stage asks: inside a given method or advice, does a
name denote a local (formal or declared local) or a static field?
"""

from __future__ import annotations

from dataclasses import dataclass, field

from aoslice.errors import SemanticError
from aoslice.lang import ast as A

_ARITH = {"+", "-", "*", "/", "%"}
_REL = {"<", "<=", ">", ">="}
_EQ = {"==", "!="}
_LOGIC = {"&&", "||"}


def local_names(owner: A.MethodDecl | A.AdviceDecl) -> frozenset[str]:
    """Formals, bound advice parameters and every local declared in *owner*."""
    names = {p.name for p in owner.params}
    if isinstance(owner, A.AdviceDecl) and owner.result is not None:
        names.add(owner.result.name)
    for s in A.iter_stmts(owner.body):
        if isinstance(s, A.VarDecl):
            names.add(s.name)
        elif isinstance(s, A.For) and s.init is not None and s.init.type is not None:
            names.add(s.init.name)
        elif isinstance(s, A.Assign) and _implicit_owner(owner):
            names.add(s.name)
    return frozenset(names)


def _implicit_owner(owner: A.MethodDecl | A.AdviceDecl) -> bool:
    return isinstance(owner, A.MethodDecl) and owner.number is None


def static_names(unit: A.SourceUnit) -> frozenset[str]:
    return frozenset(f.name for f in unit.cls.fields) if unit.classes else frozenset()


def is_static(unit: A.SourceUnit, owner: A.MethodDecl | A.AdviceDecl, name: str) -> bool:
    return name not in local_names(owner) and name in static_names(unit)


@dataclass
class _Ctx:
    unit: A.SourceUnit
    owner: A.MethodDecl | A.AdviceDecl
    statics: dict[str, str]
    scopes: list[dict[str, str]] = field(default_factory=list)
    all_locals: frozenset[str] = frozenset()

    def lookup(self, name: str, stmt: int) -> str:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if name in self.all_locals:
            raise SemanticError(f"variable {name!r} used outside the scope of its declaration", stmt=stmt)
        if isinstance(self.owner, A.MethodDecl) and name in self.statics:
            return self.statics[name]
        raise SemanticError(f"use of undeclared variable {name!r}", stmt=stmt)

    def declare(self, name: str, vtype: str, stmt: int) -> None:
        for scope in self.scopes:
            if name in scope:
                raise SemanticError(f"duplicate declaration of {name!r}", stmt=stmt)
        self.scopes[-1][name] = vtype


def check_unit(unit: A.SourceUnit) -> None:
    """Raise :class:`SemanticError` on the first violated rule."""
    if not unit.classes:
        if unit.aspects:
            raise SemanticError("aspects require a class to advise")
        return
    if len(unit.classes) > 1:
        raise SemanticError("only one class may be declared per file")
    cls = unit.cls
    statics: dict[str, str] = {}
    for f in cls.fields:
        if f.name in statics:
            raise SemanticError(f"duplicate field {f.name!r}")
        if f.type not in (A.INT, A.BOOL, cls.name):
            raise SemanticError(f"unsupported field type {f.type!r}")
        statics[f.name] = f.type
    seen: set[str] = set()
    for m in cls.methods:
        if m.name in seen:
            raise SemanticError(f"duplicate method {m.name!r}", stmt=m.number)
        seen.add(m.name)
    main = unit.method("main")
    if main is None:
        raise SemanticError("class declares no main method")
    if main.return_type != A.VOID or any(p.type != A.STRING_ARRAY for p in main.params) or len(main.params) > 1:
        raise SemanticError("main must be 'void main(String[] args)'", stmt=main.number)
    for m in unit.methods():
        _check_params(m.params, m.number)
        if m.return_type not in (A.INT, A.BOOL, A.VOID, cls.name):
            raise SemanticError(f"unsupported return type {m.return_type!r}", stmt=m.number)
        for p in m.params:
            if m is not main and p.type not in (A.INT, A.BOOL, cls.name):
                raise SemanticError(f"unsupported parameter type {p.type!r}", stmt=m.number)
        ctx = _Ctx(unit, m, statics, [{p.name: p.type for p in m.params}], local_names(m))
        _check_block(ctx, m.body, new_scope=False)
        if m.return_type != A.VOID and not _always_returns(m.body):
            raise SemanticError(f"method {m.name!r} may finish without returning a value", stmt=m.number)

    aspect_names: set[str] = set()
    for asp in unit.aspects:
        if asp.name in aspect_names or asp.name == cls.name:
            raise SemanticError(f"duplicate name {asp.name!r}", stmt=asp.number)
        aspect_names.add(asp.name)
        pcs: dict[str, A.PointcutDecl] = {}
        for pc in asp.pointcuts:
            if pc.name in pcs:
                raise SemanticError(f"duplicate pointcut {pc.name!r}", stmt=pc.number)
            pcs[pc.name] = pc
            _check_pointcut(unit, pc)
        for adv in asp.advices:
            _check_advice(unit, adv, pcs, statics)
    _check_single_match(unit)


def designator_matches(d: A.CallDesignator, cls: A.ClassDecl, m: A.MethodDecl) -> bool:
    """Signature equality between a ``call(...)`` designator and a method."""
    return (not m.is_constructor and d.cls == cls.name and d.method == m.name
            and d.return_type == m.return_type
            and d.param_types == tuple(p.type for p in m.params))


def _check_single_match(unit: A.SourceUnit) -> None:
    # advice precedence between pointcuts is undefined, so a method may be
    # designated by at most one pointcut
    for m in unit.cls.methods:
        hits = [pc for asp in unit.aspects for pc in asp.pointcuts
                if designator_matches(pc.designator, unit.cls, m)]
        if len(hits) > 1:
            raise SemanticError(f"method {m.name!r} is designated by more than one pointcut",
                                stmt=hits[1].number)


def _check_params(params: tuple[A.Param, ...], stmt: int | None) -> None:
    names = [p.name for p in params]
    if len(set(names)) != len(names):
        raise SemanticError("duplicate parameter name", stmt=stmt)


def _check_pointcut(unit: A.SourceUnit, pc: A.PointcutDecl) -> None:
    _check_params(pc.params, pc.number)
    d = pc.designator
    if d.cls != unit.cls.name:
        raise SemanticError(f"pointcut names unknown class {d.cls!r}", stmt=pc.number)
    binding = d.args_binding
    if len(binding) != len(pc.params):
        raise SemanticError(
            f"pointcut {pc.name!r} declares {len(pc.params)} parameter(s) but args() binds {len(binding)}",
            stmt=pc.number)
    if binding and len(binding) != len(d.param_types):
        raise SemanticError("args() must bind every argument of the designated method", stmt=pc.number)
    ptypes = {p.name: p.type for p in pc.params}
    if sorted(binding) != sorted(ptypes):
        raise SemanticError("args() must bind each pointcut parameter exactly once", stmt=pc.number)
    for name, t in zip(binding, d.param_types):
        if ptypes[name] != t:
            raise SemanticError(f"type mismatch for pointcut parameter {name!r}", stmt=pc.number)


def _check_advice(unit: A.SourceUnit, adv: A.AdviceDecl, pcs: dict[str, A.PointcutDecl],
                  statics: dict[str, str]) -> None:
    pc = pcs.get(adv.pointcut)
    if pc is None:
        raise SemanticError(f"advice references unknown pointcut {adv.pointcut!r}", stmt=adv.number)
    if len(adv.pointcut_args) != len(pc.params):
        raise SemanticError(f"pointcut {pc.name!r} expects {len(pc.params)} argument(s)", stmt=adv.number)
    _check_params(adv.params + ((adv.result,) if adv.result else ()), adv.number)
    own = {p.name: p.type for p in adv.params}
    for name, pparam in zip(adv.pointcut_args, pc.params):
        if name not in own:
            raise SemanticError(f"{name!r} is not a parameter of this advice", stmt=adv.number)
        if own[name] != pparam.type:
            raise SemanticError(f"type mismatch binding {name!r}", stmt=adv.number)
    if len(set(adv.pointcut_args)) != len(adv.pointcut_args):
        raise SemanticError("advice binds a parameter twice", stmt=adv.number)
    unbound = set(own) - set(adv.pointcut_args)
    if unbound:
        raise SemanticError(f"advice parameter {sorted(unbound)[0]!r} is not bound by the pointcut",
                            stmt=adv.number)
    if (adv.kind == A.AFTER_RETURNING) != (adv.result is not None):
        raise SemanticError("only after-returning advice binds a result", stmt=adv.number)
    if adv.result is not None:
        rt = pc.designator.return_type
        if rt == A.VOID:
            raise SemanticError("after-returning advice needs a non-void join point", stmt=adv.number)
        if adv.result.type != rt:
            raise SemanticError("returning() type differs from the designated return type", stmt=adv.number)
    for s in A.iter_stmts(adv.body):
        if isinstance(s, A.Return):
            raise SemanticError("return is not allowed in advice bodies", stmt=s.number)
    scope = dict(own)
    if adv.result is not None:
        scope[adv.result.name] = adv.result.type
    ctx = _Ctx(unit, adv, statics, [scope], local_names(adv))
    _check_block(ctx, adv.body, new_scope=False)


def _always_returns(block: A.Block) -> bool:
    if not block.stmts:
        return False
    last = block.stmts[-1]
    if isinstance(last, A.Return):
        return True
    if isinstance(last, A.If) and last.orelse is not None:
        return _always_returns(last.then) and _always_returns(last.orelse)
    return False


def _check_block(ctx: _Ctx, block: A.Block, new_scope: bool = True) -> None:
    if new_scope:
        ctx.scopes.append({})
    for s in block.stmts:
        _check_stmt(ctx, s)
    if new_scope:
        ctx.scopes.pop()


def _check_single_call(stmt: A.Stmt) -> None:
    calls = [e for top in A.stmt_exprs(stmt) for e in A.iter_exprs(top)
             if isinstance(e, (A.CallExpr, A.NewExpr))]
    if len(calls) > 1:
        raise SemanticError("a statement may contain at most one call or 'new'", stmt=stmt.number)


def _check_stmt(ctx: _Ctx, s: A.Stmt) -> None:
    _check_single_call(s)
    n = s.number
    if isinstance(s, A.VarDecl):
        t = _type_of(ctx, s.init, n)
        if t != s.type:
            raise SemanticError(f"cannot initialise {s.type} {s.name!r} with {t}", stmt=n)
        ctx.declare(s.name, s.type, n)
    elif isinstance(s, A.Assign):
        t = _type_of(ctx, s.value, n)
        if _implicit_owner(ctx.owner) and not any(s.name in sc for sc in ctx.scopes):
            ctx.scopes[0][s.name] = t
        target = ctx.lookup(s.name, n)
        if target != t:
            raise SemanticError(f"cannot assign {t} to {target} {s.name!r}", stmt=n)
    elif isinstance(s, A.If):
        _expect(ctx, s.cond, A.BOOL, n)
        _check_block(ctx, s.then)
        if s.orelse is not None:
            _check_block(ctx, s.orelse)
    elif isinstance(s, A.While):
        _expect(ctx, s.cond, A.BOOL, n)
        _check_block(ctx, s.body)
    elif isinstance(s, A.For):
        if A.call_of(s) is not None:
            raise SemanticError("calls are not allowed in a for header", stmt=n)
        ctx.scopes.append({})
        if s.init is not None:
            t = _type_of(ctx, s.init.value, n)
            if s.init.type is not None:
                if t != s.init.type:
                    raise SemanticError("for-initialiser type mismatch", stmt=n)
                ctx.declare(s.init.name, t, n)
            elif ctx.lookup(s.init.name, n) != t:
                raise SemanticError("for-initialiser type mismatch", stmt=n)
        _expect(ctx, s.cond, A.BOOL, n)
        if s.step is not None and ctx.lookup(s.step.name, n) != _type_of(ctx, s.step.value, n):
            raise SemanticError("for-step type mismatch", stmt=n)
        _check_block(ctx, s.body)
        ctx.scopes.pop()
    elif isinstance(s, A.ExprStmt):
        _type_of(ctx, s.expr, n, allow_void=True)
    elif isinstance(s, A.Return):
        if not isinstance(ctx.owner, A.MethodDecl):
            raise SemanticError("return outside a method", stmt=n)
        rt = ctx.owner.return_type
        if s.value is None:
            if rt != A.VOID:
                raise SemanticError("missing return value", stmt=n)
        else:
            if rt == A.VOID:
                raise SemanticError("void method returns a value", stmt=n)
            t = _type_of(ctx, s.value, n)
            if t != rt:
                raise SemanticError(f"returns {t}, declared {rt}", stmt=n)
    elif isinstance(s, A.Print):
        _type_of(ctx, s.value, n, allow_string=True)
    else:  # pragma: no cover - parser never builds anything else
        raise SemanticError(f"unknown statement {type(s).__name__}", stmt=n)


def _expect(ctx: _Ctx, e: A.Expr, want: str, stmt: int) -> None:
    got = _type_of(ctx, e, stmt)
    if got != want:
        raise SemanticError(f"expected {want} expression, found {got}", stmt=stmt)


def _type_of(ctx: _Ctx, e: A.Expr, stmt: int, allow_void: bool = False,
             allow_string: bool = False) -> str:
    if isinstance(e, A.IntLit):
        return A.INT
    if isinstance(e, A.BoolLit):
        return A.BOOL
    if isinstance(e, A.StrLit):
        if not allow_string:
            raise SemanticError("string literals may only appear in print", stmt=stmt)
        return A.STRING
    if isinstance(e, A.Var):
        t = ctx.lookup(e.name, stmt)
        if t == A.STRING_ARRAY:
            raise SemanticError(f"{e.name!r} can only be indexed", stmt=stmt)
        return t
    if isinstance(e, A.ArgRead):
        if ctx.lookup(e.array, stmt) != A.STRING_ARRAY:
            raise SemanticError(f"{e.array!r} is not the argument array", stmt=stmt)
        _expect(ctx, e.index, A.INT, stmt)
        return A.INT
    if isinstance(e, A.Unary):
        want = A.BOOL if e.op == "!" else A.INT
        _expect(ctx, e.operand, want, stmt)
        return want
    if isinstance(e, A.Binary):
        if e.op == "+" and allow_string:
            lt = _type_of(ctx, e.left, stmt, allow_string=True)
            rt = _type_of(ctx, e.right, stmt, allow_string=True)
            if A.STRING in (lt, rt):
                return A.STRING
            if lt == rt == A.INT:
                return A.INT
            raise SemanticError("operands of + must be int", stmt=stmt)
        if e.op in _ARITH or e.op in _REL:
            _expect(ctx, e.left, A.INT, stmt)
            _expect(ctx, e.right, A.INT, stmt)
            return A.INT if e.op in _ARITH else A.BOOL
        if e.op in _LOGIC:
            _expect(ctx, e.left, A.BOOL, stmt)
            _expect(ctx, e.right, A.BOOL, stmt)
            return A.BOOL
        if e.op in _EQ:
            lt = _type_of(ctx, e.left, stmt)
            rt = _type_of(ctx, e.right, stmt)
            if lt != rt:
                raise SemanticError(f"cannot compare {lt} with {rt}", stmt=stmt)
            return A.BOOL
        raise SemanticError(f"unknown operator {e.op!r}", stmt=stmt)
    if isinstance(e, (A.CallExpr, A.NewExpr)):
        for a in e.args:
            if any(isinstance(x, (A.CallExpr, A.NewExpr)) for x in A.iter_exprs(a)):
                raise SemanticError("call arguments may not contain calls", stmt=stmt)
        if isinstance(e, A.NewExpr):
            cls = ctx.unit.cls
            if e.cls != cls.name:
                raise SemanticError(f"unknown class {e.cls!r}", stmt=stmt)
            params = cls.constructor.params if cls.constructor else ()
            ret = cls.name
            what = f"constructor of {cls.name}"
        else:
            target = ctx.unit.method(e.name)
            if target is None:
                raise SemanticError(f"call to undeclared method {e.name!r}", stmt=stmt)
            if target.name == "main":
                raise SemanticError("main may not be called", stmt=stmt)
            params = target.params
            ret = target.return_type
            what = f"method {e.name!r}"
        if len(e.args) != len(params):
            raise SemanticError(f"{what} takes {len(params)} argument(s), {len(e.args)} given", stmt=stmt)
        for a, p in zip(e.args, params):
            _expect(ctx, a, p.type, stmt)
        if ret == A.VOID and not allow_void:
            raise SemanticError(f"{what} returns no value", stmt=stmt)
        return ret
    raise SemanticError(f"unknown expression {type(e).__name__}", stmt=stmt)
