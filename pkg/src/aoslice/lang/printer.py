"""Pretty-printer producing canonical MiniAJ text.

The output re-parses to a tree equal to the input, numbering included.
Nested binary expressions are fully parenthesised for that reason.
"""

from __future__ import annotations

from aoslice.lang import ast as A

_INDENT = "    "


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


def format_expr(e: A.Expr, nested: bool = False) -> str:
    if isinstance(e, A.IntLit):
        return f"({e.value})" if e.value < 0 else str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.StrLit):
        return f'"{_escape(e.value)}"'
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.ArgRead):
        return f"Integer.parseInt({e.array}[{format_expr(e.index)}])"
    if isinstance(e, A.Unary):
        return f"{e.op}{format_expr(e.operand, nested=True)}"
    if isinstance(e, A.Binary):
        text = f"{format_expr(e.left, True)} {e.op} {format_expr(e.right, True)}"
        return f"({text})" if nested else text
    if isinstance(e, A.CallExpr):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, A.NewExpr):
        return f"new {e.cls}({', '.join(format_expr(a) for a in e.args)})"
    raise TypeError(e)


def _params(params: tuple[A.Param, ...]) -> str:
    return ", ".join(f"{p.type} {p.name}" for p in params)


class _Writer:
    def __init__(self, numbered: bool):
        self.lines: list[str] = []
        self.numbered = numbered

    def emit(self, depth: int, text: str, number: int | None = None) -> None:
        line = _INDENT * depth + text
        if self.numbered and number is not None:
            line = f"{line}  // {number}"
        self.lines.append(line)

    def block(self, block: A.Block, depth: int) -> None:
        for s in block.stmts:
            self.stmt(s, depth)

    def stmt(self, s: A.Stmt, depth: int) -> None:
        n = s.number
        if isinstance(s, A.VarDecl):
            self.emit(depth, f"{s.type} {s.name} = {format_expr(s.init)};", n)
        elif isinstance(s, A.Assign):
            self.emit(depth, f"{s.name} = {format_expr(s.value)};", n)
        elif isinstance(s, A.If):
            self.emit(depth, f"if ({format_expr(s.cond)}) {{", n)
            self.block(s.then, depth + 1)
            if s.orelse is not None:
                self.emit(depth, "} else {")
                self.block(s.orelse, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, A.While):
            self.emit(depth, f"while ({format_expr(s.cond)}) {{", n)
            self.block(s.body, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, A.For):
            init = ""
            if s.init is not None:
                prefix = f"{s.init.type} " if s.init.type else ""
                init = f"{prefix}{s.init.name} = {format_expr(s.init.value)}"
            step = f"{s.step.name} = {format_expr(s.step.value)}" if s.step else ""
            self.emit(depth, f"for ({init}; {format_expr(s.cond)}; {step}) {{", n)
            self.block(s.body, depth + 1)
            self.emit(depth, "}")
        elif isinstance(s, A.ExprStmt):
            self.emit(depth, f"{format_expr(s.expr)};", n)
        elif isinstance(s, A.Return):
            self.emit(depth, "return;" if s.value is None else f"return {format_expr(s.value)};", n)
        elif isinstance(s, A.Print):
            self.emit(depth, f"print({format_expr(s.value)});", n)
        else:
            raise TypeError(s)


def format_unit(unit: A.SourceUnit, numbered: bool = False) -> str:
    """Render *unit* as source text; ``numbered`` appends ``// N`` comments."""
    w = _Writer(numbered)
    if unit.script:
        if unit.classes:
            w.block(unit.cls.methods[0].body, 0)
        return "\n".join(w.lines) + ("\n" if w.lines else "")
    for cls in unit.classes:
        w.emit(0, f"class {cls.name} {{")
        for f in cls.fields:
            w.emit(1, f"static {f.type} {f.name};")
        members: list[tuple[int, A.MethodDecl]] = [(m.number, m) for m in cls.methods]
        if cls.constructor is not None:
            members.append((cls.constructor.number, cls.constructor))
        for _, m in sorted(members, key=lambda t: t[0]):
            if m.is_constructor:
                w.emit(1, f"{m.name}({_params(m.params)}) {{", m.number)
            else:
                w.emit(1, f"static {m.return_type} {m.name}({_params(m.params)}) {{", m.number)
            w.block(m.body, 2)
            w.emit(1, "}")
        w.emit(0, "}")
    for asp in unit.aspects:
        w.emit(0, f"aspect {asp.name} {{", asp.number)
        items: list[tuple[int, object]] = [(p.number, p) for p in asp.pointcuts]
        items += [(a.number, a) for a in asp.advices]
        for _, item in sorted(items, key=lambda t: t[0]):
            if isinstance(item, A.PointcutDecl):
                d = item.designator
                binding = f" && args({', '.join(d.args_binding)})" if d.args_binding else ""
                w.emit(1, f"pointcut {item.name}({_params(item.params)}): "
                          f"call({d.return_type} {d.cls}.{d.method}({', '.join(d.param_types)})){binding};",
                       item.number)
            else:
                adv: A.AdviceDecl = item  # type: ignore[assignment]
                head = f"{adv.kind}({_params(adv.params)})"
                if adv.result is not None:
                    head += f" returning({adv.result.type} {adv.result.name})"
                w.emit(1, f"{head}: {adv.pointcut}({', '.join(adv.pointcut_args)}) {{", adv.number)
                w.block(adv.body, 2)
                w.emit(1, "}")
        w.emit(0, "}")
    return "\n".join(w.lines) + "\n"
