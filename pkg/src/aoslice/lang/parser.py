"""Recursive-descent parser for MiniAJ.

A file is either one class plus any number of aspects, or (script form) a
bare sequence of statements that becomes the body of an implicit ``main``.
Statement numbers are handed out in source order as constructs are entered.
"""

from __future__ import annotations

import re

from aoslice.errors import ParseError
from aoslice.lang import ast as A
from aoslice.lang.lexer import Token, tokenize

_MODIFIERS = ("kw_public", "kw_private", "kw_protected", "kw_static", "kw_final")
_TYPE_KW = {"kw_int": A.INT, "kw_boolean": A.BOOL, "kw_Boolean": A.BOOL,
            "kw_void": A.VOID, "kw_String": A.STRING}
_BINARY_LEVELS = [
    {"or": "||"},
    {"and": "&&"},
    {"eq": "==", "ne": "!="},
    {"lt": "<", "le": "<=", "gt": ">", "ge": ">="},
    {"plus": "+", "minus": "-"},
    {"star": "*", "slash": "/", "percent": "%"},
]


_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


def unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


class Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.counter = 0

    # -- token plumbing ------------------------------------------------------

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def at(self, *kinds: str, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind in kinds

    def fail(self, expected: set[str] | frozenset[str], what: str = "unexpected token") -> ParseError:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line, col = (last.end_line, last.end_column) if last else (1, 1)
            return ParseError(f"{what}: end of input", line, col, frozenset(expected))
        return ParseError(f"{what}: {tok.text!r}", tok.line, tok.column, frozenset(expected))

    def expect(self, kind: str, text: str | None = None) -> Token:
        tok = self.peek()
        if tok is None or tok.kind != kind or (text is not None and tok.text != text):
            raise self.fail({text or kind})
        self.pos += 1
        return tok

    def accept(self, kind: str) -> Token | None:
        if self.at(kind):
            return self.expect(kind)
        return None

    def next_number(self) -> int:
        self.counter += 1
        return self.counter

    def span_from(self, start: Token) -> A.Span:
        end = self.tokens[self.pos - 1]
        return A.Span(start.line, start.column, end.end_line, end.end_column)

    # -- compilation unit ----------------------------------------------------

    def parse_unit(self, path: str, text: str) -> A.SourceUnit:
        if not self.tokens:
            return A.SourceUnit(path, text, (), (), script=True)
        if self._starts_declaration():
            classes: list[A.ClassDecl] = []
            aspects: list[A.AspectDecl] = []
            while self.peek() is not None:
                self.skip_modifiers()
                if self.at("kw_class"):
                    classes.append(self.parse_class())
                elif self.at("kw_aspect"):
                    aspects.append(self.parse_aspect())
                else:
                    raise self.fail({"kw_class", "kw_aspect"})
            return A.SourceUnit(path, text, tuple(classes), tuple(aspects))
        stmts = []
        while self.peek() is not None:
            stmts.append(self.parse_stmt())
        main = A.MethodDecl("main", (A.Param(A.STRING_ARRAY, "args"),), A.VOID, A.Block(tuple(stmts)), None)
        cls = A.ClassDecl("Main", (), (main,))
        return A.SourceUnit(path, text, (cls,), (), script=True)

    def _starts_declaration(self) -> bool:
        i = 0
        while self.at(*_MODIFIERS, offset=i):
            i += 1
        return self.at("kw_class", "kw_aspect", offset=i)

    def skip_modifiers(self) -> None:
        while self.at(*_MODIFIERS):
            self.pos += 1

    def parse_type(self) -> str:
        tok = self.peek()
        if tok is not None and tok.kind in _TYPE_KW:
            self.pos += 1
            t = _TYPE_KW[tok.kind]
        elif tok is not None and tok.kind == "ident":
            self.pos += 1
            t = tok.text
        else:
            raise self.fail(set(_TYPE_KW) | {"ident"}, "expected a type")
        if self.at("lbracket") and self.at("rbracket", offset=1):
            self.pos += 2
            t += "[]"
        return t

    def parse_params(self) -> tuple[A.Param, ...]:
        self.expect("lparen")
        params = []
        if not self.at("rparen"):
            while True:
                self.accept("kw_final")
                ptype = self.parse_type()
                name = self.expect("ident").text
                if self.at("lbracket"):  # C-style array declarator: String args[]
                    self.expect("lbracket")
                    self.expect("rbracket")
                    ptype += "[]"
                params.append(A.Param(ptype, name))
                if not self.accept("comma"):
                    break
        self.expect("rparen")
        return tuple(params)

    def parse_class(self) -> A.ClassDecl:
        self.expect("kw_class")
        name = self.expect("ident").text
        self.expect("lbrace")
        fields: list[A.FieldDecl] = []
        methods: list[A.MethodDecl] = []
        ctor: A.MethodDecl | None = None
        while not self.at("rbrace"):
            if self.peek() is None:
                raise self.fail({"rbrace"})
            self.skip_modifiers()
            start = self.peek()
            if self.at("ident") and self.peek().text == name and self.at("lparen", offset=1):
                number = self.next_number()
                self.pos += 1
                params = self.parse_params()
                body = self.parse_block()
                m = A.MethodDecl(name, params, A.VOID, body, number, is_constructor=True,
                                 span=self.span_from(start))
                if ctor is not None:
                    raise ParseError(f"duplicate constructor for class {name}", start.line, start.column)
                ctor = m
                continue
            ftype = self.parse_type()
            ident = self.expect("ident")
            if self.accept("semi"):
                fields.append(A.FieldDecl(ftype, ident.text))
                continue
            if not self.at("lparen"):
                raise self.fail({"semi", "lparen"})
            number = self.next_number()
            params = self.parse_params()
            body = self.parse_block()
            methods.append(A.MethodDecl(ident.text, params, ftype, body, number,
                                        span=self.span_from(start)))
        self.expect("rbrace")
        return A.ClassDecl(name, tuple(fields), tuple(methods), ctor)

    def parse_aspect(self) -> A.AspectDecl:
        start = self.expect("kw_aspect")
        number = self.next_number()
        name = self.expect("ident").text
        self.expect("lbrace")
        pointcuts: list[A.PointcutDecl] = []
        advices: list[A.AdviceDecl] = []
        while not self.at("rbrace"):
            self.skip_modifiers()
            if self.at("kw_pointcut"):
                pointcuts.append(self.parse_pointcut())
            elif self.at("kw_before", "kw_after"):
                advices.append(self.parse_advice())
            else:
                raise self.fail({"kw_pointcut", "kw_before", "kw_after", "rbrace"})
        self.expect("rbrace")
        return A.AspectDecl(name, tuple(pointcuts), tuple(advices), number, span=self.span_from(start))

    def parse_pointcut(self) -> A.PointcutDecl:
        start = self.expect("kw_pointcut")
        number = self.next_number()
        name = self.expect("ident").text
        params = self.parse_params()
        self.expect("colon")
        self.expect("kw_call")
        self.expect("lparen")
        ret = self.parse_type()
        cls = self.expect("ident").text
        self.accept("dot")
        method = self.expect("ident").text
        self.expect("lparen")
        ptypes: list[str] = []
        if not self.at("rparen"):
            ptypes.append(self.parse_type())
            while self.accept("comma"):
                ptypes.append(self.parse_type())
        self.expect("rparen")
        self.expect("rparen")
        binding: tuple[str, ...] = ()
        if self.accept("and"):
            self.expect("ident", "args")
            binding = self.parse_name_list()
        self.expect("semi")
        designator = A.CallDesignator(ret, cls, method, tuple(ptypes), binding)
        return A.PointcutDecl(name, params, designator, number, span=self.span_from(start))

    def parse_name_list(self) -> tuple[str, ...]:
        self.expect("lparen")
        names: list[str] = []
        if not self.at("rparen"):
            names.append(self.expect("ident").text)
            while self.accept("comma"):
                names.append(self.expect("ident").text)
        self.expect("rparen")
        return tuple(names)

    def parse_advice(self) -> A.AdviceDecl:
        start = self.peek()
        number = self.next_number()
        result = None
        if self.accept("kw_before"):
            kind = A.BEFORE
            params = self.parse_params()
        else:
            self.expect("kw_after")
            kind = A.AFTER_RETURNING
            params = self.parse_params()
            self.expect("kw_returning")
            self.expect("lparen")
            rtype = self.parse_type()
            result = A.Param(rtype, self.expect("ident").text)
            self.expect("rparen")
        self.expect("colon")
        pc = self.expect("ident").text
        pc_args = self.parse_name_list()
        body = self.parse_block()
        return A.AdviceDecl(kind, params, result, pc, pc_args, body, number, span=self.span_from(start))

    # -- statements ----------------------------------------------------------

    def parse_block(self) -> A.Block:
        self.expect("lbrace")
        stmts = []
        while not self.at("rbrace"):
            if self.peek() is None:
                raise self.fail({"rbrace"})
            stmts.append(self.parse_stmt())
        self.expect("rbrace")
        return A.Block(tuple(stmts))

    def parse_body(self) -> A.Block:
        if self.at("lbrace"):
            return self.parse_block()
        return A.Block((self.parse_stmt(),))

    def parse_stmt(self) -> A.Stmt:
        start = self.peek()
        if start is None:
            raise self.fail({"statement"})
        kind = start.kind
        if kind == "kw_if":
            self.pos += 1
            number = self.next_number()
            self.expect("lparen")
            cond = self.parse_expr()
            self.expect("rparen")
            then = self.parse_body()
            orelse = self.parse_body() if self.accept("kw_else") else None
            return A.If(number, cond, then, orelse, span=self.span_from(start))
        if kind == "kw_while":
            self.pos += 1
            number = self.next_number()
            self.expect("lparen")
            cond = self.parse_expr()
            self.expect("rparen")
            return A.While(number, cond, self.parse_body(), span=self.span_from(start))
        if kind == "kw_for":
            return self.parse_for()
        number = self.next_number()
        if kind == "kw_return":
            self.pos += 1
            value = None if self.at("semi") else self.parse_expr()
            self.expect("semi")
            return A.Return(number, value, span=self.span_from(start))
        if kind == "kw_print" or (kind == "ident" and start.text == "System"):
            self.parse_print_head()
            self.expect("lparen")
            value = self.parse_expr()
            self.expect("rparen")
            self.expect("semi")
            return A.Print(number, value, span=self.span_from(start))
        if kind == "kw_new":
            expr = self.parse_primary()
            self.expect("semi")
            return A.ExprStmt(number, expr, span=self.span_from(start))
        if kind in _TYPE_KW or (kind == "ident" and self.at("ident", offset=1)):
            vtype = self.parse_type()
            name = self.expect("ident").text
            self.expect("assign")
            init = self.parse_expr()
            self.expect("semi")
            return A.VarDecl(number, vtype, name, init, span=self.span_from(start))
        if kind == "ident":
            if self.at("assign", "incr", "decr", offset=1):
                name, value = self.parse_update()
                self.expect("semi")
                return A.Assign(number, name, value, span=self.span_from(start))
            expr = self.parse_primary()
            if not isinstance(expr, A.CallExpr):
                raise ParseError("only calls may be used as expression statements",
                                 start.line, start.column)
            self.expect("semi")
            return A.ExprStmt(number, expr, span=self.span_from(start))
        raise self.fail({"statement"})

    def parse_print_head(self) -> None:
        if self.accept("kw_print"):
            return
        self.expect("ident", "System")
        self.expect("dot")
        self.expect("ident", "out")
        self.expect("dot")
        self.expect("ident", "println")

    def parse_update(self) -> tuple[str, A.Expr]:
        name = self.expect("ident").text
        if self.accept("incr"):
            return name, A.Binary("+", A.Var(name), A.IntLit(1))
        if self.accept("decr"):
            return name, A.Binary("-", A.Var(name), A.IntLit(1))
        self.expect("assign")
        return name, self.parse_expr()

    def parse_for(self) -> A.For:
        start = self.expect("kw_for")
        number = self.next_number()
        self.expect("lparen")
        init = None
        if not self.at("semi"):
            vtype = None
            if self.at(*_TYPE_KW) or (self.at("ident") and self.at("ident", offset=1)):
                vtype = self.parse_type()
            name = self.expect("ident").text
            self.expect("assign")
            init = A.ForInit(vtype, name, self.parse_expr())
        self.expect("semi")
        cond = self.parse_expr()
        self.expect("semi")
        step = None
        if not self.at("rparen"):
            name, value = self.parse_update()
            step = A.ForStep(name, value)
        self.expect("rparen")
        body = self.parse_body()
        return A.For(number, init, cond, step, body, span=self.span_from(start))

    # -- expressions ---------------------------------------------------------

    def parse_expr(self, level: int = 0) -> A.Expr:
        if level == len(_BINARY_LEVELS):
            return self.parse_unary()
        ops = _BINARY_LEVELS[level]
        left = self.parse_expr(level + 1)
        while self.peek() is not None and self.peek().kind in ops:
            op = ops[self.peek().kind]
            self.pos += 1
            right = self.parse_expr(level + 1)
            left = A.Binary(op, left, right)
        return left

    def parse_unary(self) -> A.Expr:
        if self.accept("not"):
            return A.Unary("!", self.parse_unary())
        if self.accept("minus"):
            operand = self.parse_unary()
            if isinstance(operand, A.IntLit):
                return A.IntLit(-operand.value)
            return A.Unary("-", operand)
        return self.parse_primary()

    def parse_args(self) -> tuple[A.Expr, ...]:
        self.expect("lparen")
        args = []
        if not self.at("rparen"):
            args.append(self.parse_expr())
            while self.accept("comma"):
                args.append(self.parse_expr())
        self.expect("rparen")
        return tuple(args)

    def parse_primary(self) -> A.Expr:
        tok = self.peek()
        if tok is None:
            raise self.fail({"expression"})
        if tok.kind == "int":
            self.pos += 1
            return A.IntLit(int(tok.text))
        if tok.kind in ("kw_true", "kw_false"):
            self.pos += 1
            return A.BoolLit(tok.kind == "kw_true")
        if tok.kind == "string":
            self.pos += 1
            return A.StrLit(unescape(tok.text[1:-1]))
        if tok.kind == "lparen":
            self.pos += 1
            e = self.parse_expr()
            self.expect("rparen")
            return e
        if tok.kind == "kw_new":
            self.pos += 1
            cls = self.expect("ident").text
            return A.NewExpr(cls, self.parse_args())
        if tok.kind == "ident":
            self.pos += 1
            if (tok.text == "Integer" and self.at("dot")) or (tok.text == "parseInt" and self.at("lparen")):
                if tok.text == "Integer":
                    self.expect("dot")
                    self.expect("ident", "parseInt")
                self.expect("lparen")
                inner = self.parse_expr()
                self.expect("rparen")
                return inner
            if self.at("dot") and self.at("ident", offset=1) and self.at("lparen", offset=2):
                self.pos += 1  # qualified static call: Cls.method(...)
                name = self.expect("ident").text
                return A.CallExpr(name, self.parse_args())
            if self.at("lparen"):
                return A.CallExpr(tok.text, self.parse_args())
            if self.accept("lbracket"):
                index = self.parse_expr()
                self.expect("rbracket")
                return A.ArgRead(tok.text, index)
            return A.Var(tok.text)
        raise self.fail({"expression"})


def parse(tokens: list[Token], path: str = "<input>", text: str = "", check: bool = True) -> A.SourceUnit:
    """Parse a token stream into a numbered :class:`SourceUnit`.

    With ``check`` (the default) the semantic checks run as well, so the
    returned unit satisfies every naming, typing and weaving rule.
    """
    unit = Parser(tokens).parse_unit(path, text)
    if check:
        from aoslice.lang.semantics import check_unit

        check_unit(unit)
    return unit


def parse_source(text: str, path: str = "<input>", check: bool = True) -> A.SourceUnit:
    return parse(tokenize(text), path, text, check)


def parse_file(path: str) -> A.SourceUnit:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_source(text, path)
