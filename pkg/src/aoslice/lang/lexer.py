"""Tokenizer for MiniAJ source text."""

from __future__ import annotations

import re
from dataclasses import dataclass

from aoslice.errors import LexError

KEYWORDS = frozenset({
    "class", "static", "public", "private", "protected", "final",
    "void", "int", "boolean", "Boolean", "String",
    "if", "else", "while", "for", "return", "new", "true", "false",
    "aspect", "pointcut", "before", "after", "returning", "call",
    "print",
})

# Longest operators first so that "<=" wins over "<".
_PUNCT = [
    ("&&", "and"), ("||", "or"), ("==", "eq"), ("!=", "ne"), ("<=", "le"), (">=", "ge"),
    ("++", "incr"), ("--", "decr"),
    ("(", "lparen"), (")", "rparen"), ("{", "lbrace"), ("}", "rbrace"),
    ("[", "lbracket"), ("]", "rbracket"), (";", "semi"), (",", "comma"), (".", "dot"),
    (":", "colon"), ("+", "plus"), ("-", "minus"), ("*", "star"), ("/", "slash"),
    ("%", "percent"), ("<", "lt"), (">", "gt"), ("!", "not"), ("=", "assign"),
]
PUNCT_TEXT = {kind: text for text, kind in _PUNCT}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<line_comment>//[^\n]*)
  | (?P<block_comment>/\*.*?\*/)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<int>[0-9]+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<punct>""" + "|".join(re.escape(t) for t, _ in _PUNCT) + r""")
    """,
    re.VERBOSE | re.DOTALL,
)
_PUNCT_KIND = dict(_PUNCT)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int
    end_line: int
    end_column: int

    def __repr__(self) -> str:
        if self.kind in ("ident", "int", "string"):
            return f"{self.kind}({self.text})"
        return self.kind


def tokenize(text: str) -> list[Token]:
    """Split *text* into tokens, dropping whitespace and comments.

    Keywords come out as ``kw_<word>``; punctuation uses symbolic names
    (``lparen``, ``le``, ...). There is no end-of-file token.
    """
    tokens: list[Token] = []
    pos = 0
    line, col = 1, 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or (m.lastgroup == "punct" and text.startswith("/*", pos)):
            if text.startswith("/*", pos):
                raise LexError("unterminated block comment", line, col)
            if text[pos] == '"':
                raise LexError("unterminated string literal", line, col)
            raise LexError(f"unexpected character {text[pos]!r}", line, col)
        group = m.lastgroup
        lexeme = m.group()
        start_line, start_col = line, col
        newlines = lexeme.count("\n")
        if newlines:
            line += newlines
            col = len(lexeme) - lexeme.rfind("\n")
        else:
            col += len(lexeme)
        pos = m.end()
        if group in ("ws", "line_comment", "block_comment"):
            continue
        if group == "ident":
            kind = f"kw_{lexeme}" if lexeme in KEYWORDS else "ident"
        elif group == "punct":
            kind = _PUNCT_KIND[lexeme]
        else:
            kind = group
        tokens.append(Token(kind, lexeme, start_line, start_col, line, col))
    return tokens
