"""MiniAJ front end: lexer, parser, semantic checks, pretty-printer."""

from aoslice.lang.ast import SourceUnit, number_of, numbered_nodes
from aoslice.lang.lexer import Token, tokenize
from aoslice.lang.parser import parse, parse_file, parse_source
from aoslice.lang.printer import format_unit

__all__ = [
    "SourceUnit", "Token", "format_unit", "number_of", "numbered_nodes",
    "parse", "parse_file", "parse_source", "tokenize",
]
