"""Architecture description language: lexer, parser, and formatter."""

from .tokens import SourceUnit, Token, tokenize
from .parser import parse_protocol, parse_unit
from .printer import format, format_protocol
from . import syntax

__all__ = [
    "SourceUnit",
    "Token",
    "tokenize",
    "parse_unit",
    "parse_protocol",
    "format",
    "format_protocol",
    "syntax",
]
