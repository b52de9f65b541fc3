"""Lexing, parsing and printing of ``.tg`` sources."""
from __future__ import annotations

from .lexer import Kind, Token, tokenize
from .parser import module_name_for, parse_module, parse_source
from .printer import pretty

__all__ = ["Kind", "Token", "tokenize", "parse_module", "parse_source",
           "module_name_for", "pretty"]
