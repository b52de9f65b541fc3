"""Source spans and the exception hierarchy.

Every user-facing failure is a :class:`TamgramError` carrying one or more
:class:`Diagnostic` records, rendered as ``path:line:col: severity: message``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    line: int = 1
    col: int = 1
    path: str = "<input>"

    def cover(self, other: Optional["Span"]) -> "Span":
        if other is None:
            return self
        return Span(self.start, max(self.end, other.end), self.line, self.col, self.path)


@dataclass(frozen=True)
class Diagnostic:
    message: str
    span: Optional[Span] = None
    severity: str = "error"

    def render(self) -> str:
        if self.span is None:
            return f"<unknown>:0:0: {self.severity}: {self.message}"
        s = self.span
        return f"{s.path}:{s.line}:{s.col}: {self.severity}: {self.message}"


class TamgramError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 1

    def __init__(self, message: str, span: Optional[Span] = None,
                 diagnostics: Optional[Iterable[Diagnostic]] = None):
        super().__init__(message)
        self.message = message
        self.span = span
        diags = list(diagnostics) if diagnostics else []
        if not diags:
            diags = [Diagnostic(message, span)]
        self.diagnostics = diags

    def render(self) -> str:
        return "\n".join(d.render() for d in self.diagnostics)


class LexError(TamgramError):
    pass


class ParseError(TamgramError):
    pass


class ResolveError(TamgramError):
    pass


class ExpandError(TamgramError):
    pass


class TypeCheckError(TamgramError):
    pass


class CfgError(TamgramError):
    pass


class CellflowError(TamgramError):
    pass


class ValidityError(CellflowError):
    """Some CFG trace reads a cell that is not defined."""

    def __init__(self, message, span=None, witness=None, missing=None, position=None):
        super().__init__(message, span)
        self.witness = witness
        self.missing = missing
        self.position = position


class BudgetExceeded(TamgramError):
    exit_code = 2


class TranslationError(TamgramError):
    exit_code = 2
