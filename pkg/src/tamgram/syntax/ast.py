"""Lossless surface syntax tree.

Spans never take part in equality, so two trees parsed from differently
formatted sources compare equal when they are structurally the same.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..diagnostics import Span


def _span():
    return field(default=None, compare=False, repr=False)


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str
    sort: Optional[str] = None  # None | bits | fresh | public | temporal
    typed: bool = False  # written as ``x : sort``
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class StringLit:
    value: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class CellRef:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class PathRef:
    path: tuple
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class NamePrune:
    """``label is .``"""

    span: Optional[Span] = _span()


@dataclass(frozen=True)
class CellNamePrune:
    """``label is '.``"""

    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Arg:
    label: Optional[str]
    value: object  # Term | NamePrune | CellNamePrune
    cell_label: bool = False  # written as ``'label is ...``
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class App:
    path: tuple
    args: tuple  # of Arg
    persistent: bool = False
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Tuple:
    items: tuple
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Assign:
    cell: str
    value: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class AssignPrune:
    """``'c := .``"""

    cell: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Undef:
    cell: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class NamedPattern:
    term: object
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class CellPattern:
    cell: str
    term: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Quantified:
    kind: str
    vars: tuple  # of Var
    body: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class At:
    fact: object
    time: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Not:
    body: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Param:
    name: str
    named: bool = False
    rw: bool = False
    cell: bool = False
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LetBinding:
    """``let x = e`` or ``let f(params) [: type] = e`` (no ``in``)."""

    name: str
    value: object
    params: Optional[tuple] = None  # None: plain binding; tuple of Param: macro
    rtype: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class LetIn:
    binding: LetBinding
    body: object
    span: Optional[Span] = _span()


Term = Union[Var, StringLit, CellRef, PathRef, App, Tuple, Assign, AssignPrune,
             Undef, NamedPattern, CellPattern, Quantified, At, BinOp, Not, LetIn]


# -- rules and processes -----------------------------------------------------

@dataclass(frozen=True)
class RuleExpr:
    premise: tuple
    actions: Optional[tuple]  # None for an unlabeled rule
    conclusion: tuple
    ar_lets: tuple = ()  # bindings scoping over actions and conclusion
    r_lets: tuple = ()  # bindings scoping over the conclusion only
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Cond:
    cell: str
    pattern: object
    negated: bool = False
    parens: bool = False
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Null:
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Step:
    rule: RuleExpr
    rest: object
    annotation: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Choice:
    branches: tuple
    rest: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Scoped:
    body: object
    rest: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class While:
    cond: Cond
    body: object
    rest: object
    label: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Loop:
    body: object
    rest: object
    label: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class IfThenElse:
    cond: Cond
    then: object
    orelse: object
    rest: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Break:
    label: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Continue:
    label: Optional[str] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class MacroCall:
    path: tuple
    args: tuple
    rest: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ProcLet:
    binding: LetBinding
    rest: object
    span: Optional[Span] = _span()


ProcessExpr = Union[Null, Step, Choice, Scoped, While, Loop, IfThenElse, Break,
                    Continue, MacroCall, ProcLet]


# -- declarations ------------------------------------------------------------

@dataclass(frozen=True)
class LetDecl:
    binding: LetBinding
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SymbolDecl:
    """``fun|pred|apred name/N`` or ``... name(params)`` without a body."""

    kind: str
    name: str
    arity: int
    params: Optional[tuple] = None
    persistent: bool = False
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class SymbolMacro:
    """``fun|pred|apred name(params) = body``."""

    kind: str
    name: str
    params: tuple
    body: object
    persistent: bool = False
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ProcessDecl:
    name: str
    body: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ProcessMacro:
    name: str
    params: tuple
    body: object
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Module:
    name: str
    decls: tuple
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class ModuleAlias:
    name: str
    path: tuple
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Import:
    name: str
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Open:
    path: tuple
    decls: Optional[tuple] = None  # ``open M { ... }`` limits the scope
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Include:
    path: tuple
    decls: Optional[tuple] = None
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Formula:
    """``lemma``/``restriction`` with a structured body."""

    kind: str  # lemma | restriction
    name: str
    body: object
    attrs: Optional[str] = None
    trace_kind: Optional[str] = None  # exists-trace | all-traces
    span: Optional[Span] = _span()


@dataclass(frozen=True)
class Verbatim:
    """``lemma``/``restriction`` whose body is a quoted Tamarin formula."""

    kind: str
    name: str
    text: str
    attrs: Optional[str] = None
    trace_kind: Optional[str] = None
    span: Optional[Span] = _span()


Decl = Union[LetDecl, SymbolDecl, SymbolMacro, ProcessDecl, ProcessMacro, Module,
             ModuleAlias, Import, Open, Include, Formula, Verbatim]


@dataclass(frozen=True)
class SourceModule:
    name: str
    decls: tuple
    path: str = "<input>"
    span: Optional[Span] = _span()
