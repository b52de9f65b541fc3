"""Core term, rule and process representation shared by every compiler stage.

The surface syntax tree (``tamgram.syntax.ast``) is lossless and carries macro
calls, named arguments and module paths.  The binder lowers it into the
values defined here: plain positional applications over resolved symbol
names, cells, statements and patterns.  The same classes double as ground
runtime values for the interpreters (``Fresh`` only ever appears there).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Union

from .diagnostics import Span

SORTS = ("bits", "fresh", "public", "temporal")


@dataclass(frozen=True)
class Var:
    name: str
    sort: str = "bits"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Str:
    value: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Fresh:
    """A ground fresh name; produced by the FRESH rule, never parsed."""

    name: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cell:
    name: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Tuple:
    items: tuple
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    name: str
    args: tuple = ()
    persistent: bool = False
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    cell: str
    value: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Undef:
    cell: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Cas:
    cell: str
    pattern: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class As:
    term: "Term"
    name: str
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Quant:
    kind: str  # "All" | "Ex"
    vars: tuple  # of Var
    body: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class At:
    fact: "Term"
    time: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class BinF:
    op: str  # "&" | "|" | "==>" | "=" | "<"
    left: "Term"
    right: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    body: "Term"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


Term = Union[Var, Str, Fresh, Cell, Tuple, App, Assign, Undef, Cas, As, Quant, At, BinF, Not]


@dataclass(frozen=True)
class Rule:
    premise: tuple
    actions: tuple
    conclusion: tuple
    annotation: Optional[str] = None
    span: Optional[Span] = field(default=None, compare=False, repr=False)


SKIP = Rule((), (), ())


# -- processes ---------------------------------------------------------------

@dataclass(frozen=True)
class Cond:
    cell: str
    pattern: Term
    negated: bool = False
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Null:
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Step:
    rule: Rule
    rest: "Process"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Choice:
    branches: tuple
    rest: "Process"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Scoped:
    body: "Process"
    rest: "Process"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class While:
    cond: Cond
    body: "Process"
    rest: "Process"
    label: Optional[str] = None
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Loop:
    body: "Process"
    rest: "Process"
    label: Optional[str] = None
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Cond
    then: "Process"
    orelse: "Process"
    rest: "Process"
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Break:
    label: Optional[str] = None
    span: Optional[Span] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Continue:
    label: Optional[str] = None
    span: Optional[Span] = field(default=None, compare=False, repr=False)


Process = Union[Null, Step, Choice, Scoped, While, Loop, If, Break, Continue]


# -- traversal ---------------------------------------------------------------

def children(t: Term) -> tuple:
    if isinstance(t, Tuple):
        return t.items
    if isinstance(t, App):
        return t.args
    if isinstance(t, Assign):
        return (Cell(t.cell), t.value)
    if isinstance(t, (Undef,)):
        return (Cell(t.cell),)
    if isinstance(t, Cas):
        return (Cell(t.cell), t.pattern)
    if isinstance(t, As):
        return (t.term,)
    if isinstance(t, Quant):
        return (t.body,)
    if isinstance(t, At):
        return (t.fact, t.time)
    if isinstance(t, BinF):
        return (t.left, t.right)
    if isinstance(t, Not):
        return (t.body,)
    return ()


def walk(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def cells_of(t: Term) -> set:
    return {n.name for n in walk(t) if isinstance(n, Cell)}


def vars_of(t: Term) -> set:
    """Variables occurring free in ``t``; ``as`` names count as occurrences."""
    out: set = set()
    _free_vars(t, frozenset(), out)
    return out


def _free_vars(t: Term, bound: frozenset, out: set) -> None:
    if isinstance(t, Var):
        if t.name not in bound:
            out.add(t)
    elif isinstance(t, As):
        _free_vars(t.term, bound, out)
        if t.name not in bound:
            out.add(Var(t.name))
    elif isinstance(t, Quant):
        _free_vars(t.body, bound | {v.name for v in t.vars}, out)
    else:
        for c in children(t):
            _free_vars(c, bound, out)


def is_ground(t: Term) -> bool:
    return not any(isinstance(n, (Var, Cell, As)) for n in walk(t))


def map_term(t: Term, fn) -> Term:
    """Rebuild ``t`` bottom-up, calling ``fn`` on every node after its children."""
    if isinstance(t, Tuple):
        t = Tuple(tuple(map_term(i, fn) for i in t.items), t.span)
    elif isinstance(t, App):
        t = App(t.name, tuple(map_term(a, fn) for a in t.args), t.persistent, t.span)
    elif isinstance(t, Assign):
        t = Assign(t.cell, map_term(t.value, fn), t.span)
    elif isinstance(t, Cas):
        t = Cas(t.cell, map_term(t.pattern, fn), t.span)
    elif isinstance(t, As):
        t = As(map_term(t.term, fn), t.name, t.span)
    elif isinstance(t, Quant):
        t = Quant(t.kind, t.vars, map_term(t.body, fn), t.span)
    elif isinstance(t, At):
        t = At(map_term(t.fact, fn), map_term(t.time, fn), t.span)
    elif isinstance(t, BinF):
        t = BinF(t.op, map_term(t.left, fn), map_term(t.right, fn), t.span)
    elif isinstance(t, Not):
        t = Not(map_term(t.body, fn), t.span)
    return fn(t)


def subst(t: Term, sigma: Mapping[str, Term]) -> Term:
    """Replace variables (by name) according to ``sigma``."""
    if not sigma:
        return t

    def fn(n):
        if isinstance(n, Var) and n.name in sigma:
            return sigma[n.name]
        if isinstance(n, As) and n.name in sigma:
            # a bound as-name no longer names anything; keep the matched term
            return n.term
        return n

    return map_term(t, fn)


def subst_cells(t: Term, mapping: Mapping[str, Term]) -> Term:
    """Replace cell reads by terms.  Statement targets are left alone."""

    def fn(n):
        if isinstance(n, Cell) and n.name in mapping:
            return mapping[n.name]
        return n

    return map_term(t, fn)


def map_rule(rule: Rule, fn) -> Rule:
    return Rule(
        tuple(fn(t) for t in rule.premise),
        tuple(fn(t) for t in rule.actions),
        tuple(fn(t) for t in rule.conclusion),
        rule.annotation,
        rule.span,
    )


def rule_terms(rule: Rule) -> Iterator[Term]:
    yield from rule.premise
    yield from rule.actions
    yield from rule.conclusion


def nostmt(items) -> tuple:
    return tuple(t for t in items if not isinstance(t, (Assign, Undef)))


# -- printing ----------------------------------------------------------------

def show(t: Term) -> str:
    """Tamgram-flavoured rendering, used in diagnostics and DOT labels."""
    if isinstance(t, Var):
        prefix = {"fresh": "~", "public": "$", "temporal": "#"}.get(t.sort, "")
        return prefix + t.name
    if isinstance(t, Str):
        return '"' + t.value.replace('"', '\\"') + '"'
    if isinstance(t, Fresh):
        return "~" + t.name
    if isinstance(t, Cell):
        return "'" + t.name
    if isinstance(t, Tuple):
        return "<" + ", ".join(show(i) for i in t.items) + ">"
    if isinstance(t, App):
        bang = "!" if t.persistent else ""
        return f"{bang}{t.name}(" + ", ".join(show(a) for a in t.args) + ")"
    if isinstance(t, Assign):
        return f"'{t.cell} := {show(t.value)}"
    if isinstance(t, Undef):
        return f"undef('{t.cell})"
    if isinstance(t, Cas):
        return f"'{t.cell} cas {show(t.pattern)}"
    if isinstance(t, As):
        return f"{show(t.term)} as {t.name}"
    if isinstance(t, Quant):
        return f"{t.kind} " + " ".join(show(v) for v in t.vars) + f". {show(t.body)}"
    if isinstance(t, At):
        return f"{show(t.fact)} @ {show(t.time)}"
    if isinstance(t, BinF):
        return f"({show(t.left)} {t.op} {show(t.right)})"
    if isinstance(t, Not):
        return f"not({show(t.body)})"
    raise TypeError(f"not a term: {t!r}")


def show_rule(rule: Rule) -> str:
    l = ", ".join(show(t) for t in rule.premise)
    r = ", ".join(show(t) for t in rule.conclusion)
    if rule.actions:
        a = ", ".join(show(t) for t in rule.actions)
        return f"[{l}] --[{a}]-> [{r}]"
    return f"[{l}] -> [{r}]"
