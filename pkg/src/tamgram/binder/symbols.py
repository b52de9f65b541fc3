"""Entities produced by module resolution and the flat system handed to the CFG."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..diagnostics import ResolveError, Span
from ..syntax import ast as A

# Kinds of things a name can denote.
SYMBOL_KINDS = ("fun", "pred", "apred")


@dataclass(eq=False)
class Entity:
    kind: str  # fun pred apred fun-macro pred-macro apred-macro term-macro let process process-macro module
    name: str
    qname: str
    span: Optional[Span] = None
    # symbols
    arity: int = 0
    persistent: bool = False
    params: Optional[tuple] = None  # surface Params when declared with parameters
    builtin: bool = False
    # macros, lets and processes
    body: object = None
    rtype: Optional[str] = None
    scope: Optional["Scope"] = None  # definition environment
    closure: object = None  # lowering context captured by local macros
    # modules
    module: Optional["ModuleInfo"] = None

    def __repr__(self) -> str:
        return f"<{self.kind} {self.qname}>"


@dataclass(eq=False)
class ModuleInfo:
    name: str
    qname: str
    scope: "Scope"
    includes: list = field(default_factory=list)
    path: str = "<input>"
    root_unit: bool = False  # part of the compilation unit being compiled

    def member(self, name: str, span: Optional[Span] = None, _seen=None) -> Optional[Entity]:
        if name in self.scope.locals:
            return self.scope.locals[name]
        found = {}
        seen = _seen or set()
        seen.add(id(self))
        for inc in self.includes:
            if id(inc) in seen:
                continue
            e = inc.member(name, span, seen)
            if e is not None:
                found[id(e)] = e
        if len(found) > 1:
            cands = sorted(e.qname for e in found.values())
            raise ResolveError(f"ambiguous name '{name}' in module {self.qname}: "
                               + " and ".join(cands), span)
        return next(iter(found.values()), None)


@dataclass(eq=False)
class Scope:
    parent: Optional["Scope"] = None
    module: Optional[ModuleInfo] = None
    locals: dict = field(default_factory=dict)
    opens: list = field(default_factory=list)

    def define(self, ent: Entity) -> None:
        old = self.locals.get(ent.name)
        if old is not None and not old.builtin:
            raise ResolveError(f"duplicate definition of '{ent.name}'", ent.span)
        self.locals[ent.name] = ent

    def lookup(self, name: str, span: Optional[Span] = None) -> Optional[Entity]:
        """Innermost scope wins; within one scope a local definition beats opens,
        and two different candidates from opens are ambiguous."""
        s = self
        while s is not None:
            if name in s.locals:
                return s.locals[name]
            found = {}
            for m in s.opens:
                e = m.member(name, span)
                if e is not None:
                    found[id(e)] = e
            if len(found) > 1:
                cands = sorted(e.qname for e in found.values())
                raise ResolveError(f"ambiguous name '{name}': candidates "
                                   + " and ".join(cands), span)
            if found:
                return next(iter(found.values()))
            s = s.parent
        return None

    def resolve_path(self, path: tuple, span: Optional[Span] = None) -> Entity:
        ent = self.lookup(path[0], span)
        if ent is None:
            raise ResolveError(f"unknown name '{path[0]}'", span)
        for i, part in enumerate(path[1:], start=1):
            if ent.kind != "module":
                raise ResolveError(f"'{'.'.join(path[:i])}' is not a module", span)
            nxt = ent.module.member(part, span)
            if nxt is None:
                raise ResolveError(f"module {ent.module.qname} has no member '{part}'", span)
            ent = nxt
        return ent


@dataclass(frozen=True)
class SymbolInfo:
    kind: str  # fun | pred | apred
    name: str  # emitted name
    qname: str
    arity: int
    persistent: bool = False
    labels: Optional[tuple] = None  # parameter labels when declared with named params
    builtin: bool = False
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class ProcessDef:
    name: str
    qname: str
    body: object  # tamgram.terms.Process
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class Passthrough:
    kind: str  # lemma | restriction
    name: str
    formula: object = None  # core formula, or None for verbatim text
    text: Optional[str] = None
    attrs: Optional[str] = None
    trace_kind: Optional[str] = None
    span: Optional[Span] = field(default=None, compare=False)


@dataclass(frozen=True)
class FlatSystem:
    name: str
    processes: tuple = ()
    symbols: dict = field(default_factory=dict)  # emitted name -> SymbolInfo
    passthrough: tuple = ()
    warnings: tuple = ()

    def process(self, name: str) -> ProcessDef:
        for p in self.processes:
            if p.name == name or p.qname == name:
                return p
        raise KeyError(name)


@dataclass
class Resolved:
    """Result of module resolution: the root module plus every loaded module."""

    root: ModuleInfo
    modules: list  # ModuleInfo in load order
    table: dict  # qualified name -> Entity
    decls: list  # (Entity, surface decl) for processes, in source order
    formulas: list  # (ModuleInfo scope, surface Formula/Verbatim)


BUILTINS = (
    ("pred", "In", 1),
    ("pred", "Out", 1),
    ("pred", "Fr", 1),
    ("apred", "K", 1),
)


def prelude() -> Scope:
    s = Scope()
    for kind, name, arity in BUILTINS:
        s.locals[name] = Entity(kind, name, name, arity=arity, builtin=True)
    return s


def surface_params(ent: Entity) -> tuple:
    return tuple(ent.params or ())


def is_named(params) -> bool:
    return bool(params) and all(p.named for p in params)


__all__ = ["Entity", "ModuleInfo", "Scope", "SymbolInfo", "ProcessDef", "Passthrough",
           "FlatSystem", "Resolved", "prelude", "BUILTINS", "A"]
