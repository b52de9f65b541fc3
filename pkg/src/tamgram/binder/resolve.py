"""Module system: imports, opens, includes, submodules and aliases."""
from __future__ import annotations

from pathlib import Path
from typing import Callable, Optional

from ..diagnostics import ResolveError, Span
from ..syntax import ast as A
from ..syntax.parser import parse_source
from .symbols import Entity, ModuleInfo, Resolved, Scope, prelude

Loader = Callable[[str], Optional[A.SourceModule]]


class FileLoader:
    """Map module ``Foo_bar`` to ``foo_bar.tg`` on a search path (first hit wins)."""

    def __init__(self, paths=()):
        self.paths = [Path(p) for p in paths]

    def __call__(self, name: str) -> Optional[A.SourceModule]:
        fname = name.lower() + ".tg"
        for d in self.paths:
            f = d / fname
            if f.is_file():
                return parse_source(f.read_text(encoding="utf-8"), str(f), name)
        return None


def dict_loader(sources: dict) -> Loader:
    """Loader over in-memory ``{module name: source text}``; handy in tests."""

    def load(name: str):
        src = sources.get(name)
        if src is None:
            return None
        return parse_source(src, name.lower() + ".tg", name)

    return load


class _Resolver:
    def __init__(self, loader: Optional[Loader]):
        self.loader = loader or (lambda name: None)
        self.prelude = prelude()
        self.loaded: dict = {}
        self.stack: list = []
        self.modules: list = []
        self.table: dict = {}
        self.procs: list = []
        self.formulas: list = []

    def load(self, name: str, span: Optional[Span]) -> ModuleInfo:
        if name in self.loaded:
            return self.loaded[name]
        if name in self.stack:
            cycle = " -> ".join(self.stack[self.stack.index(name):] + [name])
            raise ResolveError(f"cyclic import: {cycle}", span)
        src = self.loader(name)
        if src is None:
            raise ResolveError(f"unknown module '{name}'", span)
        self.stack.append(name)
        info = self.new_module(name, name, self.prelude, src.path, root_unit=False)
        self.declare(src.decls, info.scope, info)
        self.stack.pop()
        self.loaded[name] = info
        return info

    def new_module(self, name, qname, parent, path, root_unit) -> ModuleInfo:
        scope = Scope(parent=parent)
        info = ModuleInfo(name, qname, scope, path=path, root_unit=root_unit)
        scope.module = info
        self.modules.append(info)
        return info

    def add(self, scope: Scope, ent: Entity) -> None:
        scope.define(ent)
        if ent.kind != "module" or ent.module.qname == ent.qname:
            self.table.setdefault(ent.qname, ent)

    def module_of(self, scope: Scope, path: tuple, span) -> ModuleInfo:
        if scope.lookup(path[0], span) is None:
            raise ResolveError(f"unknown module '{'.'.join(path)}' (is it imported?)", span)
        ent = scope.resolve_path(path, span)
        if ent.kind != "module":
            raise ResolveError(f"'{'.'.join(path)}' is not a module", span)
        return ent.module

    def declare(self, decls, scope: Scope, info: ModuleInfo) -> None:
        for d in decls:
            self.declare_one(d, scope, info)

    def declare_one(self, d, scope: Scope, info: ModuleInfo) -> None:
        q = f"{info.qname}.{{}}".format
        if isinstance(d, A.LetDecl):
            b = d.binding
            kind = "let" if b.params is None else "term-macro"
            self.add(scope, Entity(kind, b.name, q(b.name), d.span, params=b.params,
                                   body=b.value, rtype=b.rtype, scope=scope,
                                   arity=len(b.params or ())))
        elif isinstance(d, A.SymbolDecl):
            self.add(scope, Entity(d.kind, d.name, q(d.name), d.span, arity=d.arity,
                                   persistent=d.persistent, params=d.params))
        elif isinstance(d, A.SymbolMacro):
            self.add(scope, Entity(d.kind + "-macro", d.name, q(d.name), d.span,
                                   arity=len(d.params), persistent=d.persistent,
                                   params=d.params, body=d.body, scope=scope))
        elif isinstance(d, A.ProcessDecl):
            ent = Entity("process", d.name, q(d.name), d.span, body=d.body, scope=scope)
            self.add(scope, ent)
            if info.root_unit:
                self.procs.append(ent)
        elif isinstance(d, A.ProcessMacro):
            self.add(scope, Entity("process-macro", d.name, q(d.name), d.span,
                                   arity=len(d.params), params=d.params, body=d.body,
                                   scope=scope))
        elif isinstance(d, A.Module):
            sub = self.new_module(d.name, q(d.name), scope, info.path, info.root_unit)
            self.add(scope, Entity("module", d.name, sub.qname, d.span, module=sub))
            self.declare(d.decls, sub.scope, sub)
        elif isinstance(d, A.ModuleAlias):
            target = self.module_of(scope, d.path, d.span)
            self.add(scope, Entity("module", d.name, q(d.name), d.span, module=target))
        elif isinstance(d, A.Import):
            mod = self.load(d.name, d.span)
            old = scope.locals.get(d.name)
            if old is not None and old.kind == "module" and old.module is mod:
                return
            self.add(scope, Entity("module", d.name, mod.qname, d.span, module=mod))
        elif isinstance(d, (A.Open, A.Include)):
            mod = self.module_of(scope, d.path, d.span)
            if isinstance(d, A.Include):
                info.includes.append(mod)
            if d.decls is None:
                scope.opens.append(mod)
                return
            inner = Scope(parent=scope, module=info, opens=[mod])
            self.declare(d.decls, inner, info)
            for ent in inner.locals.values():
                scope.define(ent)
        elif isinstance(d, (A.Formula, A.Verbatim)):
            self.formulas.append((scope, d))
        else:  # pragma: no cover - parser produces nothing else
            raise ResolveError(f"unsupported declaration {type(d).__name__}", None)


def resolve_modules(root: A.SourceModule, loader: Optional[Loader] = None) -> Resolved:
    r = _Resolver(loader)
    r.stack.append(root.name)
    info = r.new_module(root.name, root.name, r.prelude, root.path, root_unit=True)
    r.declare(root.decls, info.scope, info)
    r.stack.pop()
    return Resolved(info, r.modules, r.table, r.procs, r.formulas)
