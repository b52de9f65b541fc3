"""Macro expansion and lowering of surface trees into core terms.

Names are resolved lexically.  Macro bodies are expanded in their definition
environment, and variables a body introduces on its own are renamed when
they would collide with a variable already used by the rule being built, so
a macro never captures a caller's variable.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

from .. import terms as T
from ..diagnostics import ExpandError, Span
from ..syntax import ast as A
from .symbols import Entity, FlatSystem, Passthrough, ProcessDef, Resolved, Scope, SymbolInfo

_IMPLIED_RTYPE = {"fun-macro": "bits", "pred-macro": "fact", "apred-macro": "afact"}


@dataclass(eq=False)
class Frame:
    """Variable naming for one lexical region.

    ``open`` frames keep user spellings; hygienic frames pick a fresh
    spelling for every variable they introduce."""

    open: bool
    parent: Optional["Frame"] = None
    names: dict = field(default_factory=dict)  # surface name -> (emitted name, sort|None)

    def find(self, name: str):
        f = self
        while f is not None:
            if name in f.names:
                return f.names[name]
            f = f.parent
        return None


class Used:
    """Variable spellings taken inside the rule under construction."""

    def __init__(self, seed=()):
        self.names = set(seed)
        self.counter = 0

    def fresh(self, base: str) -> str:
        if base not in self.names:
            self.names.add(base)
            return base
        while True:
            self.counter += 1
            cand = f"{base}_h{self.counter}"
            if cand not in self.names:
                self.names.add(cand)
                return cand


@dataclass
class Ctx:
    scope: Scope
    frame: Frame
    used: Used
    subst: dict = field(default_factory=dict)  # surface var name -> core term
    cells: dict = field(default_factory=dict)  # cell param -> (core term, rw)
    stack: tuple = ()  # macros being expanded

    def with_(self, **kw) -> "Ctx":
        return replace(self, **kw)


class Expander:
    def __init__(self, resolved: Resolved):
        self.res = resolved
        self.emitted: dict = {}  # id(Entity) -> emitted symbol name
        self.symbols: dict = {}  # emitted name -> SymbolInfo
        self._assign_symbol_names()

    # -- symbol naming -------------------------------------------------------

    def _assign_symbol_names(self) -> None:
        from .symbols import BUILTINS

        builtin_names = {n for _, n, _ in BUILTINS}
        prelude = self.res.root.scope.parent
        for _, name, _ in BUILTINS:
            ent = prelude.locals[name]
            self.emitted[id(ent)] = name
            self.symbols[name] = SymbolInfo(ent.kind, name, name, ent.arity, builtin=True)
        ents = [e for e in self.res.table.values() if e.kind in ("fun", "pred", "apred")]
        counts: dict = {}
        for e in ents:
            counts[e.name] = counts.get(e.name, 0) + 1
        for e in ents:
            name = e.name
            if counts[name] > 1 or name in builtin_names:
                name = e.qname.replace(".", "_")
            self.emitted[id(e)] = name
            labels = tuple(p.name for p in e.params) if e.params and e.params[0].named else None
            self.symbols[name] = SymbolInfo(e.kind, name, e.qname, e.arity, e.persistent,
                                            labels, False, e.span)

    # -- contexts ------------------------------------------------------------

    def rule_ctx(self, ctx: Ctx, seed_from=None) -> Ctx:
        seed = set()
        for v in ctx.subst.values():
            seed |= {x.name for x in T.vars_of(v)}
        for v, _ in ctx.cells.values():
            seed |= {x.name for x in T.vars_of(v)}
        if ctx.frame.open and seed_from is not None:
            seed |= _surface_names(seed_from)
        return ctx.with_(frame=Frame(ctx.frame.open, ctx.frame), used=Used(seed))

    # -- variables and cells -------------------------------------------------

    def var(self, name: str, sort: Optional[str], span, ctx: Ctx) -> T.Term:
        found = ctx.frame.find(name)
        if found is not None:
            emitted, bsort = found
            return T.Var(emitted, sort or bsort or "bits", span)
        ent = ctx.scope.lookup(name, span) if sort is None else None
        if ent is not None and ent.kind == "let":
            return self.apply_macro(ent, (), span, ctx)
        emitted = name if ctx.frame.open else ctx.used.fresh(name)
        if ctx.frame.open:
            ctx.used.names.add(name)
        ctx.frame.names[name] = (emitted, None)
        return T.Var(emitted, sort or "bits", span)

    def cell_read(self, name: str, span, ctx: Ctx) -> T.Term:
        if name in ctx.cells:
            return ctx.cells[name][0]
        return T.Cell(name, span)

    def cell_target(self, name: str, span, ctx: Ctx, what: str) -> str:
        if name in ctx.cells:
            term, rw = ctx.cells[name]
            if not rw:
                raise ExpandError(f"{what} of cell parameter '{name}' which is not marked rw", span)
            return term.name
        return name

    def cell_name(self, name: str, span, ctx: Ctx) -> str:
        t = self.cell_read(name, span, ctx)
        if not isinstance(t, T.Cell):
            raise ExpandError(f"cell parameter '{name}' is bound to a term, not a cell; "
                              "it cannot be pattern matched with cas", span)
        return t.name

    # -- terms ---------------------------------------------------------------

    def term(self, t, ctx: Ctx) -> T.Term:
        sp = getattr(t, "span", None)
        if isinstance(t, A.Var):
            if t.sort is None and not t.typed and t.name in ctx.subst:
                return ctx.subst[t.name]
            return self.var(t.name, t.sort, sp, ctx)
        if isinstance(t, A.StringLit):
            return T.Str(t.value, sp)
        if isinstance(t, A.CellRef):
            return self.cell_read(t.name, sp, ctx)
        if isinstance(t, A.PathRef):
            ent = ctx.scope.resolve_path(t.path, sp)
            if ent.kind == "let":
                return self.apply_macro(ent, (), sp, ctx)
            raise ExpandError(f"'{'.'.join(t.path)}' is a {ent.kind}, not a value"
                              + (" (apply it with parentheses)" if ent.kind != "module" else ""), sp)
        if isinstance(t, A.App):
            return self.app(t, ctx)
        if isinstance(t, A.Tuple):
            return T.Tuple(tuple(self.term(i, ctx) for i in t.items), sp)
        if isinstance(t, A.Assign):
            target = self.cell_target(t.cell, sp, ctx, "assignment")
            return T.Assign(target, self.term(t.value, ctx), sp)
        if isinstance(t, A.AssignPrune):
            target = self.cell_target(t.cell, sp, ctx, "assignment")
            return T.Assign(target, self.term(A.Var(t.cell, span=sp), ctx), sp)
        if isinstance(t, A.Undef):
            return T.Undef(self.cell_target(t.cell, sp, ctx, "undef"), sp)
        if isinstance(t, A.NamedPattern):
            inner = self.term(t.term, ctx)
            v = self.var(t.name, None, sp, ctx)
            if not isinstance(v, T.Var):
                raise ExpandError(f"'as {t.name}' names a let binding", sp)
            return T.As(inner, v.name, sp)
        if isinstance(t, A.CellPattern):
            return T.Cas(self.cell_name(t.cell, sp, ctx), self.term(t.term, ctx), sp)
        if isinstance(t, A.Quantified):
            return self.quantified(t, ctx)
        if isinstance(t, A.At):
            return T.At(self.term(t.fact, ctx), self.term(t.time, ctx), sp)
        if isinstance(t, A.BinOp):
            return T.BinF(t.op, self.term(t.left, ctx), self.term(t.right, ctx), sp)
        if isinstance(t, A.Not):
            return T.Not(self.term(t.body, ctx), sp)
        if isinstance(t, A.LetIn):
            return self.term(t.body, self.bind_let(t.binding, ctx))
        raise ExpandError(f"unexpected {type(t).__name__} in term position", sp)

    def quantified(self, t: A.Quantified, ctx: Ctx) -> T.Term:
        frame = Frame(ctx.frame.open, ctx.frame)
        avoid = set()
        for v in ctx.subst.values():
            avoid |= {x.name for x in T.vars_of(v)}
        bound = []
        for v in t.vars:
            sort = v.sort or "bits"
            if ctx.frame.open and v.name not in avoid:
                emitted = v.name
                ctx.used.names.add(v.name)
            else:
                ctx.used.names |= avoid
                emitted = ctx.used.fresh(v.name)
            frame.names[v.name] = (emitted, sort)
            bound.append(T.Var(emitted, sort, v.span))
        subst = {k: val for k, val in ctx.subst.items() if k not in frame.names}
        body = self.term(t.body, ctx.with_(frame=frame, subst=subst))
        return T.Quant(t.kind, tuple(bound), body, t.span)

    def bind_let(self, b: A.LetBinding, ctx: Ctx) -> Ctx:
        if b.params is None:
            value = self.term(b.value, ctx)
            return ctx.with_(subst={**ctx.subst, b.name: value})
        scope = Scope(parent=ctx.scope, module=ctx.scope.module)
        subst = {k: v for k, v in ctx.subst.items() if k != b.name}
        ent = Entity("term-macro", b.name, b.name, b.span, arity=len(b.params),
                     params=b.params, body=b.value, rtype=b.rtype, scope=scope)
        scope.locals[b.name] = ent
        inner = ctx.with_(scope=scope, subst=subst)
        ent.closure = inner
        return inner

    def app(self, t: A.App, ctx: Ctx) -> T.Term:
        sp = t.span
        ent = ctx.scope.resolve_path(t.path, sp)
        label = ".".join(t.path)
        if ent.kind in ("fun", "pred", "apred"):
            args = self.symbol_args(ent, t.args, ctx, sp)
            return T.App(self.emitted[id(ent)], args, t.persistent, sp)
        if ent.kind in ("fun-macro", "pred-macro", "apred-macro", "term-macro", "let"):
            if t.persistent and not ent.persistent:
                raise ExpandError(f"'{label}' is not a persistent predicate", sp)
            return self.apply_macro(ent, t.args, sp, ctx)
        raise ExpandError(f"'{label}' is a {ent.kind} and cannot be applied in a term", sp)

    def symbol_args(self, ent: Entity, args, ctx: Ctx, sp) -> tuple:
        params = ent.params
        if params and params[0].named:
            bound = self.match_named(ent, params, args, ctx, sp, cells_ok=False)
            return tuple(bound[p.name][0] for p in params)
        for a in args:
            if a.label is not None:
                raise ExpandError(f"'{ent.name}' takes positional arguments; "
                                  f"unexpected label '{a.label}'", a.span)
        # arity is checked by the type checker so that it reports a typed diagnostic
        return tuple(self.term(a.value, ctx) for a in args)

    def match_named(self, ent: Entity, params, args, ctx: Ctx, sp, cells_ok: bool) -> dict:
        byname = {p.name: p for p in params}
        out: dict = {}
        for a in args:
            if a.label is None:
                raise ExpandError(f"'{ent.name}' requires named arguments (label is value)",
                                  a.span)
            p = byname.get(a.label)
            if p is None:
                raise ExpandError(f"'{ent.name}' has no parameter labelled '{a.label}'", a.span)
            if a.label in out:
                raise ExpandError(f"argument '{a.label}' given twice", a.span)
            out[a.label] = (self.arg_value(a, p, ctx), a)
        missing = [p.name for p in params if p.name not in out]
        if missing:
            raise ExpandError(f"call to '{ent.name}' is missing named argument "
                              + ", ".join(f"'{m}'" for m in missing), sp)
        return out

    def arg_value(self, a: A.Arg, p, ctx: Ctx) -> T.Term:
        v = a.value
        if isinstance(v, A.NamePrune):
            v = A.Var(a.label, span=v.span)
        elif isinstance(v, A.CellNamePrune):
            v = A.CellRef(a.label, span=v.span)
        return self.term(v, ctx)

    def bind_params(self, ent: Entity, args, ctx: Ctx, sp) -> dict:
        params = tuple(ent.params or ())
        if params and params[0].named:
            got = self.match_named(ent, params, args, ctx, sp, cells_ok=True)
            return {p.name: got[p.name][0] for p in params}
        for a in args:
            if a.label is not None:
                raise ExpandError(f"'{ent.name}' takes positional arguments; "
                                  f"unexpected label '{a.label}'", a.span)
        if len(args) < len(params):
            missing = ", ".join(f"'{p.name}'" for p in params[len(args):])
            raise ExpandError(f"call to '{ent.name}' is missing argument {missing} "
                              f"(expects {len(params)}, got {len(args)})", sp)
        if len(args) > len(params):
            raise ExpandError(f"'{ent.name}' expects {len(params)} arguments, got {len(args)}", sp)
        return {p.name: self.arg_value(a, p, ctx) for p, a in zip(params, args)}

    def enter(self, ent: Entity, sp, ctx: Ctx) -> tuple:
        if any(e is ent for e in ctx.stack):
            chain = " -> ".join(e.name for e in ctx.stack + (ent,))
            raise ExpandError(f"recursive macro expansion: {chain}", sp)
        return ctx.stack + (ent,)

    def apply_macro(self, ent: Entity, args, sp, ctx: Ctx) -> T.Term:
        stack = self.enter(ent, sp, ctx)
        bound = self.bind_params(ent, args, ctx, sp)
        base = ent.closure
        if base is not None:
            frame = Frame(False, base.frame)
            subst = {**base.subst, **bound}
            cells = base.cells
        else:
            frame = Frame(False, None)
            subst = bound
            cells = {}
        inner = Ctx(ent.scope, frame, ctx.used, subst, cells, stack)
        for v in bound.values():
            ctx.used.names |= {x.name for x in T.vars_of(v)}
        out = self.term(ent.body, inner)
        rtype = ent.rtype or _IMPLIED_RTYPE.get(ent.kind)
        if rtype is not None:
            from .typecheck import check_macro_result

            check_macro_result(out, rtype, self.symbols, ent.name, sp)
        if isinstance(out, T.App) and ent.kind == "pred-macro" and ent.persistent:
            out = T.App(out.name, out.args, True, out.span)
        return _respan(out, sp)

    # -- rules and processes -------------------------------------------------

    def rule(self, r: A.RuleExpr, anno: Optional[str], ctx: Ctx) -> T.Rule:
        rc = self.rule_ctx(ctx, r)
        premise = tuple(self.term(i, rc) for i in r.premise)
        ac = rc
        for b in r.ar_lets:
            ac = self.bind_let(b, ac)
        actions = tuple(self.term(i, ac) for i in (r.actions or ()))
        cc = ac
        for b in r.r_lets:
            cc = self.bind_let(b, cc)
        conclusion = tuple(self.term(i, cc) for i in r.conclusion)
        return _unify_sorts(T.Rule(premise, actions, conclusion, anno, r.span))

    def cond(self, c: A.Cond, ctx: Ctx) -> T.Cond:
        rc = self.rule_ctx(ctx, c.pattern)
        return T.Cond(self.cell_name(c.cell, c.span, rc), self.term(c.pattern, rc),
                      c.negated, c.span)

    def process(self, p, ctx: Ctx):
        sp = getattr(p, "span", None)
        if isinstance(p, A.Null):
            return T.Null(sp)
        if isinstance(p, A.Step):
            return T.Step(self.rule(p.rule, p.annotation, ctx), self.process(p.rest, ctx), sp)
        if isinstance(p, A.Choice):
            return T.Choice(tuple(self.process(b, ctx) for b in p.branches),
                            self.process(p.rest, ctx), sp)
        if isinstance(p, A.Scoped):
            return T.Scoped(self.process(p.body, ctx), self.process(p.rest, ctx), sp)
        if isinstance(p, A.While):
            return T.While(self.cond(p.cond, ctx), self.process(p.body, ctx),
                           self.process(p.rest, ctx), p.label, sp)
        if isinstance(p, A.Loop):
            return T.Loop(self.process(p.body, ctx), self.process(p.rest, ctx), p.label, sp)
        if isinstance(p, A.IfThenElse):
            return T.If(self.cond(p.cond, ctx), self.process(p.then, ctx),
                        self.process(p.orelse, ctx), self.process(p.rest, ctx), sp)
        if isinstance(p, A.Break):
            return T.Break(p.label, sp)
        if isinstance(p, A.Continue):
            return T.Continue(p.label, sp)
        if isinstance(p, A.ProcLet):
            pc = ctx.with_(used=Used())
            return self.process(p.rest, self.bind_let(p.binding, pc))
        if isinstance(p, A.MacroCall):
            return T.Scoped(self.call_process(p, ctx), self.process(p.rest, ctx), sp)
        raise ExpandError(f"unexpected {type(p).__name__} in process position", sp)

    def call_process(self, p: A.MacroCall, ctx: Ctx):
        sp = p.span
        ent = ctx.scope.resolve_path(p.path, sp)
        name = ".".join(p.path)
        if ent.kind != "process-macro":
            raise ExpandError(f"'{name}' is a {ent.kind}, not a process macro", sp)
        stack = self.enter(ent, sp, ctx)
        pc = ctx.with_(used=Used())
        bound = self.bind_params(ent, p.args, pc, sp)
        subst, cells = {}, {}
        for prm in ent.params:
            val = bound[prm.name]
            if prm.cell:
                if prm.rw and not isinstance(val, T.Cell):
                    raise ExpandError(f"rw cell parameter '{prm.name}' of '{name}' "
                                      "must be given a cell", sp)
                cells[prm.name] = (val, prm.rw)
            else:
                subst[prm.name] = val
        inner = Ctx(ent.scope, Frame(False, None), Used(), subst, cells, stack)
        return self.process(ent.body, inner)

    # -- entry ---------------------------------------------------------------

    def top_ctx(self, scope: Scope) -> Ctx:
        return Ctx(scope, Frame(True, None), Used())

    def run(self) -> FlatSystem:
        procs = []
        counts: dict = {}
        for ent in self.res.decls:
            counts[ent.name] = counts.get(ent.name, 0) + 1
        for ent in self.res.decls:
            name = ent.name if counts[ent.name] == 1 else ent.qname.replace(".", "_")
            body = self.process(ent.body, self.top_ctx(ent.scope))
            procs.append(ProcessDef(name, ent.qname, body, ent.span))
        passthrough = []
        seen: dict = {}
        for scope, d in self.res.formulas:
            seen[d.name] = seen.get(d.name, 0) + 1
        for scope, d in self.res.formulas:
            name = d.name
            if seen[d.name] > 1 and scope.module is not None:
                name = f"{scope.module.qname}_{d.name}".replace(".", "_")
            if isinstance(d, A.Verbatim):
                passthrough.append(Passthrough(d.kind, name, None, d.text, d.attrs,
                                               d.trace_kind, d.span))
            else:
                f = self.term(d.body, self.top_ctx(scope))
                passthrough.append(Passthrough(d.kind, name, f, None, d.attrs,
                                               d.trace_kind, d.span))
        return FlatSystem(self.res.root.name, tuple(procs), dict(self.symbols),
                          tuple(passthrough))


def _unify_sorts(rule: T.Rule) -> T.Rule:
    """A plain ``x`` in a rule that also mentions ``~x`` (or ``$x``) is that variable.

    Name pruning such as ``messageID is .`` produces unsorted occurrences."""
    sorts: dict = {}
    for t in T.rule_terms(rule):
        for v in T.vars_of(t):
            sorts.setdefault(v.name, set()).add(v.sort)
    upgrade = {}
    for name, ss in sorts.items():
        special = ss - {"bits"}
        if "bits" in ss and len(special) == 1 and special <= {"fresh", "public"}:
            upgrade[name] = special.pop()
    if not upgrade:
        return rule

    def fn(n):
        if isinstance(n, T.Var) and n.sort == "bits" and n.name in upgrade:
            return T.Var(n.name, upgrade[n.name], n.span)
        return n

    return T.map_rule(rule, lambda t: T.map_term(t, fn))


def _surface_names(node) -> set:
    """Every spelling that could become a variable inside ``node``."""
    out = set()
    stack = [node]
    while stack:
        n = stack.pop()
        if isinstance(n, A.Var):
            out.add(n.name)
        elif isinstance(n, A.NamedPattern):
            out.add(n.name)
        elif isinstance(n, A.AssignPrune):
            out.add(n.cell)
        elif isinstance(n, A.Arg) and isinstance(n.value, A.NamePrune):
            out.add(n.label)
        if isinstance(n, (tuple, list)):
            stack.extend(n)
        elif hasattr(n, "__dataclass_fields__"):
            for f in n.__dataclass_fields__:
                if f != "span":
                    stack.append(getattr(n, f))
    return out


def _respan(t: T.Term, sp: Optional[Span]) -> T.Term:
    if sp is None or getattr(t, "span", None) is not None:
        return t
    try:
        return replace(t, span=sp)
    except TypeError:
        return t


def expand_macros(resolved) -> FlatSystem:
    """Lower a resolved module graph into a flat system; a FlatSystem passes through."""
    if isinstance(resolved, FlatSystem):
        return resolved
    return Expander(resolved).run()
