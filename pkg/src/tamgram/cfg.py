"""Control-flow graph construction.

Each process becomes a graph of MSR-rule vertices prefixed by the init vertex
``[Fr(~pid)] -> ['pid := ~pid]``.  Labels are dense integers handed out in
construction order, so builds are reproducible and golden files stay stable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

from . import terms as T
from .diagnostics import CfgError, Diagnostic

NEQ = "TgNeq"
RESTRICT_PREFIX = "TgRestrict"


def init_rule() -> T.Rule:
    return T.Rule((T.App("Fr", (T.Var("pid", "fresh"),)),), (),
                  (T.Assign("pid", T.Var("pid", "fresh")),))


@dataclass(frozen=True)
class Restriction:
    """A generated restriction backing the false branch of a ``cas`` test.

    ``params`` are cells: the tested cell first, then every cell read by the
    pattern.  ``pattern`` may mention those cells and free variables."""

    name: str
    params: tuple
    pattern: T.Term

    @property
    def is_neq(self) -> bool:
        return self.name == NEQ

    def formula(self) -> T.Term:
        vmap = {c: T.Var("tgc_" + c) for c in self.params}
        time = "tgc_t"
        while any(v.name == time for v in vmap.values()):
            time += "_"
        tvar = T.Var(time, "temporal")
        head = T.At(T.App(self.name, tuple(vmap[c] for c in self.params)), tvar)
        if self.is_neq:
            x, y = T.Var("x"), T.Var("y")
            return T.Quant("All", (x, y, tvar),
                           T.BinF("==>", T.At(T.App(NEQ, (x, y)), tvar),
                                  T.Not(T.BinF("=", x, y))))
        pat = T.subst_cells(self.pattern, vmap)
        inner = T.BinF("=", vmap[self.params[0]], pat)
        free = tuple(sorted(T.vars_of(pat), key=lambda v: v.name))
        if free:
            inner = T.Quant("Ex", free, inner)
        return T.Quant("All", tuple(vmap[c] for c in self.params) + (tvar,),
                       T.BinF("==>", head, T.Not(inner)))


@dataclass(frozen=True)
class LoopSkeleton:
    k_t: int
    k_f: Optional[int]
    k_a: int


@dataclass
class LoopCtx:
    stack: tuple = ()  # innermost first
    table: dict = field(default_factory=dict)


@dataclass
class ProcessGraph:
    vertices: dict  # label -> terms.Rule
    edges: frozenset  # of (label, label)
    entries: tuple = ()  # init labels, one per process
    process_of: dict = field(default_factory=dict)  # label -> process name
    kinds: dict = field(default_factory=dict)  # label -> init|rule|skip|test
    restrictions: tuple = ()
    warnings: tuple = ()
    name: str = ""

    def __post_init__(self):
        self.edges = frozenset(self.edges)
        succ: dict = {k: set() for k in self.vertices}
        pred: dict = {k: set() for k in self.vertices}
        for a, b in self.edges:
            succ.setdefault(a, set()).add(b)
            pred.setdefault(b, set()).add(a)
        self._succ = {k: frozenset(v) for k, v in succ.items()}
        self._pred = {k: frozenset(v) for k, v in pred.items()}

    @property
    def entry(self) -> int:
        if len(self.entries) != 1:
            raise CfgError(f"graph has {len(self.entries)} entry vertices")
        return self.entries[0]

    @property
    def labels(self) -> list:
        return sorted(self.vertices)

    def _check(self, k: int) -> None:
        if k not in self.vertices:
            raise CfgError(f"unknown label {k}")

    def succ(self, k: int) -> frozenset:
        self._check(k)
        return self._succ[k]

    def pred(self, k: int) -> frozenset:
        self._check(k)
        return self._pred[k]

    def roots(self) -> frozenset:
        return frozenset(k for k in self.vertices if not self._pred[k])

    def leaves(self) -> frozenset:
        return frozenset(k for k in self.vertices if not self._succ[k])

    def rule(self, k: int) -> T.Rule:
        self._check(k)
        return self.vertices[k]

    def restriction(self, name: str) -> Restriction:
        for r in self.restrictions:
            if r.name == name:
                return r
        raise KeyError(name)


def graph_queries(g: ProcessGraph):
    return g.roots(), g.succ, g.pred, g.leaves()


# -- construction ------------------------------------------------------------

class _Builder:
    def __init__(self, fresh: Iterator[int], restrict_ids: Iterator[int]):
        self.fresh = fresh
        self.restrict_ids = restrict_ids
        self.V: dict = {}
        self.E: set = set()
        self.kinds: dict = {}
        self.restrictions: list = []
        self.warnings: list = []

    def vertex(self, rule: T.Rule, kind: str) -> int:
        k = next(self.fresh)
        self.V[k] = rule
        self.kinds[k] = kind
        return k

    def edge(self, a: int, b: int) -> None:
        self.E.add((a, b))

    def test_rules(self, c: T.Cond) -> tuple:
        """Rules for the branch where the condition holds and where it fails."""
        holds = T.Rule((T.Cas(c.cell, c.pattern, c.span),), (), (), None, c.span)
        pat = _strip_as(c.pattern)
        if not T.vars_of(pat):
            act = T.App(NEQ, (T.Cell(c.cell), pat), span=c.span)
            if not any(r.is_neq for r in self.restrictions):
                self.restrictions.append(Restriction(NEQ, ("x", "y"), T.Var("y")))
        else:
            name = f"{RESTRICT_PREFIX}{next(self.restrict_ids)}"
            params = (c.cell,) + tuple(sorted(T.cells_of(pat) - {c.cell}))
            self.restrictions.append(Restriction(name, params, pat))
            act = T.App(name, tuple(T.Cell(p) for p in params), span=c.span)
        fails = T.Rule((), (act,), (), None, c.span)
        if c.negated:
            return fails, holds
        return holds, fails

    def build(self, k: int, p, ctx: LoopCtx) -> Optional[int]:
        """Wire ``p`` after vertex ``k``; return the vertex control leaves from."""
        if isinstance(p, T.Null):
            return k
        if isinstance(p, T.Step):
            v = self.vertex(p.rule, "rule")
            self.edge(k, v)
            return self.build(v, p.rest, ctx)
        if isinstance(p, T.Scoped):
            e = self.build(k, p.body, ctx)
            return self.after(e, p.rest, ctx)
        if isinstance(p, T.Choice):
            exits = [self.build(k, b, ctx) for b in p.branches]
            join = self.vertex(T.SKIP, "skip")
            for e in exits:
                if e is not None:
                    self.edge(e, join)
            return self.build(join, p.rest, ctx)
        if isinstance(p, T.If):
            r_t, r_f = self.test_rules(p.cond)
            k_t = self.vertex(r_t, "test")
            k_f = self.vertex(r_f, "test")
            self.edge(k, k_t)
            self.edge(k, k_f)
            e_t = self.build(k_t, p.then, ctx)
            e_f = self.build(k_f, p.orelse, ctx)
            join = self.vertex(T.SKIP, "skip")
            for e in (e_t, e_f):
                if e is not None:
                    self.edge(e, join)
            return self.build(join, p.rest, ctx)
        if isinstance(p, T.While):
            r_t, r_f = self.test_rules(p.cond)
            k_t = self.vertex(r_t, "test")
            k_f = self.vertex(r_f, "test")
            k_a = self.vertex(T.SKIP, "skip")
            self.edge(k, k_t)
            self.edge(k, k_f)
            self.edge(k_f, k_a)
            inner = self.push(ctx, LoopSkeleton(k_t, k_f, k_a), p.label, p.span)
            e = self.build(k_t, p.body, inner)
            if e is not None:
                self.edge(e, k_t)
                self.edge(e, k_f)
            return self.build(k_a, p.rest, ctx)
        if isinstance(p, T.Loop):
            k_lp = self.vertex(T.SKIP, "skip")
            k_a = self.vertex(T.SKIP, "skip")
            self.edge(k, k_lp)
            inner = self.push(ctx, LoopSkeleton(k_lp, None, k_a), p.label, p.span)
            e = self.build(k_lp, p.body, inner)
            if e is not None:
                self.edge(e, k_lp)
            return self.build(k_a, p.rest, ctx)
        if isinstance(p, (T.Break, T.Continue)):
            kw = "break" if isinstance(p, T.Break) else "continue"
            sk = self.find(ctx, p.label, kw, p.span)
            if isinstance(p, T.Break):
                self.edge(k, sk.k_a)
            else:
                self.edge(k, sk.k_t)
                if sk.k_f is not None:
                    self.edge(k, sk.k_f)
            return None
        raise CfgError(f"cannot build a graph for {type(p).__name__}", getattr(p, "span", None))

    def after(self, e: Optional[int], rest, ctx: LoopCtx) -> Optional[int]:
        if e is None:
            if not isinstance(rest, T.Null):
                self.warnings.append(Diagnostic("unreachable code after break/continue",
                                                getattr(rest, "span", None), "warning"))
            return None
        return self.build(e, rest, ctx)

    @staticmethod
    def push(ctx: LoopCtx, sk: LoopSkeleton, label: Optional[str], span) -> LoopCtx:
        table = ctx.table
        if label is not None:
            if label in table:
                raise CfgError(f"loop label \"{label}\" is already in use by an enclosing loop",
                               span)
            table = {**table, label: sk}
        return LoopCtx((sk,) + ctx.stack, table)

    @staticmethod
    def find(ctx: LoopCtx, label: Optional[str], kw: str, span) -> LoopSkeleton:
        if label is not None:
            if label not in ctx.table:
                raise CfgError(f"{kw} refers to unknown loop label \"{label}\"", span)
            return ctx.table[label]
        if not ctx.stack:
            raise CfgError(f"{kw} outside of any loop", span)
        return ctx.stack[0]


def _strip_as(t: T.Term) -> T.Term:
    return T.map_term(t, lambda n: n.term if isinstance(n, T.As) else n)


def build_cfg(p, fresh: Optional[Iterator[int]] = None, name: str = "P",
              fuse_skips: bool = False) -> ProcessGraph:
    """Graph of a single process."""
    return _assemble([(name, p)], fresh, fuse_skips, name)


def system_cfg(flat, fuse_skips: bool = False,
               fresh: Optional[Iterator[int]] = None) -> ProcessGraph:
    """Disjoint union of the graphs of every process in a flat system."""
    return _assemble([(pd.name, pd.body) for pd in flat.processes], fresh, fuse_skips,
                     getattr(flat, "name", ""))


def _assemble(procs, fresh, fuse_skips: bool, name: str) -> ProcessGraph:
    b = _Builder(fresh if fresh is not None else itertools.count(), itertools.count())
    entries = []
    owner = {}
    for pname, body in procs:
        before = set(b.V)
        entry = b.vertex(init_rule(), "init")
        b.build(entry, body, LoopCtx())
        entries.append(entry)
        for k in set(b.V) - before:
            owner[k] = pname
    g = ProcessGraph(dict(b.V), frozenset(b.E), tuple(entries), owner, dict(b.kinds),
                     tuple(b.restrictions), tuple(b.warnings), name)
    g = prune_unreachable(g)
    if fuse_skips:
        g = fuse_skip_vertices(g)
    return renumber(g)


# -- normalisation -----------------------------------------------------------

def _replace(g: ProcessGraph, vertices, edges, entries=None, warnings=None,
             restrictions=None) -> ProcessGraph:
    keep = set(vertices)
    return ProcessGraph(
        dict(vertices), frozenset(edges),
        tuple(entries if entries is not None else g.entries),
        {k: v for k, v in g.process_of.items() if k in keep},
        {k: v for k, v in g.kinds.items() if k in keep},
        tuple(restrictions if restrictions is not None else g.restrictions),
        tuple(warnings if warnings is not None else g.warnings),
        g.name)


def reachable(g: ProcessGraph, starts: Iterable[int]) -> set:
    seen = set()
    stack = list(starts)
    while stack:
        k = stack.pop()
        if k in seen:
            continue
        seen.add(k)
        stack.extend(g._succ.get(k, ()))
    return seen


def prune_unreachable(g: ProcessGraph) -> ProcessGraph:
    live = reachable(g, g.entries)
    dead = sorted(set(g.vertices) - live)
    if not dead:
        return g
    warnings = list(g.warnings)
    for k in dead:
        if g.kinds.get(k) != "skip":
            span = g.vertices[k].span
            warnings.append(Diagnostic(f"unreachable rule in process {g.process_of.get(k, '?')}: "
                                       + T.show_rule(g.vertices[k]), span, "warning"))
    V = {k: r for k, r in g.vertices.items() if k in live}
    E = {(a, b) for a, b in g.edges if a in live and b in live}
    used = _used_restrictions(V)
    rs = [r for r in g.restrictions if r.name in used]
    return _replace(g, V, E, warnings=warnings, restrictions=rs)


def _used_restrictions(V) -> set:
    names = set()
    for r in V.values():
        for a in r.actions:
            if isinstance(a, T.App) and (a.name == NEQ or a.name.startswith(RESTRICT_PREFIX)):
                names.add(a.name)
    return names


def is_skip(g: ProcessGraph, k: int) -> bool:
    r = g.vertices[k]
    return not r.premise and not r.actions and not r.conclusion and k not in g.entries


def fuse_skip_vertices(g: ProcessGraph) -> ProcessGraph:
    """Remove empty rules, connecting each predecessor to each successor.

    Self-looping skips are kept since removing them would drop a cycle."""
    V = dict(g.vertices)
    E = set(g.edges)
    changed = True
    while changed:
        changed = False
        for k in sorted(V):
            r = V[k]
            if r.premise or r.actions or r.conclusion or k in g.entries:
                continue
            if (k, k) in E:
                continue
            preds = {a for a, b in E if b == k}
            succs = {b for a, b in E if a == k}
            E = {(a, b) for a, b in E if a != k and b != k}
            E |= {(a, b) for a in preds for b in succs}
            del V[k]
            changed = True
            break
    return _replace(g, V, E)


def renumber(g: ProcessGraph) -> ProcessGraph:
    order = sorted(g.vertices)
    m = {old: new for new, old in enumerate(order)}
    if all(a == b for a, b in m.items()):
        return g
    V = {m[k]: r for k, r in g.vertices.items()}
    E = {(m[a], m[b]) for a, b in g.edges}
    return ProcessGraph(V, frozenset(E), tuple(m[e] for e in g.entries),
                        {m[k]: v for k, v in g.process_of.items()},
                        {m[k]: v for k, v in g.kinds.items()},
                        g.restrictions, g.warnings, g.name)


# -- output ------------------------------------------------------------------

def to_dot(g: ProcessGraph) -> str:
    lines = [f"digraph {_dot_id(g.name or 'cfg')} {{", "  node [shape=box];"]
    for k in g.labels:
        label = f"{k}: {T.show_rule(g.vertices[k])}"
        if g.vertices[k].annotation:
            label = f"{k} \"{g.vertices[k].annotation}\": {T.show_rule(g.vertices[k])}"
        lines.append(f"  {k} [label={_dot_str(label)}];")
    for a, b in sorted(g.edges):
        lines.append(f"  {a} -> {b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _dot_str(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _dot_id(s: str) -> str:
    return s if s.replace("_", "a").isalnum() else _dot_str(s)
