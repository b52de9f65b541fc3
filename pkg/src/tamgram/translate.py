"""Lowering a validated graph to Tamarin MSR rules and ``.spthy`` text.

State facts have a fixed shape ``St?(~tgc_pid, 'site', payload)`` where the
payload holds one slot per cell of the context, sorted by cell name: a single
value, a tuple, or the constant ``'tg_nil'`` for an empty context.
"""
from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

from . import terms as T
from .cellflow import CellFlow, ContextTable, cell_usage
from .cfg import ProcessGraph
from .diagnostics import Diagnostic, TranslationError

CELL_PREFIX = "tgc_"
PID = T.Var(CELL_PREFIX + "pid", "fresh")
NIL = T.Str("tg_nil")
UNDEF = T.Str("tg_undef")
STATE_FAMILIES = ("StF", "StB", "PcSt", "Cell")


class Style(enum.Enum):
    CELL_BY_CELL = "cell-by-cell"
    FORWARD = "forward"
    BACKWARD = "backward"
    HYBRID = "hybrid"

    @classmethod
    def parse(cls, s) -> "Style":
        if isinstance(s, Style):
            return s
        for st in cls:
            if st.value == s or st.name.lower() == str(s).lower():
                return st
        raise ValueError(f"unknown translation style {s!r}")


class Bias(enum.Enum):
    FORWARD = "Forward"
    BACKWARD = "Backward"


def cvar_name(cell: str) -> T.Var:
    return PID if cell == "pid" else T.Var(CELL_PREFIX + cell)


def cvar(x):
    """Replace every cell with its ``tgc_`` variable (terms, sequences or rules)."""
    if isinstance(x, T.Rule):
        return T.map_rule(x, cvar)
    if isinstance(x, (list, tuple)) and not isinstance(x, T.Tuple):
        return type(x)(cvar(i) for i in x)
    return T.map_term(x, lambda n: cvar_name(n.name) if isinstance(n, T.Cell) else n)


def flatten(ctx: Iterable[str]) -> tuple:
    return tuple(sorted(ctx))


def exit_bias(g: ProcessGraph, k: int) -> Bias:
    return Bias.FORWARD if len(g.succ(k)) <= 1 else Bias.BACKWARD


def style_bias(style: Style, g: ProcessGraph, k: int) -> Bias:
    if style is Style.FORWARD:
        return Bias.FORWARD
    if style is Style.BACKWARD:
        return Bias.BACKWARD
    return exit_bias(g, k)


@dataclass(frozen=True)
class StateFact:
    family: str  # StF | StB
    site: int
    cells: tuple  # flattened context

    def term(self, slots: dict) -> T.App:
        return T.App(self.family, (PID, T.Str(str(self.site)), payload([slots[c] for c in self.cells])))

    def show(self) -> str:
        ctx = ", ".join("'" + c for c in self.cells)
        return f"{self.family}(~pid, {self.site}, <{ctx}>)"


def payload(values: list) -> T.Term:
    if not values:
        return NIL
    if len(values) == 1:
        return values[0]
    return T.Tuple(tuple(values))


def unpack_payload(t: T.Term, n: int) -> tuple:
    if n == 0:
        return ()
    if n == 1:
        return (t,)
    assert isinstance(t, T.Tuple) and len(t.items) == n, t
    return t.items


def entry_exit_facts(g: ProcessGraph, table: ContextTable, k: int,
                     style: Style = Style.HYBRID) -> tuple:
    """Possible entry facts and exit facts of the rule at ``k``."""
    style = Style.parse(style)
    exits = set()
    if style_bias(style, g, k) is Bias.FORWARD:
        for s in g.succ(k):
            exits.add(StateFact("StF", s, flatten(table.maxR[s])))
    elif g.succ(k):
        exits.add(StateFact("StB", k, flatten(table.maxRA[k])))
    entries = set()
    for p in g.pred(k):
        if style_bias(style, g, p) is Bias.FORWARD:
            entries.add(StateFact("StF", k, flatten(table.maxR[k])))
        else:
            entries.add(StateFact("StB", p, flatten(table.maxRA[p])))
    return entries, exits


@dataclass(frozen=True)
class MsrRule:
    name: str
    premise: tuple
    actions: tuple
    conclusion: tuple
    label: int = -1
    process: str = ""
    annotation: Optional[str] = None
    entry: Optional[StateFact] = None
    exit: Optional[StateFact] = None
    span: object = field(default=None, compare=False, repr=False)

    def show(self) -> str:
        def facts(ts):
            return f"[ {', '.join(tam(t) for t in ts)} ]" if ts else "[ ]"

        if self.actions:
            act = ", ".join(tam(t) for t in self.actions)
            body = f"{facts(self.premise)} --[ {act} ]-> {facts(self.conclusion)}"
        else:
            body = f"{facts(self.premise)} --> {facts(self.conclusion)}"
        return f"rule {self.name}:\n  {body}"


# -- lowering ----------------------------------------------------------------

def _resolve_as(rule: T.Rule) -> T.Rule:
    """Inline ``t as x`` bindings: ``x`` becomes ``t`` throughout the rule."""
    sigma: dict = {}
    for t in T.rule_terms(rule):
        for n in T.walk(t):
            if isinstance(n, T.As):
                sigma[n.name] = n.term
    if not sigma:
        return rule
    for _ in range(len(sigma) + 1):
        new = {k: T.subst(v, sigma) for k, v in sigma.items()}
        if new == sigma:
            break
        sigma = new
    return T.map_rule(rule, lambda t: T.subst(t, sigma))


def _cell_map(rule: T.Rule, span) -> dict:
    """Cell -> term: the ``cas`` pattern for matched cells, else the ``tgc_`` variable."""
    pats = {t.cell: t.pattern for t in rule.premise if isinstance(t, T.Cas)}
    out: dict = {}
    busy: set = set()

    def get(c: str) -> T.Term:
        if c in out:
            return out[c]
        if c not in pats:
            return cvar_name(c)
        if c in busy:
            raise TranslationError(f"cyclic cas patterns on cell '{c}", span)
        busy.add(c)
        out[c] = T.map_term(pats[c], lambda n: get(n.name) if isinstance(n, T.Cell) else n)
        busy.discard(c)
        return out[c]

    for c in sorted(set(pats) | {x for t in T.rule_terms(rule) for x in T.cells_of(t)}):
        out[c] = get(c)
    return out


def _apply(t: T.Term, m: dict) -> T.Term:
    return T.map_term(t, lambda n: m.get(n.name, cvar_name(n.name))
                      if isinstance(n, T.Cell) else n)


def source_rule(g: ProcessGraph, k: int) -> T.Rule:
    rule = g.vertices[k]
    if g.kinds.get(k) == "init":
        rule = T.map_rule(rule, lambda t: T.subst(t, {"pid": PID}))
    return _resolve_as(rule)


def lower_rule(g: ProcessGraph, k: int, entry: Optional[StateFact],
               exit: Optional[StateFact], name: str) -> MsrRule:
    rule = source_rule(g, k)
    usage = cell_usage(rule)
    m = _cell_map(rule, rule.span)
    have = set(entry.cells) if entry else set()
    missing = usage.reads - have
    if missing:
        raise TranslationError(f"internal error: rule {k} reads {sorted(missing)} which its "
                               "entry context does not carry", rule.span)
    premise = []
    if entry is not None:
        premise.append(entry.term({c: m.get(c, cvar_name(c)) for c in entry.cells}))
    premise += [_apply(t, m) for t in rule.premise if not isinstance(t, T.Cas)]
    actions = [_apply(t, m) for t in rule.actions]
    conclusion = []
    if exit is not None:
        assigned = {t.cell: t.value for t in rule.conclusion if isinstance(t, T.Assign)}
        slots = {}
        for c in exit.cells:
            if c in assigned:
                slots[c] = _apply(assigned[c], m)
            elif c in usage.undefines or c not in have:
                raise TranslationError(f"internal error: no value for cell '{c} in the exit "
                                       f"context of rule {k}", rule.span)
            else:
                slots[c] = m.get(c, cvar_name(c))
        conclusion.append(exit.term(slots))
    conclusion += [_apply(t, m) for t in T.nostmt(rule.conclusion)]
    return MsrRule(name, tuple(premise), tuple(actions), tuple(conclusion), k,
                   g.process_of.get(k, ""), rule.annotation, entry, exit, rule.span)


def rule_basename(g: ProcessGraph, k: int) -> str:
    proc = g.process_of.get(k, g.name or "P")
    anno = g.vertices[k].annotation
    tail = _ident(anno) if anno else str(k)
    return f"{_ident(proc)}__{tail}"


def _ident(s: str) -> str:
    s = re.sub(r"[^A-Za-z0-9_]", "_", s)
    return s if s and not s[0].isdigit() else "_" + s


def _fact_tag(f: StateFact) -> str:
    return "F" if f.family == "StF" else str(f.site)


def translate(g: ProcessGraph, table: ContextTable, style=Style.HYBRID,
              warnings: Optional[list] = None) -> list:
    style = Style.parse(style)
    if style is Style.CELL_BY_CELL:
        rules = _cell_by_cell(g)
    else:
        rules = []
        for k in g.labels:
            entries, exits = entry_exit_facts(g, table, k, style)
            ens = sorted(entries, key=lambda f: (f.family, f.site)) or [None]
            exs = sorted(exits, key=lambda f: (f.family, f.site)) or [None]
            base = rule_basename(g, k)
            for en in ens:
                for ex in exs:
                    name = base
                    if len(ens) > 1:
                        name += "__from" + _fact_tag(en)
                    if len(exs) > 1:
                        name += "__to" + str(ex.site)
                    rules.append(lower_rule(g, k, en, ex, name))
    return _unique_names(rules, warnings)


def _unique_names(rules: list, warnings: Optional[list]) -> list:
    seen: dict = {}
    out = []
    for r in rules:
        name = r.name
        if name in seen:
            n = seen[name] + 1
            while f"{r.name}__{n}" in seen:
                n += 1
            seen[name] = n
            name = f"{r.name}__{n}"
            if warnings is not None:
                warnings.append(Diagnostic(f"rule name {r.name} is used more than once; "
                                           f"renamed to {name}", r.span, "warning"))
            r = MsrRule(name, r.premise, r.actions, r.conclusion, r.label, r.process,
                        r.annotation, r.entry, r.exit, r.span)
        seen.setdefault(name, 1)
        out.append(r)
    return out


def _cell_fact(c: str, v: T.Term) -> T.App:
    return T.App("Cell", (PID, T.Str(c), v))


def _pc(k: int) -> T.App:
    return T.App("PcSt", (PID, T.Str(str(k))))


def _cell_by_cell(g: ProcessGraph) -> list:
    """One ``Cell(~pid, 'c', v)`` fact per cell plus a ``PcSt(~pid, 'k')`` program
    counter.  Undefined cells hold ``'tg_undef'``."""
    cells_of_proc: dict = {}
    for k, r in g.vertices.items():
        u = cell_usage(r)
        cells_of_proc.setdefault(g.process_of.get(k), set()).update(
            u.reads | u.defines | u.undefines)
    rules = []
    for k in g.labels:
        rule = source_rule(g, k)
        u = cell_usage(rule)
        m = _cell_map(rule, rule.span)
        assigned = {t.cell: t.value for t in rule.conclusion if isinstance(t, T.Assign)}
        preds = sorted(g.pred(k))
        base = rule_basename(g, k)
        root = not preds
        touched = sorted(u.reads | u.defines | u.undefines)
        for p in preds or [None]:
            prem, concl = [], [_pc(k)]
            if p is not None:
                prem.append(_pc(p))
            for c in (sorted(cells_of_proc.get(g.process_of.get(k), ())) if root else touched):
                if not root:
                    prem.append(_cell_fact(c, m.get(c, cvar_name(c))))
                if c in assigned:
                    concl.append(_cell_fact(c, _apply(assigned[c], m)))
                elif c in u.undefines or (root and c not in assigned):
                    concl.append(_cell_fact(c, UNDEF))
                else:
                    concl.append(_cell_fact(c, m.get(c, cvar_name(c))))
            prem += [_apply(t, m) for t in rule.premise if not isinstance(t, T.Cas)]
            acts = [_apply(t, m) for t in rule.actions]
            concl += [_apply(t, m) for t in T.nostmt(rule.conclusion)]
            name = base + (f"__from{p}" if len(preds) > 1 else "")
            rules.append(MsrRule(name, tuple(prem), tuple(acts), tuple(concl), k,
                                 g.process_of.get(k, ""), rule.annotation, span=rule.span))
    return rules


# -- checks ------------------------------------------------------------------

def wellformedness_problems(rules: Iterable[MsrRule]) -> list:
    """Tamarin-style sanity checks: no leftover cells or statements, and every
    non-public variable of actions/conclusion occurs in the premise."""
    out = []
    for r in rules:
        for t in r.premise + r.actions + r.conclusion:
            for n in T.walk(t):
                if isinstance(n, (T.Cell, T.Assign, T.Undef, T.Cas, T.As)):
                    out.append(f"{r.name}: leftover {T.show(n)}")
        bound = set()
        for t in r.premise:
            bound |= T.vars_of(t)
        for t in r.actions + r.conclusion:
            for v in sorted(T.vars_of(t) - bound, key=lambda v: (v.name, v.sort)):
                if v.sort != "public":
                    out.append(f"{r.name}: unbound variable {tam(v)}")
    return out


# -- emission ----------------------------------------------------------------

def tam(t: T.Term) -> str:
    """Render a term or formula in Tamarin syntax."""
    if isinstance(t, T.Var):
        prefix = {"fresh": "~", "public": "$", "temporal": "#"}.get(t.sort, "")
        return prefix + t.name
    if isinstance(t, T.Str):
        return "'" + t.value + "'"
    if isinstance(t, T.Fresh):
        return "~'" + t.name + "'"
    if isinstance(t, T.Tuple):
        return "<" + ", ".join(tam(i) for i in t.items) + ">"
    if isinstance(t, T.App):
        return ("!" if t.persistent else "") + t.name + "(" + ", ".join(tam(a) for a in t.args) + ")"
    if isinstance(t, T.Quant):
        return f"{t.kind} " + " ".join(tam(v) for v in t.vars) + f". {tam(t.body)}"
    if isinstance(t, T.At):
        return f"{tam(t.fact)} @ {tam(t.time)}"
    if isinstance(t, T.BinF):
        return f"({tam(t.left)} {t.op} {tam(t.right)})"
    if isinstance(t, T.Not):
        return f"not({_unparen(tam(t.body))})"
    raise TranslationError(f"cannot emit {T.show(t)} to Tamarin", getattr(t, "span", None))


def _unparen(s: str) -> str:
    if s.startswith("(") and s.endswith(")"):
        depth = 0
        for i, ch in enumerate(s):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0 and i < len(s) - 1:
                return s
        return s[1:-1]
    return s


def _block(kind: str, name: str, attrs, trace_kind, text: str) -> str:
    head = f"{kind} {name}"
    if attrs:
        head += f" [{attrs}]"
    head += ":"
    if trace_kind:
        head += f" {trace_kind}"
    return f'{head}\n  "{text}"'


def emit_spthy(rules: Iterable[MsrRule], flat, graph: Optional[ProcessGraph] = None,
               theory: Optional[str] = None, builtins: Iterable[str] = ()) -> str:
    name = _ident(theory or getattr(flat, "name", "") or "Theory")
    out = [f"theory {name}", "begin", ""]
    builtins = [b for b in builtins if b]
    if builtins:
        out += ["builtins: " + ", ".join(builtins), ""]
    funs = sorted((s.name, s.arity) for s in flat.symbols.values()
                  if s.kind == "fun" and not s.builtin)
    if funs:
        out += ["functions: " + ", ".join(f"{n}/{a}" for n, a in funs), ""]
    lemmas = []
    for pt in flat.passthrough:
        text = pt.text if pt.formula is None else _unparen(tam(pt.formula))
        block = _block(pt.kind, pt.name, pt.attrs, pt.trace_kind, text)
        if pt.kind == "restriction":
            out += [block, ""]
        else:
            lemmas.append(block)
    if graph is not None:
        for r in graph.restrictions:
            out += [_block("restriction", r.name, None, None, tam(r.formula())), ""]
    for r in rules:
        if r.annotation:
            out.append(f"// {r.annotation}")
        out += [r.show(), ""]
    for block in lemmas:
        out += [block, ""]
    out.append("end")
    return "\n".join(out) + "\n"
