"""Reference interpreters and a bounded correspondence checker.

Two small-step semantics are executed over a finite universe:

* Tamgram: states ``(S, K, M)`` of a fact multiset, per-instance program
  counters and per-instance cell memories; steps Fresh, Start and Rule.
* Tamarin: fact multisets rewritten by ground instances of MSR rules plus the
  built-in FRESH rule.

``In`` premises are served by an oracle that can produce any universe
constant, and generated restriction actions (``TgNeq``, ``TgRestrict<N>``)
filter out steps that would violate them.  The correspondence checker explores
both semantics to a fixed depth and checks state and step consistency between
related traces in both directions.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional

from . import terms as T
from .cellflow import ContextTable, cell_usage, context_table
from .cfg import NEQ, RESTRICT_PREFIX, ProcessGraph, Restriction
from .diagnostics import BudgetExceeded, CellflowError
from .translate import MsrRule, Style, payload, translate

DEFAULT_BUDGET = 2_000_000


# -- universe and states -----------------------------------------------------

@dataclass(frozen=True)
class Universe:
    consts: tuple = ("a", "b")
    max_fresh: int = 3

    @property
    def terms(self) -> tuple:
        return tuple(T.Str(c) for c in self.consts)

    def fresh(self, i: int) -> T.Fresh:
        return T.Fresh(f"n{i}")


def default_universe(g: ProcessGraph, extra: Iterable[str] = (), limit: int = 3,
                     max_fresh: int = 3) -> Universe:
    """Constants tested by ``cas`` first, then one constant no pattern mentions,
    then other string literals; at most ``limit`` in total."""
    tested, other = [], []
    for r in g.vertices.values():
        for t in T.rule_terms(r):
            inside = isinstance(t, T.Cas) or (isinstance(t, T.App) and t.name == NEQ)
            for n in T.walk(t):
                if isinstance(n, T.Str):
                    (tested if inside else other).append(n.value)
    tested = list(dict.fromkeys(tested))
    spare = next(c for c in ("k", "k0", "k1", "k2") if c not in tested + other)
    consts = list(dict.fromkeys(list(extra) + tested + [spare] + sorted(set(other))))
    return Universe(tuple(consts[:limit]), max_fresh)


def _key(t) -> str:
    return T.show(t)


def _sorted(facts) -> tuple:
    return tuple(sorted(facts, key=_key))


def _add(facts: tuple, new: Iterable) -> tuple:
    out = list(facts)
    for f in new:
        if isinstance(f, T.App) and f.persistent and f in out:
            continue
        out.append(f)
    return _sorted(out)


def _remove(facts: tuple, gone: Iterable) -> Optional[tuple]:
    out = list(facts)
    for f in gone:
        if f in out:
            out.remove(f)
        else:
            return None
    return tuple(out)


def lfacts(facts: Iterable) -> list:
    return [f for f in facts if isinstance(f, T.App) and not f.persistent
            and f.name != "In"]


@dataclass(frozen=True)
class ExecState:
    """Tamgram state: facts (S), counters (K) and memories (M)."""

    facts: tuple = ()
    counters: tuple = ()  # sorted (instance name, label)
    memories: tuple = ()  # sorted (instance name, sorted ((cell, term), ...))
    fresh: int = 0

    @property
    def K(self) -> dict:
        return dict(self.counters)

    @property
    def M(self) -> dict:
        return {i: dict(m) for i, m in self.memories}

    def show(self) -> str:
        S = "{" + ", ".join(T.show(f) for f in self.facts) + "}"
        K = "{" + ", ".join(f"{i} -> {k}" for i, k in self.counters) + "}"
        M = "{" + ", ".join(f"{i} -> {{" + ", ".join(f"'{c} -> {T.show(v)}" for c, v in m) + "}"
                            for i, m in self.memories) + "}"
        return f"({S}, {K}, {M})"


@dataclass(frozen=True)
class TamarinState:
    facts: tuple = ()
    fresh: int = 0

    def show(self) -> str:
        return "{" + ", ".join(T.show(f) for f in self.facts) + "}"


def _state(facts, K: dict, M: dict, fresh: int) -> ExecState:
    return ExecState(_sorted(facts), tuple(sorted(K.items())),
                     tuple(sorted((i, tuple(sorted(m.items()))) for i, m in M.items())), fresh)


@dataclass(frozen=True)
class GroundRule:
    premise: tuple
    actions: tuple
    conclusion: tuple

    def show(self) -> str:
        l = ", ".join(T.show(t) for t in self.premise)
        r = ", ".join(T.show(t) for t in self.conclusion)
        if self.actions:
            return f"[{l}] --[" + ", ".join(T.show(t) for t in self.actions) + f"]-> [{r}]"
        return f"[{l}] -> [{r}]"


@dataclass(frozen=True)
class Step:
    """One transition: ``kind`` is fresh, start, rule (Tamgram) or msr (Tamarin)."""

    kind: str
    ground: GroundRule
    instance: Optional[str] = None
    label: Optional[int] = None  # vertex executed
    target: Optional[int] = None  # next counter value, None once the instance ends
    name: str = ""  # Tamarin rule name
    assigns: tuple = ()  # Tamgram only: ((cell, value), ...)

    def show(self) -> str:
        tag = self.name or self.kind
        if self.label is not None:
            tag += f"@{self.label}"
        return f"{tag} {self.ground.show()}"


FRESH_NAME = "FRESH"


# -- matching ----------------------------------------------------------------

def match(p: T.Term, g: T.Term, sigma: dict) -> Optional[dict]:
    if isinstance(p, T.Var):
        if p.name in sigma:
            return sigma if sigma[p.name] == g else None
        if p.sort == "fresh" and not isinstance(g, T.Fresh):
            return None
        if p.sort == "public" and not isinstance(g, T.Str):
            return None
        if p.sort == "temporal":
            return None
        return {**sigma, p.name: g}
    if isinstance(p, (T.Str, T.Fresh)):
        return sigma if p == g else None
    if isinstance(p, T.Tuple):
        if not isinstance(g, T.Tuple) or len(g.items) != len(p.items):
            return None
        for a, b in zip(p.items, g.items):
            sigma = match(a, b, sigma)
            if sigma is None:
                return None
        return sigma
    if isinstance(p, T.App):
        if not isinstance(g, T.App) or g.name != p.name or len(g.args) != len(p.args) \
                or g.persistent != p.persistent:
            return None
        for a, b in zip(p.args, g.args):
            sigma = match(a, b, sigma)
            if sigma is None:
                return None
        return sigma
    if isinstance(p, T.As):
        sigma = match(p.term, g, sigma)
        if sigma is None:
            return None
        return match(T.Var(p.name), g, sigma)
    return None


def ground(t: T.Term, sigma: dict) -> T.Term:
    return T.subst(t, sigma)


def _match_facts(pats: list, facts: tuple, sigma: dict, used: frozenset) -> Iterator[tuple]:
    """Yield (sigma, used indices) for matching ``pats`` against distinct linear
    occurrences (persistent facts may be shared)."""
    if not pats:
        yield sigma, used
        return
    p, rest = pats[0], pats[1:]
    seen = set()
    for i, f in enumerate(facts):
        if not (isinstance(f, T.App) and f.name == p.name):
            continue
        if not f.persistent and i in used:
            continue
        if (f, f.persistent) in seen:
            continue  # identical occurrences give identical results
        seen.add((f, f.persistent))
        s2 = match(p, f, sigma)
        if s2 is None:
            continue
        yield from _match_facts(rest, facts, s2, used if f.persistent else used | {i})


def _instances(premise: list, others: list, facts: tuple, sigma: dict,
               u: Universe) -> Iterator[dict]:
    """All substitutions grounding a rule whose non-``In`` premise facts come from
    ``facts``; ``In`` facts and any leftover variables range over the universe."""
    stored = [p for p in premise if not (isinstance(p, T.App) and p.name == "In")]
    for s, _used in _match_facts(stored, facts, sigma, frozenset()):
        free = set()
        for t in list(premise) + list(others):
            free |= {v for v in T.vars_of(t) if v.name not in s}
        free = sorted({(v.name, v.sort) for v in free})
        if any(sort == "fresh" or sort == "temporal" for _n, sort in free):
            continue
        for vals in itertools.product(u.terms, repeat=len(free)):
            yield {**s, **{n: v for (n, _s), v in zip(free, vals)}}


# -- generated restrictions --------------------------------------------------

def violates(actions: Iterable, restrictions: dict) -> bool:
    for a in actions:
        if not isinstance(a, T.App):
            continue
        if a.name == NEQ and len(a.args) == 2:
            if a.args[0] == a.args[1]:
                return True
        elif a.name.startswith(RESTRICT_PREFIX) and a.name in restrictions:
            r: Restriction = restrictions[a.name]
            vals = dict(zip(r.params, a.args))
            pat = T.subst_cells(r.pattern, vals)
            if match(pat, a.args[0], {}) is not None:
                return True
    return False


# -- Tamgram semantics -------------------------------------------------------

def deref(m: dict, t: T.Term) -> T.Term:
    """Replace cells by their memory contents; undefined cells are an error."""

    def fn(n):
        if isinstance(n, T.Cell):
            if n.name not in m:
                raise CellflowError(f"invalid access to undefined cell '{n.name}")
            return m[n.name]
        return n

    return T.map_term(t, fn)


class Tamgram:
    """Labelled transition relation of a system given by its graph."""

    def __init__(self, g: ProcessGraph, u: Universe, table: Optional[ContextTable] = None,
                 check_contexts: bool = False):
        self.g = g
        self.u = u
        self.table = table
        self.check_contexts = check_contexts
        self.restrictions = {r.name: r for r in g.restrictions}
        self.usage = {k: cell_usage(r) for k, r in g.vertices.items()}

    def initial(self) -> ExecState:
        return ExecState()

    def step(self, st: ExecState) -> list:
        out = []
        if st.fresh < self.u.max_fresh:
            n = self.u.fresh(st.fresh)
            fr = T.App("Fr", (n,))
            out.append((Step("fresh", GroundRule((), (), (fr,))),
                        ExecState(_add(st.facts, [fr]), st.counters, st.memories, st.fresh + 1)))
        K, M = st.K, st.M
        for root in sorted(self.g.entries):
            for f in st.facts:
                if not (isinstance(f, T.App) and f.name == "Fr" and isinstance(f.args[0], T.Fresh)):
                    continue
                ident = f.args[0]
                if ident.name in K:
                    continue
                facts = _remove(st.facts, [f])
                gr = GroundRule((f,), (), (T.Assign("pid", ident),))
                succs = sorted(self.g.succ(root))
                for k2 in succs or [None]:
                    K2, M2 = dict(K), dict(M)
                    if k2 is not None:
                        K2[ident.name] = k2
                        M2[ident.name] = {"pid": ident}
                    out.append((Step("start", gr, ident.name, root, k2,
                                     assigns=(("pid", ident),)),
                                _state(facts, K2, M2, st.fresh)))
        out = _dedupe(out)
        for ident, k in st.counters:
            m = M[ident]
            if self.check_contexts and self.table is not None:
                missing = self.table.maxR[k] - set(m)
                if missing:
                    raise CellflowError(f"instance {ident} at {k} lacks cells {sorted(missing)}")
            out.extend(self.rule_steps(st, ident, k, m))
        return out

    def rule_steps(self, st: ExecState, ident: str, k: int, m: dict) -> list:
        rule = self.g.vertices[k]
        if not self.usage[k].reads <= set(m):
            return []
        try:
            prem = [deref(m, t) for t in rule.premise if not isinstance(t, T.Cas)]
            cas = [(deref(m, T.Cell(t.cell)), deref(m, t.pattern))
                   for t in rule.premise if isinstance(t, T.Cas)]
            acts = [deref(m, t) for t in rule.actions]
            concl = [deref(m, t) for t in T.nostmt(rule.conclusion)]
            assigns = [(t.cell, deref(m, t.value)) for t in rule.conclusion
                       if isinstance(t, T.Assign)]
        except CellflowError:
            return []
        undefs = {t.cell for t in rule.conclusion if isinstance(t, T.Undef)}
        sigma: Optional[dict] = {}
        for val, pat in cas:
            sigma = match(pat, val, sigma)
            if sigma is None:
                return []
        out = []
        K, M = st.K, st.M
        others = acts + concl + [v for _c, v in assigns]
        for s in _instances(prem, others, st.facts, sigma, self.u):
            gp = tuple(ground(t, s) for t in prem)
            ga = tuple(ground(t, s) for t in acts)
            if violates(ga, self.restrictions):
                continue
            gc = tuple(ground(t, s) for t in concl)
            facts = _remove(st.facts, [f for f in gp if not f.persistent and f.name != "In"])
            if facts is None:
                continue
            facts = _add(facts, gc)
            defs = {c: ground(v, s) for c, v in assigns}
            mem = {c: v for c, v in m.items() if c not in undefs and c not in defs}
            mem.update(defs)
            succs = sorted(self.g.succ(k))
            for k2 in succs or [None]:
                K2, M2 = dict(K), dict(M)
                if k2 is None:
                    del K2[ident], M2[ident]
                else:
                    K2[ident] = k2
                    M2[ident] = mem
                out.append((Step("rule", GroundRule(gp, ga, gc), ident, k, k2,
                                 assigns=tuple(sorted(defs.items()))),
                            _state(facts, K2, M2, st.fresh)))
        return out


def _dedupe(pairs: list) -> list:
    seen = set()
    out = []
    for step, st in pairs:
        key = (step, st)
        if key not in seen:
            seen.add(key)
            out.append((step, st))
    return out


def tamgram_step(st: ExecState, g: ProcessGraph, u: Universe) -> list:
    return Tamgram(g, u).step(st)


# -- Tamarin semantics -------------------------------------------------------

class Tamarin:
    def __init__(self, rules: list, u: Universe, restrictions: Iterable[Restriction] = ()):
        self.rules = list(rules)
        self.u = u
        self.restrictions = {r.name: r for r in restrictions}

    def initial(self) -> TamarinState:
        return TamarinState()

    def step(self, st: TamarinState) -> list:
        out = []
        if st.fresh < self.u.max_fresh:
            fr = T.App("Fr", (self.u.fresh(st.fresh),))
            out.append((Step("msr", GroundRule((), (), (fr,)), name=FRESH_NAME),
                        TamarinState(_add(st.facts, [fr]), st.fresh + 1)))
        for r in self.rules:
            for s in _instances(list(r.premise), list(r.actions + r.conclusion),
                                st.facts, {}, self.u):
                gp = tuple(ground(t, s) for t in r.premise)
                ga = tuple(ground(t, s) for t in r.actions)
                if violates(ga, self.restrictions):
                    continue
                gc = tuple(ground(t, s) for t in r.conclusion)
                facts = _remove(st.facts, [f for f in gp if not f.persistent and f.name != "In"])
                if facts is None:
                    continue
                out.append((Step("msr", GroundRule(gp, ga, gc), label=r.label, name=r.name),
                            TamarinState(_add(facts, gc), st.fresh)))
        return _dedupe(out)


def tamarin_step(S: TamarinState, rules: list, u: Universe,
                 restrictions: Iterable[Restriction] = ()) -> list:
    return Tamarin(rules, u, restrictions).step(S)


# -- traces ------------------------------------------------------------------

@dataclass(frozen=True)
class Trace:
    states: tuple
    steps: tuple

    def show(self) -> str:
        parts = [self.states[0].show()]
        for s, st in zip(self.steps, self.states[1:]):
            parts += [s.show(), st.show()]
        return ",\n".join(parts)


def canonical(trace: Trace) -> Trace:
    """Rename fresh names to n0, n1, ... by first occurrence along the trace."""
    order: dict = {}

    def visit(x):
        if isinstance(x, T.Fresh):
            order.setdefault(x.name, f"n{len(order)}")
        elif isinstance(x, (tuple, list)):
            for y in x:
                visit(y)
        elif isinstance(x, T.Rule):
            visit(list(T.rule_terms(x)))
        elif hasattr(x, "__dataclass_fields__"):
            for f in x.__dataclass_fields__:
                visit(getattr(x, f))

    for s, st in itertools.zip_longest(trace.states, trace.steps):
        visit(s)
        visit(st)
    if all(k == v for k, v in order.items()):
        return trace
    return _rename(trace, order)


def _rename(x, order: dict):
    if isinstance(x, T.Fresh):
        return T.Fresh(order.get(x.name, x.name), x.span)
    if isinstance(x, str):
        return order.get(x, x) if x in order else x
    if isinstance(x, tuple):
        return tuple(_rename(y, order) for y in x)
    if hasattr(x, "__dataclass_fields__") and not isinstance(x, T.Var):
        vals = {f: _rename(getattr(x, f), order) for f in x.__dataclass_fields__}
        return type(x)(**vals)
    return x


def enumerate_traces(initial, stepper: Callable, depth: int,
                     budget: int = DEFAULT_BUDGET) -> set:
    """All traces with at most ``depth`` steps, as canonical :class:`Trace` values."""
    out = set()
    count = 0
    stack = [((initial,), ())]
    while stack:
        states, steps = stack.pop()
        count += 1
        if count > budget:
            raise BudgetExceeded(f"trace budget of {budget} exceeded")
        out.add(canonical(Trace(states, steps)))
        if len(steps) >= depth:
            continue
        for step, nxt in stepper(states[-1]):
            stack.append((states + (nxt,), steps + (step,)))
    return out


# -- correspondence ----------------------------------------------------------

@dataclass
class Counterexample:
    direction: str  # soundness | completeness
    clause: str
    detail: str
    trace: list = field(default_factory=list)  # steps of the unmatched side

    def show(self) -> str:
        lines = [f"{self.direction} fails ({self.clause}): {self.detail}"]
        lines += ["  " + s.show() for s in self.trace]
        return "\n".join(lines)


@dataclass
class CorrespondenceResult:
    ok: bool
    counterexample: Optional[Counterexample] = None
    explored: int = 0


class _Relation:
    """State and step consistency between the two semantics."""

    def __init__(self, g: ProcessGraph, table: ContextTable):
        self.g = g
        self.table = table

    def forms(self, ident: str, k: int, m: dict) -> Optional[set]:
        """Every state fact allowed to stand for an instance at ``k`` with memory ``m``."""
        pid = T.Fresh(ident)
        out = set()
        try:
            ctx = sorted(self.table.maxR[k])
            out.add(T.App("StF", (pid, T.Str(str(k)), payload([m[c] for c in ctx]))))
            for p in self.g.pred(k):
                ctx = sorted(self.table.maxRA[p])
                out.add(T.App("StB", (pid, T.Str(str(p)), payload([m[c] for c in ctx]))))
        except KeyError:
            return None
        return out

    def state(self, tg: ExecState, t: TamarinState) -> Optional[str]:
        """``None`` when consistent, else a description of the violated clause."""
        rest = _remove(t.facts, tg.facts)
        if rest is None:
            return "Tamgram facts are not contained in the Tamarin state"
        M = tg.M
        state_facts = [f for f in rest if f.name in ("StF", "StB")]
        if len(state_facts) != len(rest):
            extra = [T.show(f) for f in rest if f.name not in ("StF", "StB")]
            return "unexpected Tamarin facts " + ", ".join(extra)
        byid: dict = {}
        for f in state_facts:
            byid.setdefault(f.args[0].name if isinstance(f.args[0], T.Fresh) else None,
                            []).append(f)
        if set(byid) != set(M):
            return (f"state facts for instances {sorted(map(str, byid))} but live instances "
                    f"{sorted(M)}")
        for ident, k in tg.counters:
            fs = byid[ident]
            forms = self.forms(ident, k, M[ident])
            if forms is None:
                return f"memory of {ident} lacks a context cell at {k}"
            if len(fs) != 1 or fs[0] not in forms:
                return (f"state fact {', '.join(T.show(f) for f in fs)} does not encode "
                        f"instance {ident} at {k} with memory {_showm(M[ident])}")
        return None

    def step(self, tg: ExecState, s: Step, tg2: ExecState, t: TamarinState, ts: Step,
             t2: TamarinState) -> Optional[str]:
        if s.kind == "fresh":
            if ts.name != FRESH_NAME or ts.ground != s.ground:
                return "fresh step not matched by FRESH"
            return None
        if ts.name == FRESH_NAME:
            return "FRESH does not match a non-fresh step"
        if ts.label != s.label:
            return f"Tamarin rule {ts.name} comes from vertex {ts.label}, not {s.label}"
        entry = []
        if s.kind == "rule":
            forms = self.forms(s.instance, s.label, tg.M[s.instance]) or set()
            entry = [f for f in ts.ground.premise if f in forms]
            if len(entry) != 1:
                return "entry state fact missing from premise"
        exit_ = []
        if s.target is not None:
            forms = self.forms(s.instance, s.target, tg2.M[s.instance]) or set()
            exit_ = [f for f in ts.ground.conclusion if f in forms]
            if len(exit_) != 1:
                return "exit state fact missing from conclusion"
        prem = [f for f in s.ground.premise if not isinstance(f, T.Assign)]
        if _ms(ts.ground.premise) != _ms(entry + prem):
            return "premise differs"
        if _ms(ts.ground.actions) != _ms(s.ground.actions):
            return "actions differ"
        concl = [f for f in s.ground.conclusion if not isinstance(f, (T.Assign, T.Undef))]
        if _ms(ts.ground.conclusion) != _ms(exit_ + concl):
            return "conclusion differs"
        return None


def _ms(facts) -> tuple:
    return tuple(sorted(facts, key=_key))


def _showm(m: dict) -> str:
    return "{" + ", ".join(f"'{c} -> {T.show(v)}" for c, v in sorted(m.items())) + "}"


def check_correspondence(g: ProcessGraph, style=Style.HYBRID, depth: int = 5,
                         u: Optional[Universe] = None, rules: Optional[list] = None,
                         table: Optional[ContextTable] = None,
                         budget: int = DEFAULT_BUDGET,
                         tamarin_depth: Optional[int] = None) -> CorrespondenceResult:
    """Bounded check of both correspondence theorems for one translation style.

    Soundness: every Tamgram trace of at most ``depth`` steps has a matching
    Tamarin trace.  Completeness: every Tamarin trace of at most
    ``tamarin_depth`` (default ``depth + 1``) steps has a matching Tamgram trace.
    Matching means state consistency after every step and step consistency for
    every step."""
    style = Style.parse(style)
    if style is Style.CELL_BY_CELL:
        raise ValueError("the consistency relation is defined for state-fact styles only")
    table = table or context_table(g)
    u = u or default_universe(g)
    rules = rules if rules is not None else translate(g, table, style)
    tg = Tamgram(g, u, table, check_contexts=True)
    ta = Tamarin(rules, u, g.restrictions)
    rel = _Relation(g, table)
    stats = {"n": 0}
    tg_succ = _memo(tg.step)
    ta_succ = _memo(ta.step)

    def tick():
        stats["n"] += 1
        if stats["n"] > budget:
            raise BudgetExceeded(f"state budget of {budget} exceeded in correspondence check")

    memo_s: dict = {}

    def sound(x: ExecState, ys: frozenset, d: int, path: list) -> Optional[Counterexample]:
        if d == 0:
            return None
        key = (x, ys, d)
        if key in memo_s:
            return memo_s[key]
        tick()
        res = None
        for s, x2 in tg_succ(x):
            ys2 = set()
            reasons = []
            for y in ys:
                for ts, y2 in ta_succ(y):
                    why = rel.step(x, s, x2, y, ts, y2) or rel.state(x2, y2)
                    if why is None:
                        ys2.add(y2)
                    elif _comparable(s, ts):
                        reasons.append(why)
            if not ys2:
                clause = "step consistency" if not any("state" in r or "fact" in r for r in reasons) \
                    else "state consistency"
                detail = reasons[0] if reasons else "no Tamarin rule instance is enabled"
                res = Counterexample("soundness", clause, detail, path + [s])
                break
            res = sound(x2, frozenset(ys2), d - 1, path + [s])
            if res is not None:
                break
        memo_s[key] = res
        return res

    memo_c: dict = {}

    def complete(xs: frozenset, y: TamarinState, d: int, path: list) -> Optional[Counterexample]:
        if d == 0:
            return None
        key = (xs, y, d)
        if key in memo_c:
            return memo_c[key]
        tick()
        res = None
        for ts, y2 in ta_succ(y):
            xs2 = set()
            reasons = []
            for x in xs:
                for s, x2 in tg_succ(x):
                    why = rel.step(x, s, x2, y, ts, y2) or rel.state(x2, y2)
                    if why is None:
                        xs2.add(x2)
                    elif _comparable(s, ts):
                        reasons.append(why)
            if not xs2:
                clause = "state consistency" if any("state" in r or "fact" in r for r in reasons) \
                    else "step consistency"
                detail = reasons[0] if reasons else "no Tamgram step matches"
                res = Counterexample("completeness", clause, detail, path + [ts])
                break
            res = complete(frozenset(xs2), y2, d - 1, path + [ts])
            if res is not None:
                break
        memo_c[key] = res
        return res

    x0, y0 = tg.initial(), ta.initial()
    why = rel.state(x0, y0)
    if why is not None:
        return CorrespondenceResult(False, Counterexample("soundness", "state consistency", why))
    # iterative deepening so that a reported counterexample is a shortest one
    cex = None
    for d in range(1, depth + 1):
        cex = sound(x0, frozenset([y0]), d, [])
        if cex is not None:
            break
    top = depth + 1 if tamarin_depth is None else tamarin_depth
    for d in range(1, top + 1):
        if cex is not None:
            break
        cex = complete(frozenset([x0]), y0, d, [])
    return CorrespondenceResult(cex is None, cex, stats["n"])



def observations(initial, stepper: Callable, depth: int, budget: int = DEFAULT_BUDGET) -> dict:
    """Action-label multisets of all traces with at most ``depth`` steps, each
    mapped to one trace (its steps) producing it."""
    level = {(initial, ()): []}
    seen: dict = {(): []}
    count = 0
    for _ in range(depth):
        nxt: dict = {}
        for (st, obs), path in level.items():
            for step, st2 in stepper(st):
                count += 1
                if count > budget:
                    raise BudgetExceeded(f"state budget of {budget} exceeded")
                obs2 = tuple(sorted(obs + tuple(T.show(a) for a in step.ground.actions)))
                key = (st2, obs2)
                if key not in nxt:
                    nxt[key] = path + [step]
                    seen.setdefault(obs2, path + [step])
        level = nxt
    return seen


def check_observational(g: ProcessGraph, depth: int = 5, u: Optional[Universe] = None,
                        rules: Optional[list] = None,
                        budget: int = DEFAULT_BUDGET) -> CorrespondenceResult:
    """Weaker check used for the cell-by-cell style: both sides reach the same
    multisets of action labels within ``depth`` steps."""
    u = u or default_universe(g)
    rules = rules if rules is not None else translate(g, context_table(g), Style.CELL_BY_CELL)
    tg = Tamgram(g, u)
    ta = Tamarin(rules, u, g.restrictions)
    left = observations(tg.initial(), _memo(tg.step), depth, budget)
    right = observations(ta.initial(), _memo(ta.step), depth, budget)
    for direction, a, b in (("soundness", left, right), ("completeness", right, left)):
        for obs in sorted(set(a) - set(b)):
            detail = "actions {" + ", ".join(obs) + "} are not produced by the other side"
            return CorrespondenceResult(False, Counterexample(direction, "observation",
                                                              detail, a[obs]),
                                        len(left) + len(right))
    return CorrespondenceResult(True, None, len(left) + len(right))

def _comparable(s: Step, ts: Step) -> bool:
    """Whether a mismatch between the two steps explains a failure: both are
    Fresh steps, or both execute the same vertex."""
    if (s.kind == "fresh") != (ts.name == FRESH_NAME):
        return False
    return s.kind == "fresh" or ts.label == s.label


def _memo(fn):
    cache: dict = {}

    def wrapped(x):
        if x not in cache:
            cache[x] = fn(x)
        return cache[x]

    return wrapped


# -- worked example ----------------------------------------------------------

def run_steps(g: ProcessGraph, u: Universe, choose: list) -> Trace:
    """Replay a trace by picking, at each position, the first successor satisfying
    the predicate in ``choose``."""
    tg = Tamgram(g, u)
    states = [tg.initial()]
    steps = []
    for pick in choose:
        for s, st in tg.step(states[-1]):
            if pick(s, st):
                steps.append(s)
                states.append(st)
                break
        else:
            raise ValueError(f"no step at position {len(steps)} satisfies the selector")
    return Trace(tuple(states), tuple(steps))
