"""Cell usage, trace validity and maximal context inference.

A CFG trace alternates cell sets and labels: ``S_0, k_0, S_1, k_1, ...`` with
``S_{i+1} = next(S_i, k_i)``.  A trace is valid when every label only reads
cells present in the state before it.  Traces in which no label occurs more
than three times (at most two loops) are enough to decide validity of all
traces, so the checker explores exactly those.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from . import terms as T
from .cfg import ProcessGraph
from .diagnostics import BudgetExceeded, CellflowError, ValidityError

DEFAULT_BUDGET = 10 ** 6
MAX_OCCURRENCES = 3  # two loops


@dataclass(frozen=True)
class CellUsage:
    reads: frozenset = frozenset()
    defines: frozenset = frozenset()
    undefines: frozenset = frozenset()


def cell_usage(rule: T.Rule) -> CellUsage:
    reads: set = set()
    defines: set = set()
    undefines: set = set()
    for t in rule.premise + rule.actions:
        reads |= T.cells_of(t)
    for t in rule.conclusion:
        if isinstance(t, T.Assign):
            defines.add(t.cell)
            reads |= T.cells_of(t.value)
        elif isinstance(t, T.Undef):
            undefines.add(t.cell)
        else:
            reads |= T.cells_of(t)
    both = defines & undefines
    if both:
        c = sorted(both)[0]
        raise CellflowError(f"cell '{c} is both assigned and undefined by one rule", rule.span)
    return CellUsage(frozenset(reads), frozenset(defines), frozenset(undefines))


def next_state(S: Iterable[str], u: CellUsage) -> frozenset:
    return (frozenset(S) | u.defines) - u.undefines


@dataclass(frozen=True)
class CfgTrace:
    """``states`` has one more entry than ``labels``: ``states[i]`` precedes ``labels[i]``."""

    labels: tuple
    states: tuple

    @property
    def initial(self) -> frozenset:
        return self.states[0]

    def steps(self) -> list:
        out: list = [self.states[0]]
        for k, s in zip(self.labels, self.states[1:]):
            out += [k, s]
        return out

    def __len__(self) -> int:
        return len(self.labels)

    def loops(self) -> int:
        counts: dict = {}
        for k in self.labels:
            counts[k] = counts.get(k, 0) + 1
        return max(counts.values(), default=1) - 1

    def show(self) -> str:
        parts = []
        for x in self.steps():
            if isinstance(x, frozenset):
                parts.append("{" + ", ".join("'" + c for c in sorted(x)) + "}")
            else:
                parts.append(str(x))
        return ", ".join(parts)


@dataclass(frozen=True)
class Violation:
    trace: CfgTrace
    position: int
    label: int
    missing: frozenset


@dataclass(frozen=True)
class ContextTable:
    maxR: dict
    maxRA: dict

    def dump(self) -> str:
        lines = []
        for k in sorted(self.maxR):
            r = " ".join("'" + c for c in sorted(self.maxR[k]))
            ra = " ".join("'" + c for c in sorted(self.maxRA[k]))
            lines.append(f"{k}: maxR = {{{r}}} maxRA = {{{ra}}}")
        return "\n".join(lines) + "\n"


class CellFlow:
    """Cell-usage view of a graph; also works on bare ``{label: CellUsage}`` tables."""

    def __init__(self, g: Optional[ProcessGraph] = None, usage: Optional[dict] = None,
                 succ: Optional[dict] = None):
        if g is not None:
            usage = {k: cell_usage(r) for k, r in g.vertices.items()}
            succ = {k: g.succ(k) for k in g.vertices}
        self.usage = usage or {}
        self.succ = {k: tuple(sorted(v)) for k, v in (succ or {}).items()}

    def next_state(self, S, k: int) -> frozenset:
        return next_state(S, self.usage[k])

    def make_trace(self, S0, ids: Sequence[int]) -> CfgTrace:
        states = [frozenset(S0)]
        for i, k in enumerate(ids):
            if k not in self.usage:
                raise CellflowError(f"unknown label {k}")
            if i and k not in self.succ.get(ids[i - 1], ()):
                raise CellflowError(f"labels {ids[i - 1]} and {k} are not connected")
            states.append(self.next_state(states[-1], k))
        return CfgTrace(tuple(ids), tuple(states))

    def trace_valid(self, t: CfgTrace) -> tuple:
        """``(True, None)`` or ``(False, Violation)`` for the first bad read."""
        for i, k in enumerate(t.labels):
            missing = self.usage[k].reads - t.states[i]
            if missing:
                return False, Violation(t, i, k, frozenset(missing))
        return True, None

    def ctx_r(self, t: CfgTrace) -> frozenset:
        if not t.labels:
            raise CellflowError("ctx_r of an empty trace")
        acc: frozenset = frozenset()
        for k in reversed(t.labels):
            u = self.usage[k]
            acc = u.reads | (acc - u.defines)
        return acc

    # -- validity ------------------------------------------------------------

    def first_violation(self, roots: Iterable[int], bound: int = MAX_OCCURRENCES,
                        budget: int = DEFAULT_BUDGET) -> Optional[Violation]:
        """Breadth-first search over every trace from ``roots`` with initial state
        empty and no label occurring more than ``bound`` times.

        Traces sharing label, state and occurrence counts have identical futures,
        so each such configuration is expanded once; ``budget`` caps how many are
        expanded.  The first violation found is a shortest witness."""
        labels = sorted(self.usage)
        index = {k: i for i, k in enumerate(labels)}
        seen = set()
        queue: deque = deque()
        for r in sorted(roots):
            counts = [0] * len(labels)
            counts[index[r]] = 1
            node = (r, frozenset(), tuple(counts))
            seen.add(node)
            queue.append((node, None))
        expanded = 0
        parents: dict = {}
        while queue:
            node, parent = queue.popleft()
            parents[node] = parent
            k, S, counts = node
            expanded += 1
            if expanded > budget:
                raise BudgetExceeded(f"trace budget of {budget} exceeded while checking "
                                     "cell validity")
            missing = self.usage[k].reads - S
            if missing:
                path = []
                n = node
                while n is not None:
                    path.append(n[0])
                    n = parents[n]
                path.reverse()
                t = self.make_trace(frozenset(), path)
                return Violation(t, len(path) - 1, k, frozenset(missing))
            S2 = self.next_state(S, k)
            for k2 in self.succ.get(k, ()):
                i = index[k2]
                if counts[i] >= bound:
                    continue
                c2 = counts[:i] + (counts[i] + 1,) + counts[i + 1:]
                n2 = (k2, S2, c2)
                if n2 not in seen:
                    seen.add(n2)
                    queue.append((n2, node))
        return None

    def reachable_states(self, roots: Iterable[int]) -> set:
        """All ``(label, state)`` pairs of arbitrarily long traces (a fixpoint)."""
        seen = set()
        stack = [(r, frozenset()) for r in roots]
        while stack:
            k, S = stack.pop()
            if (k, S) in seen:
                continue
            seen.add((k, S))
            S2 = self.next_state(S, k)
            stack.extend((k2, S2) for k2 in self.succ.get(k, ()))
        return seen

    # -- contexts ------------------------------------------------------------

    def max_required(self, k: int, budget: int = DEFAULT_BUDGET) -> frozenset:
        """Union of ctx_r over every loop-free trace starting at ``k``."""
        acc: set = set()
        count = 0
        # (label, cells defined so far, labels on the path)
        stack = [(k, frozenset(), frozenset([k]))]
        while stack:
            v, D, onpath = stack.pop()
            count += 1
            if count > budget:
                raise BudgetExceeded(f"trace budget of {budget} exceeded while inferring "
                                     f"the context of label {k}")
            u = self.usage[v]
            acc |= u.reads - D
            D2 = D | u.defines
            for w in self.succ.get(v, ()):
                if w not in onpath:
                    stack.append((w, D2, onpath | {w}))
        return frozenset(acc)

    def context_table(self, budget: int = DEFAULT_BUDGET) -> ContextTable:
        maxR = {k: self.max_required(k, budget) for k in sorted(self.usage)}
        maxRA = {k: frozenset().union(*(maxR[s] for s in self.succ.get(k, ())))
                 for k in sorted(self.usage)}
        return ContextTable(maxR, maxRA)


def check_all_traces_valid(g: ProcessGraph, budget: int = DEFAULT_BUDGET) -> None:
    """Raise :class:`ValidityError` with a shortest witness if some trace reads an
    undefined cell."""
    cf = CellFlow(g)
    v = cf.first_violation(g.entries or g.roots(), MAX_OCCURRENCES, budget)
    if v is None:
        return
    cell = sorted(v.missing)[0]
    rule = g.vertices[v.label]
    proc = g.process_of.get(v.label)
    where = f" in process {proc}" if proc else ""
    raise ValidityError(f"cell '{cell} may be read before it is defined{where}: "
                        f"rule {v.label} {T.show_rule(rule)} on trace {v.trace.show()}",
                        rule.span, witness=v.trace, missing=v.missing, position=v.position)


def context_table(g: ProcessGraph, budget: int = DEFAULT_BUDGET) -> ContextTable:
    return CellFlow(g).context_table(budget)


def analyse(g: ProcessGraph, budget: int = DEFAULT_BUDGET) -> ContextTable:
    check_all_traces_valid(g, budget)
    return context_table(g, budget)
