"""Seeded generators and brute-force oracles used by the test-suite and demos."""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Optional

from .cellflow import CellFlow, CellUsage

CELLS = ("a", "b", "c")


@dataclass
class RandomCfg:
    usage: dict  # label -> CellUsage
    succ: dict  # label -> tuple of labels
    root: int = 0

    def flow(self) -> CellFlow:
        return CellFlow(usage=self.usage, succ=self.succ)


def random_cfg(rng: random.Random, max_vertices: int = 6, cells=CELLS,
               max_out: int = 2) -> RandomCfg:
    """A graph rooted at 0 whose vertices read, define and undefine random cells.

    Every vertex is reachable from the root: vertex ``i > 0`` always has an edge
    from some earlier vertex, other edges point anywhere (loops included)."""
    n = rng.randint(1, max_vertices)
    usage = {}
    for k in range(n):
        reads = frozenset(c for c in cells if k and rng.random() < 0.2)
        defines = frozenset(c for c in cells if rng.random() < 0.4)
        undefines = frozenset(c for c in cells if c not in defines and rng.random() < 0.1)
        usage[k] = CellUsage(reads, defines, undefines)
    succ: dict = {k: set() for k in range(n)}
    for k in range(1, n):
        succ[rng.randrange(k)].add(k)
    for k in range(n):
        for _ in range(rng.randint(0, max_out)):
            if len(succ[k]) < max_out:
                succ[k].add(rng.randrange(n))
    return RandomCfg(usage, {k: tuple(sorted(v)) for k, v in succ.items()})


def exhaustive_valid(usage: dict, succ: dict, roots, loops: int) -> bool:
    """Depth-first enumeration of every trace in which no label occurs more than
    ``loops + 1`` times; True when none of them reads an undefined cell."""
    bound = loops + 1
    seen = set()

    def go(k, S, counts) -> bool:
        key = (k, S, counts)
        if key in seen:
            return True
        seen.add(key)
        u = usage[k]
        if not u.reads <= S:
            return False
        S2 = (S | u.defines) - u.undefines
        for k2 in succ.get(k, ()):
            c = dict(counts)
            if c.get(k2, 0) >= bound:
                continue
            c[k2] = c.get(k2, 0) + 1
            if not go(k2, S2, tuple(sorted(c.items()))):
                return False
        return True

    return all(go(r, frozenset(), ((r, 1),)) for r in roots)


def random_walk(rng: random.Random, cfg: RandomCfg, max_loops: int = 3,
                max_len: int = 20, start: Optional[int] = None) -> list:
    """A random label sequence along edges with no label repeated more than
    ``max_loops`` extra times."""
    k = rng.choice(sorted(cfg.usage)) if start is None else start
    path = [k]
    counts = {k: 1}
    while len(path) < max_len:
        nxt = [s for s in cfg.succ.get(k, ()) if counts.get(s, 0) <= max_loops]
        if not nxt or rng.random() < 0.15:
            break
        k = rng.choice(nxt)
        counts[k] = counts.get(k, 0) + 1
        path.append(k)
    return path


# -- random programs ---------------------------------------------------------

_CONSTS = ('"p"', '"q"')


def _stmt(rng: random.Random, defined: set, depth: int, in_loop: bool = False) -> list:
    """Source lines of one statement; ``defined`` holds cells defined on every
    path so far and is updated in place.  Loop bodies never undefine a cell, so
    a second iteration sees at least what the first one did."""
    roll = rng.random()
    if depth > 0 and roll < 0.2 and defined:
        c = rng.choice(sorted(defined))
        branches = []
        for lit in _CONSTS[: rng.randint(1, 2)]:
            inner = set(defined)
            body = [f"[ '{c} cas {lit} ]->[]"] + _seq(rng, inner, depth - 1, 1, in_loop)
            branches.append((body, inner))
        if rng.random() < 0.5:
            inner = set(defined)
            branches.append((_seq(rng, inner, depth - 1, 1, in_loop), inner))
        defined &= set.intersection(*(b[1] for b in branches))
        return ["choice {" + "; ".join("{ " + "; ".join(b[0]) + " }" for b in branches) + "}"]
    if depth > 0 and roll < 0.3 and defined:
        c = rng.choice(sorted(defined))
        inner = set(defined)
        then = "; ".join(_seq(rng, inner, depth - 1, 1, in_loop))
        defined &= inner
        return [f"if '{c} cas {rng.choice(_CONSTS)} then {{ {then} }} else {{ []->[] }}"]
    if depth > 0 and roll < 0.38 and defined:
        c = rng.choice(sorted(defined))
        inner = set(defined)
        body = _seq(rng, inner, depth - 1, 1, True)
        return [f"while '{c} cas {rng.choice(_CONSTS)} {{ " + "; ".join(body) + " }"]
    prem, concl = [], []
    if rng.random() < 0.6:
        prem.append("In(x)")
        src = ["x"]
    else:
        src = [rng.choice(_CONSTS)]
    for c in sorted(defined):
        if rng.random() < 0.3:
            src.append(f"'{c}")
    cell = rng.choice(CELLS)
    if cell in defined and not in_loop and rng.random() < 0.25:
        concl.append(f"undef('{cell})")
        defined.discard(cell)
    else:
        concl.append(f"'{cell} := {rng.choice(src)}")
        defined.add(cell)
    if rng.random() < 0.4:
        concl.append(f"Out({rng.choice(src)})")
    return [f"[ {', '.join(prem)} ]->[ {', '.join(concl)} ]"]


def _seq(rng: random.Random, defined: set, depth: int, min_len: int,
         in_loop: bool = False) -> list:
    out = []
    for _ in range(rng.randint(min_len, 3)):
        out += _stmt(rng, defined, depth, in_loop)
    return out


def random_program(rng: random.Random, depth: int = 2, name: str = "R") -> str:
    """Source of a single valid process built from assignments, undefs, choice,
    if/else and while over the cells ``'a 'b 'c``."""
    body = _seq(rng, set(), depth, 1)
    return f"process {name} =\n  " + ";\n  ".join(body) + "\n"
