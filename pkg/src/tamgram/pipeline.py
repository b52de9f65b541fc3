"""Convenience wrappers chaining the compiler stages."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from . import cellflow, cfg, translate
from .binder import FileLoader, FlatSystem, bind
from .syntax import parse_source


def load_system(path, include: Iterable = (), source: Optional[str] = None) -> FlatSystem:
    """Parse and bind a root file; imports are looked up in ``include`` then next
    to the file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8") if source is None else source
    root = parse_source(text, str(path))
    return bind(root, FileLoader([*include, path.parent]))


def load_source(text: str, path: str = "<input>", modules: Optional[dict] = None) -> FlatSystem:
    from .binder import dict_loader

    return bind(parse_source(text, path), dict_loader(modules or {}))


@dataclass
class Compiled:
    flat: FlatSystem
    graph: cfg.ProcessGraph
    table: cellflow.ContextTable
    rules: list
    text: str
    warnings: list = field(default_factory=list)


def analyse(flat: FlatSystem, fuse_skips: bool = False,
            budget: int = cellflow.DEFAULT_BUDGET) -> tuple:
    g = cfg.system_cfg(flat, fuse_skips=fuse_skips)
    return g, cellflow.analyse(g, budget)


def compile_system(flat: FlatSystem, style="hybrid", theory: Optional[str] = None,
                   builtins: Iterable[str] = (), fuse_skips: bool = False,
                   budget: int = cellflow.DEFAULT_BUDGET) -> Compiled:
    g, table = analyse(flat, fuse_skips, budget)
    warnings = list(flat.warnings) + list(g.warnings)
    rules = translate.translate(g, table, style, warnings)
    text = translate.emit_spthy(rules, flat, g, theory, builtins)
    return Compiled(flat, g, table, rules, text, warnings)


def compile_file(path, style="hybrid", include: Iterable = (), **kw) -> Compiled:
    return compile_system(load_system(path, include), style, **kw)
