"""Name resolution, macro expansion and type checking."""
from __future__ import annotations

from typing import Optional

from ..syntax import ast as A
from .expand import expand_macros
from .resolve import FileLoader, dict_loader, resolve_modules
from .symbols import FlatSystem, Passthrough, ProcessDef, SymbolInfo
from .typecheck import typecheck


def bind(root: A.SourceModule, loader=None) -> FlatSystem:
    """Resolve, expand and type check ``root``."""
    return typecheck(expand_macros(resolve_modules(root, loader)))


__all__ = ["bind", "resolve_modules", "expand_macros", "typecheck", "FileLoader",
           "dict_loader", "FlatSystem", "ProcessDef", "SymbolInfo", "Passthrough"]
