"""Pretty printer for surface trees; ``parse(pretty(m)) == m`` for every module."""
from __future__ import annotations

from . import ast as A

_INDENT = "  "


def _str(s: str) -> str:
    return '"' + s.replace('"', '\\"') + '"'


def term(t, prec: int = 0) -> str:
    """Render a term; ``prec`` is the binding strength required by the context.

    0 formula, 1 disjunction operand, 2 conjunction operand, 3 atom.
    """
    if isinstance(t, A.Var):
        if t.typed:
            return f"{t.name} : {t.sort}"
        return {"fresh": "~", "public": "$", "temporal": "#"}.get(t.sort, "") + t.name
    if isinstance(t, A.StringLit):
        return _str(t.value)
    if isinstance(t, A.CellRef):
        return "'" + t.name
    if isinstance(t, A.PathRef):
        return ".".join(t.path)
    if isinstance(t, A.App):
        bang = "!" if t.persistent else ""
        return bang + ".".join(t.path) + "(" + ", ".join(arg(a) for a in t.args) + ")"
    if isinstance(t, A.Tuple):
        return "<" + ", ".join(term(i) for i in t.items) + ">"
    if isinstance(t, A.Assign):
        return f"'{t.cell} := {term(t.value)}"
    if isinstance(t, A.AssignPrune):
        return f"'{t.cell} := ."
    if isinstance(t, A.Undef):
        return f"undef('{t.cell})"
    if isinstance(t, A.NamedPattern):
        return f"{term(t.term, 3)} as {t.name}"
    if isinstance(t, A.CellPattern):
        return f"'{t.cell} cas {term(t.term, 3)}"
    if isinstance(t, A.LetIn):
        return _paren(f"{binding(t.binding)} in {term(t.body)}", prec > 0)
    if isinstance(t, A.Quantified):
        vs = " ".join(term(v) for v in t.vars)
        return _paren(f"{t.kind} {vs}. {term(t.body)}", prec > 0)
    if isinstance(t, A.Not):
        return _paren(f"not {term(t.body, 3)}", prec > 2)
    if isinstance(t, A.At):
        return _paren(f"{term(t.fact, 3)} @ {term(t.time, 3)}", prec > 2)
    if isinstance(t, A.BinOp):
        if t.op == "==>":
            return _paren(f"{term(t.left, 1)} ==> {term(t.right, 0)}", prec > 0)
        if t.op == "|":
            return _paren(f"{term(t.left, 1)} | {term(t.right, 2)}", prec > 1)
        if t.op == "&":
            return _paren(f"{term(t.left, 2)} & {term(t.right, 3)}", prec > 2)
        return _paren(f"{term(t.left, 3)} {t.op} {term(t.right, 3)}", prec > 2)
    raise TypeError(f"not a surface term: {t!r}")


def _paren(s: str, yes: bool) -> str:
    return f"({s})" if yes else s


def arg(a: A.Arg) -> str:
    if a.label is None:
        return term(a.value)
    label = ("'" if a.cell_label else "") + a.label
    if isinstance(a.value, A.NamePrune):
        return f"{label} is ."
    if isinstance(a.value, A.CellNamePrune):
        return f"{label} is '."
    return f"{label} is {term(a.value)}"


def params(ps) -> str:
    out = []
    for p in ps:
        marks = ("named " if p.named else "") + ("rw " if p.rw else "")
        out.append(marks + ("'" if p.cell else "") + p.name)
    return "(" + ", ".join(out) + ")"


def binding(b: A.LetBinding) -> str:
    head = f"let {b.name}"
    if b.params is not None:
        head += params(b.params)
        if b.rtype:
            head += f" : {b.rtype}"
    return f"{head} = {term(b.value)}"


def facts(items) -> str:
    return "[" + ", ".join(term(i) for i in items) + "]"


def rule(r: A.RuleExpr) -> str:
    right = "".join(binding(b) + " in " for b in r.r_lets) + facts(r.conclusion)
    if r.actions is None:
        return f"{facts(r.premise)} -> {right}"
    lets = "".join(binding(b) + " in " for b in r.ar_lets)
    return f"{facts(r.premise)} --{lets}{facts(r.actions)}-> {right}"


def cond(c: A.Cond) -> str:
    core = f"'{c.cell} cas {term(c.pattern, 3)}"
    if c.negated:
        return f"not ({core})"
    return f"({core})" if c.parens else core


def process(p, depth: int = 1) -> str:
    pad = _INDENT * depth
    out = []
    while True:
        if isinstance(p, A.Null):
            if not out or out[-1].endswith(" in\n" + pad):
                out.append("0")
            break
        if isinstance(p, (A.Break, A.Continue)):
            kw = "break" if isinstance(p, A.Break) else "continue"
            out.append(kw + (f" {_str(p.label)}" if p.label else ""))
            break
        if isinstance(p, A.ProcLet):
            out.append(binding(p.binding) + " in\n" + pad)
        else:
            out.append(_item(p, depth))
            if not isinstance(p.rest, A.Null):
                out.append(";\n" + pad)
        p = p.rest
    return "".join(out)


def _block(p, depth: int) -> str:
    pad = _INDENT * (depth + 1)
    return "{\n" + pad + process(p, depth + 1) + "\n" + _INDENT * depth + "}"


def _item(p, depth: int) -> str:
    if isinstance(p, A.Step):
        text = rule(p.rule)
        return f"{_str(p.annotation)}: {text}" if p.annotation is not None else text
    if isinstance(p, A.Choice):
        pad = _INDENT * (depth + 1)
        inner = (";\n" + pad).join(_block(b, depth + 1) for b in p.branches)
        return "choice {\n" + pad + inner + "\n" + _INDENT * depth + "}"
    if isinstance(p, A.Scoped):
        return _block(p.body, depth)
    if isinstance(p, A.While):
        lab = f"{_str(p.label)}: " if p.label is not None else ""
        return f"{lab}while {cond(p.cond)} " + _block(p.body, depth)
    if isinstance(p, A.Loop):
        lab = f"{_str(p.label)}: " if p.label is not None else ""
        return f"{lab}loop " + _block(p.body, depth)
    if isinstance(p, A.IfThenElse):
        return (f"if {cond(p.cond)} then " + _block(p.then, depth)
                + " else " + _block(p.orelse, depth))
    if isinstance(p, A.MacroCall):
        return ".".join(p.path) + "(" + ", ".join(arg(a) for a in p.args) + ")"
    raise TypeError(f"not a process: {p!r}")


def decl(d, depth: int = 0) -> str:
    pad = _INDENT * depth
    if isinstance(d, A.LetDecl):
        return pad + binding(d.binding)
    if isinstance(d, A.SymbolDecl):
        bang = "!" if d.persistent else ""
        if d.params is not None:
            return f"{pad}{d.kind} {bang}{d.name}{params(d.params)}"
        return f"{pad}{d.kind} {bang}{d.name}/{d.arity}"
    if isinstance(d, A.SymbolMacro):
        bang = "!" if d.persistent else ""
        return f"{pad}{d.kind} {bang}{d.name}{params(d.params)} = {term(d.body)}"
    if isinstance(d, (A.ProcessDecl, A.ProcessMacro)):
        head = d.name + (params(d.params) if isinstance(d, A.ProcessMacro) else "")
        inner = _INDENT * (depth + 1)
        return f"{pad}process {head} =\n{inner}" + process(d.body, depth + 1)
    if isinstance(d, A.Module):
        return f"{pad}module {d.name} = " + _decl_block(d.decls, depth)
    if isinstance(d, A.ModuleAlias):
        return f"{pad}module {d.name} = " + ".".join(d.path)
    if isinstance(d, A.Import):
        return f"{pad}import {d.name}"
    if isinstance(d, (A.Open, A.Include)):
        kw = "open" if isinstance(d, A.Open) else "include"
        text = f"{pad}{kw} " + ".".join(d.path)
        if d.decls is not None:
            text += " " + _decl_block(d.decls, depth)
        return text
    if isinstance(d, (A.Formula, A.Verbatim)):
        head = f"{pad}{d.kind} {d.name}"
        if d.attrs is not None:
            head += f" [{d.attrs}]"
        trace = f"{d.trace_kind} " if d.trace_kind else ""
        if isinstance(d, A.Verbatim):
            return f"{head}: {trace}{_str(d.text)}"
        return f"{head} = {trace}{term(d.body)}"
    raise TypeError(f"not a declaration: {d!r}")


def _decl_block(decls, depth: int) -> str:
    if not decls:
        return "{ }"
    body = "\n\n".join(decl(d, depth + 1) for d in decls)
    return "{\n" + body + "\n" + _INDENT * depth + "}"


def pretty(m: A.SourceModule) -> str:
    return "".join(decl(d) + "\n\n" for d in m.decls).rstrip("\n") + ("\n" if m.decls else "")
