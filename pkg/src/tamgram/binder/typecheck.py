"""Type checking of flat systems.

Types are plain strings (``bits``, ``temporal``, ``cell``, ``fact``,
``afact``, ``statement``, ``patmatch``, ``formula``) plus :class:`Arrow` for
symbols.  Cells coerce to ``bits`` wherever a value is expected.
"""
from __future__ import annotations

from dataclasses import dataclass

from .. import terms as T
from ..diagnostics import Diagnostic, TypeCheckError
from ..syntax.lexer import RESERVED_SYMBOLS
from .symbols import FlatSystem

RESERVED_VAR_PREFIX = "tgc_"
SEM_TYPES = ("bits", "temporal", "cell", "fact", "afact", "statement", "patmatch",
             "formula", "ruleL'", "ruleA'", "ruleR'", "ruleR", "ruleAR", "rule", "process")
_RESULT = {"fun": "bits", "pred": "fact", "apred": "afact"}
_VALUE = ("bits", "cell")


@dataclass(frozen=True)
class Arrow:
    args: tuple
    result: str

    def __str__(self) -> str:
        dom = " x ".join(self.args) if self.args else "()"
        return f"{dom} -> {self.result}"


class _Fail(Exception):
    def __init__(self, message, span):
        self.message = message
        self.span = span


def symbol_type(info) -> Arrow:
    return Arrow(("bits",) * info.arity, _RESULT[info.kind])


def infer(t: T.Term, symbols: dict) -> str:
    """Return the type of ``t`` or raise ``_Fail``."""
    sp = getattr(t, "span", None)
    if isinstance(t, (T.Str, T.Fresh)):
        return "bits"
    if isinstance(t, T.Var):
        return "temporal" if t.sort == "temporal" else "bits"
    if isinstance(t, T.Cell):
        return "cell"
    if isinstance(t, T.Tuple):
        for i in t.items:
            _value(i, symbols, "tuple component")
        return "bits"
    if isinstance(t, T.App):
        info = symbols.get(t.name)
        if info is None:
            raise _Fail(f"unknown symbol '{t.name}'", sp)
        if t.name in RESERVED_SYMBOLS:
            raise _Fail(f"'{t.name}' is a reserved symbol", sp)
        ty = symbol_type(info)
        if len(t.args) != len(ty.args):
            raise _Fail(f"'{t.name}' has type {ty} and expects {len(ty.args)} argument(s), "
                        f"got {len(t.args)}", sp)
        for a in t.args:
            _value(a, symbols, f"argument of '{t.name}'")
        if t.persistent and info.kind != "pred":
            raise _Fail(f"only predicates can be persistent, '{t.name}' is a {info.kind}", sp)
        if info.kind == "pred" and t.persistent != info.persistent:
            want = f"!{t.name}(...)" if info.persistent else f"{t.name}(...)"
            raise _Fail(f"'{t.name}' is declared {'persistent' if info.persistent else 'linear'}; "
                        f"write {want}", sp)
        return ty.result
    if isinstance(t, T.Assign):
        _value(t.value, symbols, f"value assigned to '{t.cell}")
        return "statement"
    if isinstance(t, T.Undef):
        return "statement"
    if isinstance(t, T.Cas):
        _value(t.pattern, symbols, "cas pattern")
        return "patmatch"
    if isinstance(t, T.As):
        return _value(t.term, symbols, "'as' pattern")
    if isinstance(t, T.At):
        _expect(t.fact, "afact", symbols, "left of '@'")
        _expect(t.time, "temporal", symbols, "right of '@'")
        return "formula"
    if isinstance(t, T.BinF):
        if t.op in ("&", "|", "==>"):
            _expect(t.left, "formula", symbols, f"operand of '{t.op}'")
            _expect(t.right, "formula", symbols, f"operand of '{t.op}'")
        elif t.op == "=":
            _value(t.left, symbols, "operand of '='")
            _value(t.right, symbols, "operand of '='")
        elif t.op == "<":
            _expect(t.left, "temporal", symbols, "operand of '<'")
            _expect(t.right, "temporal", symbols, "operand of '<'")
        else:
            raise _Fail(f"unknown operator '{t.op}'", sp)
        return "formula"
    if isinstance(t, T.Not):
        _expect(t.body, "formula", symbols, "operand of 'not'")
        return "formula"
    if isinstance(t, T.Quant):
        for v in t.vars:
            if v.sort not in ("bits", "temporal", "fresh", "public"):
                raise _Fail(f"quantified variable '{v.name}' has sort {v.sort}", sp)
        _expect(t.body, "formula", symbols, f"body of '{t.kind}'")
        return "formula"
    raise _Fail(f"not a term: {t!r}", sp)


def _value(t, symbols, where: str) -> str:
    ty = infer(t, symbols)
    if ty not in _VALUE:
        raise _Fail(f"expected bits for {where}, got {ty}", getattr(t, "span", None))
    return "bits"


def _expect(t, want: str, symbols, where: str) -> None:
    ty = infer(t, symbols)
    if ty == "cell" and want == "bits":
        return
    if ty != want:
        raise _Fail(f"expected {want} for {where}, got {ty}", getattr(t, "span", None))


def check_macro_result(t: T.Term, rtype: str, symbols: dict, name: str, span) -> None:
    from ..diagnostics import ExpandError

    want = "bits" if rtype == "bitstring" else rtype
    if want not in SEM_TYPES:
        raise ExpandError(f"unknown type '{rtype}' in signature of '{name}'", span)
    try:
        ty = infer(t, symbols)
    except _Fail as e:
        raise TypeCheckError(e.message, e.span or span)
    if ty == "cell" and want == "bits":
        return
    if ty != want:
        raise TypeCheckError(f"macro '{name}' is declared to produce {want} but its body "
                             f"has type {ty}", span)


# -- rules -------------------------------------------------------------------

def _item_types(items, symbols, allowed, field_name):
    for t in items:
        ty = infer(t, symbols)
        if ty not in allowed:
            raise _Fail(f"expected {' or '.join(allowed)} in {field_name}, got {ty}",
                        getattr(t, "span", None))


def rule_vars(items) -> set:
    out = set()
    for t in items:
        out |= T.vars_of(t)
    return out


def check_rule(rule: T.Rule, symbols: dict) -> None:
    """ruleL' / ruleA' / ruleR' judgments plus rule-level wellformedness."""
    _item_types(rule.premise, symbols, ("fact", "patmatch"), "the premise")
    _item_types(rule.actions, symbols, ("afact",), "the actions")
    _item_types(rule.conclusion, symbols, ("fact", "statement"), "the conclusion")
    for t in rule.premise:
        if isinstance(t, T.App) and t.name == "Out":
            raise _Fail("Out may not appear in a premise", t.span)
    for t in rule.conclusion:
        if isinstance(t, T.App) and t.name in ("In", "Fr"):
            raise _Fail(f"{t.name} may not appear in a conclusion", t.span)

    written: dict = {}
    for t in rule.conclusion:
        if isinstance(t, (T.Assign, T.Undef)):
            if t.cell == "pid":
                raise _Fail("cell 'pid is read-only", t.span)
            if t.cell in written:
                raise _Fail(f"cell '{t.cell} is written twice in one rule", t.span)
            written[t.cell] = t
    matched = set()
    for t in rule.premise:
        if isinstance(t, T.Cas):
            if t.cell in matched:
                raise _Fail(f"cell '{t.cell} is matched twice in one premise", t.span)
            matched.add(t.cell)

    allv = rule_vars(T.rule_terms(rule))
    sorts: dict = {}
    for v in allv:
        if v.name.startswith(RESERVED_VAR_PREFIX):
            raise _Fail(f"variable '{v.name}' uses the reserved prefix '{RESERVED_VAR_PREFIX}'",
                        v.span)
        if v.sort == "temporal":
            raise _Fail(f"temporal variable '#{v.name}' cannot appear in a rule", v.span)
        sorts.setdefault(v.name, set()).add(v.sort)
    for name, ss in sorted(sorts.items()):
        if len(ss) > 1:
            raise _Fail(f"variable '{name}' is used with different sorts: "
                        + ", ".join(sorted(ss)), rule.span)
    bound = rule_vars(rule.premise)
    for v in sorted(rule_vars(rule.actions + rule.conclusion), key=lambda v: v.name):
        if v.sort == "public":
            continue
        if v not in bound:
            raise _Fail(f"variable '{_show_var(v)}' in actions/conclusion is not bound by "
                        "the premise", v.span or rule.span)


def _show_var(v: T.Var) -> str:
    return T.show(T.Var(v.name, v.sort))


def check_cond(c: T.Cond, symbols: dict) -> None:
    if c.cell == "pid":
        return _value(c.pattern, symbols, "cas pattern")
    _value(c.pattern, symbols, "cas pattern")
    for v in T.vars_of(c.pattern):
        if v.name.startswith(RESERVED_VAR_PREFIX):
            raise _Fail(f"variable '{v.name}' uses the reserved prefix", v.span)


def check_process(p, symbols: dict, diags: list) -> None:
    stack = [p]
    while stack:
        n = stack.pop()
        try:
            if isinstance(n, T.Step):
                check_rule(n.rule, symbols)
            elif isinstance(n, (T.While, T.If)):
                check_cond(n.cond, symbols)
        except _Fail as e:
            diags.append(Diagnostic(e.message, e.span))
        for f in ("rest", "body", "then", "orelse"):
            if hasattr(n, f):
                stack.append(getattr(n, f))
        if isinstance(n, T.Choice):
            stack.extend(n.branches)


def check_formula(f, symbols: dict) -> None:
    ty = infer(f, symbols)
    if ty != "formula":
        raise _Fail(f"expected formula, got {ty}", getattr(f, "span", None))
    free = [v for v in T.vars_of(f) if v.sort != "public"]
    if free:
        v = sorted(free, key=lambda v: v.name)[0]
        raise _Fail(f"free variable '{v.name}' in formula", v.span or f.span)


def typecheck(flat: FlatSystem) -> FlatSystem:
    diags: list = []
    for name, info in sorted(flat.symbols.items()):
        if info.name in RESERVED_SYMBOLS or info.qname.split(".")[-1] in RESERVED_SYMBOLS:
            diags.append(Diagnostic(f"'{info.qname.split('.')[-1]}' is a reserved symbol",
                                    info.span))
    for p in flat.processes:
        check_process(p.body, flat.symbols, diags)
    for pt in flat.passthrough:
        if pt.formula is None:
            continue
        try:
            check_formula(pt.formula, flat.symbols)
        except _Fail as e:
            diags.append(Diagnostic(f"in {pt.kind} {pt.name}: {e.message}", e.span or pt.span))
    if diags:
        raise TypeCheckError(diags[0].message, diags[0].span, diags)
    return flat
