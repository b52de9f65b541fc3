"""Recursive-descent parser producing :mod:`tamgram.syntax.ast` trees.

Errors are collected per declaration: after the first error inside a
declaration the parser skips to the next ``;``/``}`` boundary or declaration
keyword and carries on, so one run reports every broken declaration.
"""
from __future__ import annotations

from pathlib import Path
from typing import Optional

from ..diagnostics import Diagnostic, ParseError, Span
from . import ast as A
from .lexer import Kind, Token, string_value, tokenize

SORT_NAMES = ("bits", "bitstring", "fresh", "public", "temporal")

_DECL_START = {"process", "fun", "pred", "apred", "module", "import", "open",
               "include", "restriction", "lemma", "let"}

_FUSED = {
    "]-->[": ("]", "-->", "["),
    "]->[": ("]", "->", "["),
    "]--[": ("]", "--", "["),
    "]-[": ("]", "-", "["),
    "]-->": ("]", "-->"),
    "]->": ("]", "->"),
    "]--": ("]", "--"),
    "]-": ("]", "-"),
    "--[": ("--", "["),
    "-[": ("-", "["),
}


def split_fused(tokens: list[Token]) -> list[Token]:
    out = []
    for t in tokens:
        parts = _FUSED.get(t.text) if t.kind is Kind.PUNCT else None
        if not parts:
            out.append(t)
            continue
        off = 0
        for p in parts:
            s = t.span
            out.append(Token(Kind.PUNCT, p, Span(s.start + off, s.start + off + len(p),
                                                 s.line, s.col + off, s.path)))
            off += len(p)
    return out


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = split_fused(tokens)
        self.i = 0
        self.diags: list[Diagnostic] = []

    # -- token helpers -------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        j = min(self.i + k, len(self.toks) - 1)
        return self.toks[j]

    def at(self, *texts: str) -> bool:
        return any(self.tok.is_(t) for t in texts)

    def next(self) -> Token:
        t = self.tok
        if t.kind is not Kind.EOF:
            self.i += 1
        return t

    def accept(self, text: str) -> Optional[Token]:
        if self.tok.is_(text):
            return self.next()
        return None

    def fail(self, expected) -> None:
        t = self.tok
        what = "end of input" if t.kind is Kind.EOF else repr(t.text)
        if isinstance(expected, str):
            expected = [expected]
        msg = f"unexpected {what}, expected " + (
            expected[0] if len(expected) == 1 else "one of: " + ", ".join(expected))
        raise ParseError(msg, t.span)

    def expect(self, text: str) -> Token:
        if not self.tok.is_(text):
            self.fail(repr(text))
        return self.next()

    def expect_kind(self, kind: Kind, what: str) -> Token:
        if self.tok.kind is not kind:
            self.fail(what)
        return self.next()

    def span_from(self, start: Span) -> Span:
        prev = self.toks[max(self.i - 1, 0)]
        return start.cover(prev.span)

    def name(self) -> Token:
        return self.expect_kind(Kind.IDENT, "identifier")

    # -- declarations --------------------------------------------------------

    def parse_decls(self, until_brace: bool) -> tuple:
        decls = []
        while True:
            if self.tok.kind is Kind.EOF:
                if until_brace:
                    self.diags.append(Diagnostic("unclosed '{'", self.tok.span))
                break
            if until_brace and self.at("}"):
                break
            start = self.i
            try:
                decls.append(self.parse_decl())
            except ParseError as e:
                self.diags.extend(e.diagnostics)
                self.recover(start)
        return tuple(decls)

    def recover(self, start: int) -> None:
        if self.i == start:
            self.next()
        depth = 0
        while self.tok.kind is not Kind.EOF:
            t = self.tok
            if t.is_("{"):
                depth += 1
            elif t.is_("}"):
                if depth == 0:
                    return
                depth -= 1
                if depth == 0:
                    self.next()
                    return
            elif t.is_(";") and depth == 0:
                self.next()
                return
            elif depth == 0 and t.kind is Kind.KEYWORD and t.text in _DECL_START:
                return
            self.next()

    def parse_decl(self):
        t = self.tok
        if t.is_("let"):
            b = self.parse_binding()
            return A.LetDecl(b, span=b.span)
        if t.is_("fun") or t.is_("pred") or t.is_("apred"):
            return self.parse_symbol()
        if t.is_("process"):
            return self.parse_process_decl()
        if t.is_("module"):
            self.next()
            name = self.name().text
            if self.accept("="):
                if self.at("{"):
                    decls = self.braced_decls()
                    return A.Module(name, decls, span=self.span_from(t.span))
                path = self.parse_path()
                return A.ModuleAlias(name, path, span=self.span_from(t.span))
            decls = self.braced_decls()
            return A.Module(name, decls, span=self.span_from(t.span))
        if t.is_("import"):
            self.next()
            return A.Import(self.name().text, span=self.span_from(t.span))
        if t.is_("open") or t.is_("include"):
            self.next()
            path = self.parse_path()
            decls = self.braced_decls() if self.at("{") else None
            cls = A.Open if t.text == "open" else A.Include
            return cls(path, decls, span=self.span_from(t.span))
        if t.is_("restriction") or t.is_("lemma"):
            return self.parse_formula_decl()
        self.fail(["declaration (let, fun, pred, apred, process, module, import, "
                   "open, include, restriction, lemma)"])

    def braced_decls(self) -> tuple:
        self.expect("{")
        decls = self.parse_decls(until_brace=True)
        if self.at("}"):
            self.next()
        return decls

    def parse_path(self) -> tuple:
        parts = [self.name().text]
        while self.at(".") and self.peek().kind is Kind.IDENT:
            self.next()
            parts.append(self.next().text)
        return tuple(parts)

    def parse_symbol(self):
        t = self.next()
        persistent = bool(self.accept("!"))
        name = self.name().text
        if self.accept("/"):
            n = self.expect_kind(Kind.NUMBER, "arity")
            return A.SymbolDecl(t.text, name, int(n.text), None, persistent,
                                span=self.span_from(t.span))
        params = self.parse_params(allow_rw=False)
        if self.accept("="):
            body = self.parse_term()
            return A.SymbolMacro(t.text, name, params, body, persistent,
                                 span=self.span_from(t.span))
        return A.SymbolDecl(t.text, name, len(params), params, persistent,
                            span=self.span_from(t.span))

    def parse_params(self, allow_rw: bool) -> tuple:
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                start = self.tok.span
                named = rw = False
                while self.at("named", "rw"):
                    m = self.next()
                    if m.text == "named":
                        named = True
                    elif not allow_rw:
                        raise ParseError("'rw' is only allowed on process macro parameters",
                                         m.span)
                    else:
                        rw = True
                if self.tok.kind is Kind.CELL:
                    if not allow_rw:
                        raise ParseError("cell parameters are only allowed on process macros",
                                         self.tok.span)
                    params.append(A.Param(self.next().text[1:], named, rw, True,
                                          span=self.span_from(start)))
                else:
                    if rw:
                        raise ParseError("'rw' applies only to cell parameters", self.tok.span)
                    params.append(A.Param(self.name().text, named, False, False,
                                          span=self.span_from(start)))
                if not self.accept(","):
                    break
        self.expect(")")
        if len({p.named for p in params}) > 1:
            raise ParseError("mixing named and positional parameters", params[0].span)
        return tuple(params)

    def parse_process_decl(self):
        t = self.next()
        name = self.name().text
        if self.at("("):
            params = self.parse_params(allow_rw=True)
            self.expect("=")
            body = self.parse_process(top=True)
            return A.ProcessMacro(name, params, body, span=self.span_from(t.span))
        self.expect("=")
        body = self.parse_process(top=True)
        return A.ProcessDecl(name, body, span=self.span_from(t.span))

    def parse_formula_decl(self):
        t = self.next()
        name = self.name().text
        attrs = None
        if self.at("["):
            lb = self.next()
            depth = 1
            while depth:
                if self.tok.kind is Kind.EOF:
                    raise ParseError("unclosed '['", lb.span)
                if self.at("["):
                    depth += 1
                elif self.at("]"):
                    depth -= 1
                self.next()
            src_start = lb.span.end
            src_end = self.toks[self.i - 1].span.start
            attrs = self._source[src_start:src_end].strip() if self._source else ""
        if self.accept(":"):
            trace = self.parse_trace_kind()
            s = self.expect_kind(Kind.STRING, "quoted formula")
            return A.Verbatim(t.text, name, string_value(s), attrs, trace,
                              span=self.span_from(t.span))
        self.expect("=")
        trace = self.parse_trace_kind()
        if self.tok.kind is Kind.STRING:
            s = self.next()
            return A.Verbatim(t.text, name, string_value(s), attrs, trace,
                              span=self.span_from(t.span))
        body = self.parse_formula()
        return A.Formula(t.text, name, body, attrs, trace, span=self.span_from(t.span))

    _source: Optional[str] = None

    def parse_trace_kind(self) -> Optional[str]:
        t = self.tok
        if (t.kind is Kind.IDENT and t.text in ("exists", "all") and self.peek().is_("-")
                and self.peek(2).kind is Kind.IDENT):
            word = self.peek(2).text
            if (t.text, word) in (("exists", "trace"), ("all", "traces")):
                self.i += 3
                return f"{t.text}-{word}"
        return None

    # -- let bindings --------------------------------------------------------

    def parse_binding(self) -> A.LetBinding:
        t = self.expect("let")
        name = self.name().text
        params = rtype = None
        if self.at("("):
            params = self.parse_params(allow_rw=False)
            if self.accept(":"):
                rtype = self.name().text
        self.expect("=")
        value = self.parse_term()
        return A.LetBinding(name, value, params, rtype, span=self.span_from(t.span))

    # -- processes -----------------------------------------------------------

    def parse_process(self, top: bool = False):
        """Parse ``item ; item ; ...`` and fold it into a continuation chain."""
        items = []
        while True:
            if self.at("}") or self.tok.kind is Kind.EOF:
                break
            if top and self.tok.kind is Kind.KEYWORD and self.tok.text in _DECL_START - {"let"}:
                break
            if self.at("let"):
                save = self.i
                try:
                    b = self.parse_binding()
                except ParseError:
                    if top:
                        self.i = save
                        break
                    raise
                if not self.at("in"):
                    if top:
                        self.i = save
                        break
                    self.fail("'in'")
                self.next()
                items.append(("let", b))
                continue
            items.append(self.parse_item())
            if not self.accept(";"):
                break
        return self.fold(items)

    def fold(self, items):
        rest = A.Null()
        for idx in range(len(items) - 1, -1, -1):
            kind, node = items[idx]
            if kind == "term" and idx != len(items) - 1:
                raise ParseError(f"'{_describe(node)}' must be the last item of its block",
                                 node.span)
            if kind == "term":
                rest = node
            elif kind == "let":
                rest = A.ProcLet(node, rest, span=node.span)
            else:
                rest = node(rest)
        return rest

    def parse_item(self):
        t = self.tok
        if t.kind is Kind.NUMBER and t.text == "0":
            self.next()
            return ("term", A.Null(span=t.span))
        if t.kind is Kind.ANNOTATION:
            self.next()
            self.expect(":")
            anno = string_value(t)
            if self.at("while", "loop"):
                return self.parse_loop(t.span, anno)
            rule = self.parse_rule()
            return ("seq", lambda rest: A.Step(rule, rest, anno, span=t.span.cover(rule.span)))
        if t.is_("["):
            rule = self.parse_rule()
            return ("seq", lambda rest: A.Step(rule, rest, None, span=rule.span))
        if t.is_("choice"):
            self.next()
            self.expect("{")
            branches = []
            while not self.at("}"):
                branches.append(self.parse_scoped())
                if not (self.accept(";") or self.accept(",")):
                    break
            self.expect("}")
            sp = self.span_from(t.span)
            bs = tuple(branches)
            return ("seq", lambda rest: A.Choice(bs, rest, span=sp))
        if t.is_("{"):
            body = self.parse_scoped()
            sp = self.span_from(t.span)
            return ("seq", lambda rest: A.Scoped(body, rest, span=sp))
        if t.is_("while") or t.is_("loop"):
            return self.parse_loop(t.span, None)
        if t.is_("if"):
            self.next()
            cond = self.parse_cond()
            self.expect("then")
            then = self.parse_scoped()
            self.expect("else")
            orelse = self.parse_scoped()
            sp = self.span_from(t.span)
            return ("seq", lambda rest: A.IfThenElse(cond, then, orelse, rest, span=sp))
        if t.is_("break") or t.is_("continue"):
            self.next()
            label = string_value(self.next()) if self.tok.kind is Kind.STRING else None
            cls = A.Break if t.text == "break" else A.Continue
            return ("term", cls(label, span=self.span_from(t.span)))
        if t.kind is Kind.IDENT:
            path = self.parse_path()
            args = self.parse_args()
            sp = self.span_from(t.span)
            return ("seq", lambda rest: A.MacroCall(path, args, rest, span=sp))
        self.fail(["rule", "annotation", "choice", "'{'", "while", "loop", "if",
                   "break", "continue", "let", "process macro call", "'0'"])

    def parse_loop(self, start: Span, label):
        kw = self.next()
        cond = self.parse_cond() if kw.text == "while" else None
        body = self.parse_scoped()
        sp = self.span_from(start)
        if kw.text == "while":
            return ("seq", lambda rest: A.While(cond, body, rest, label, span=sp))
        return ("seq", lambda rest: A.Loop(body, rest, label, span=sp))

    def parse_scoped(self):
        self.expect("{")
        body = self.parse_process()
        if not self.at("}"):
            self.fail(["';'", "'}'"])
        self.next()
        return body

    def parse_cond(self) -> A.Cond:
        t = self.tok
        negated = bool(self.accept("not"))
        parens = bool(self.accept("("))
        if negated and not parens:
            self.fail("'('")
        c = self.expect_kind(Kind.CELL, "cell")
        self.expect("cas")
        pat = self.parse_pattern()
        if parens:
            self.expect(")")
        return A.Cond(c.text[1:], pat, negated, parens, span=self.span_from(t.span))

    # -- rules ---------------------------------------------------------------

    def parse_rule(self) -> A.RuleExpr:
        start = self.tok.span
        premise = self.parse_fact_list()
        if self.accept("->") or self.accept("-->"):
            r_lets, concl = self.parse_rule_r()
            return A.RuleExpr(premise, None, concl, (), r_lets, span=self.span_from(start))
        if self.accept("-") or self.accept("--"):
            ar_lets = []
            while self.at("let"):
                ar_lets.append(self.parse_binding())
                self.expect("in")
            actions = self.parse_fact_list()
            self.expect("->")
            r_lets, concl = self.parse_rule_r()
            return A.RuleExpr(premise, actions, concl, tuple(ar_lets), r_lets,
                              span=self.span_from(start))
        self.fail(["'->'", "'-->'", "'--['"])

    def parse_rule_r(self):
        lets = []
        while self.at("let"):
            lets.append(self.parse_binding())
            self.expect("in")
        return tuple(lets), self.parse_fact_list()

    def parse_fact_list(self) -> tuple:
        self.expect("[")
        items = []
        if not self.at("]"):
            while True:
                items.append(self.parse_item_term())
                if not self.accept(","):
                    break
        self.expect("]")
        return tuple(items)

    # -- terms ---------------------------------------------------------------

    def parse_item_term(self):
        """A rule field item: statement, cell pattern, or term."""
        t = self.tok
        if t.kind is Kind.CELL and self.peek().is_(":="):
            self.next()
            self.next()
            if self.at("."):
                self.next()
                return A.AssignPrune(t.text[1:], span=self.span_from(t.span))
            value = self.parse_term()
            return A.Assign(t.text[1:], value, span=self.span_from(t.span))
        if t.kind is Kind.CELL and self.peek().is_("cas"):
            self.next()
            self.next()
            pat = self.parse_pattern()
            return A.CellPattern(t.text[1:], pat, span=self.span_from(t.span))
        return self.parse_term()

    def parse_term(self):
        return self.parse_formula()

    def parse_formula(self):
        left = self.parse_disj()
        if self.at("==>"):
            self.next()
            right = self.parse_formula()
            return A.BinOp("==>", left, right, span=_cover(left, right))
        return left

    def parse_disj(self):
        left = self.parse_conj()
        while self.at("|"):
            self.next()
            right = self.parse_conj()
            left = A.BinOp("|", left, right, span=_cover(left, right))
        return left

    def parse_conj(self):
        left = self.parse_unary()
        while self.at("&"):
            self.next()
            right = self.parse_unary()
            left = A.BinOp("&", left, right, span=_cover(left, right))
        return left

    def parse_unary(self):
        t = self.tok
        if t.is_("not"):
            self.next()
            body = self.parse_unary()
            return A.Not(body, span=self.span_from(t.span))
        if t.is_("All") or t.is_("Ex"):
            self.next()
            vs = []
            while not self.at("."):
                vt = self.tok
                if self.accept("#"):
                    vs.append(A.Var(self.name().text, "temporal", span=self.span_from(vt.span)))
                elif self.tok.kind is Kind.IDENT:
                    vs.append(A.Var(self.next().text, span=vt.span))
                else:
                    self.fail(["variable", "'.'"])
            if not vs:
                self.fail("quantified variable")
            self.expect(".")
            body = self.parse_formula()
            return A.Quantified(t.text, tuple(vs), body, span=self.span_from(t.span))
        return self.parse_atom()

    def parse_atom(self):
        left = self.parse_pattern()
        if self.at("@"):
            self.next()
            time = self.parse_primary()
            return A.At(left, time, span=_cover(left, time))
        if self.at("=") or self.at("<"):
            op = self.next().text
            right = self.parse_pattern()
            return A.BinOp(op, left, right, span=_cover(left, right))
        return left

    def parse_pattern(self):
        term = self.parse_primary()
        while self.at("as"):
            self.next()
            n = self.name()
            term = A.NamedPattern(term, n.text, span=term.span.cover(n.span) if term.span else n.span)
        return term

    def parse_primary(self):
        t = self.tok
        k = t.kind
        if t.is_("("):
            self.next()
            inner = self.parse_formula()
            self.expect(")")
            return inner
        if t.is_("<"):
            self.next()
            items = [self.parse_term()]
            while self.accept(","):
                items.append(self.parse_term())
            self.expect(">")
            if len(items) < 2:
                raise ParseError("a tuple needs at least two components", t.span)
            return A.Tuple(tuple(items), span=self.span_from(t.span))
        if k is Kind.STRING:
            self.next()
            return A.StringLit(string_value(t), span=t.span)
        if k is Kind.CELL:
            self.next()
            return A.CellRef(t.text[1:], span=t.span)
        if k is Kind.PUBLIC:
            self.next()
            return A.Var(t.text[1:], "public", span=t.span)
        if k is Kind.FRESH:
            self.next()
            n = self.name()
            return A.Var(n.text, "fresh", span=t.span.cover(n.span))
        if t.is_("#"):
            self.next()
            n = self.name()
            return A.Var(n.text, "temporal", span=t.span.cover(n.span))
        if t.is_("undef"):
            self.next()
            self.expect("(")
            c = self.expect_kind(Kind.CELL, "cell")
            self.expect(")")
            return A.Undef(c.text[1:], span=self.span_from(t.span))
        if t.is_("let"):
            b = self.parse_binding()
            self.expect("in")
            body = self.parse_term()
            return A.LetIn(b, body, span=self.span_from(t.span))
        if t.is_("!"):
            self.next()
            path = self.parse_path_any()
            args = self.parse_args()
            return A.App(path, args, True, span=self.span_from(t.span))
        if k is Kind.IDENT or (k is Kind.KEYWORD and t.text in ("In", "Out", "Fr")):
            path = self.parse_path_any()
            if self.at("("):
                args = self.parse_args()
                return A.App(path, args, False, span=self.span_from(t.span))
            if len(path) == 1 and self.at(":") and self.peek().kind is Kind.IDENT \
                    and self.peek().text in SORT_NAMES:
                self.next()
                sort = self.next().text
                sort = "bits" if sort == "bitstring" else sort
                return A.Var(path[0], sort, True, span=self.span_from(t.span))
            if len(path) == 1:
                return A.Var(path[0], span=t.span)
            return A.PathRef(path, span=self.span_from(t.span))
        self.fail(["term"])

    def parse_path_any(self) -> tuple:
        t = self.next()
        if t.kind not in (Kind.IDENT, Kind.KEYWORD):
            raise ParseError("expected a name", t.span)
        parts = [t.text]
        while self.at(".") and self.peek().kind is Kind.IDENT:
            self.next()
            parts.append(self.next().text)
        return tuple(parts)

    def parse_args(self) -> tuple:
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                args.append(self.parse_arg())
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(args)

    def parse_arg(self) -> A.Arg:
        t = self.tok
        if t.kind in (Kind.IDENT, Kind.CELL) and self.peek().is_("is"):
            self.next()
            self.next()
            cell = t.kind is Kind.CELL
            label = t.text[1:] if cell else t.text
            if self.at("'."):
                self.next()
                value = A.CellNamePrune(span=self.toks[self.i - 1].span)
            elif self.at("."):
                self.next()
                value = A.NamePrune(span=self.toks[self.i - 1].span)
            else:
                value = self.parse_term()
            return A.Arg(label, value, cell, span=self.span_from(t.span))
        value = self.parse_term()
        return A.Arg(None, value, span=value.span)


def _cover(a, b) -> Optional[Span]:
    if a.span is None:
        return b.span
    return a.span.cover(b.span)


def _describe(node) -> str:
    return {A.Null: "0", A.Break: "break", A.Continue: "continue"}[type(node)]


def module_name_for(path: str) -> str:
    stem = Path(path).stem
    return stem[:1].upper() + stem[1:]


def parse_module(tokens: list[Token], name: str, source: Optional[str] = None,
                 path: str = "<input>") -> A.SourceModule:
    p = Parser(tokens)
    p._source = source
    decls = p.parse_decls(until_brace=False)
    if p.diags:
        raise ParseError(p.diags[0].message, p.diags[0].span, p.diags)
    return A.SourceModule(name, decls, path)


def parse_source(source: str, path: str = "<input>", name: Optional[str] = None) -> A.SourceModule:
    toks = tokenize(source, path)
    if name is None:
        name = module_name_for(path) if path != "<input>" else "Main"
    return parse_module(toks, name, source, path)
