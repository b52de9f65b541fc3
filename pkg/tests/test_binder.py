from __future__ import annotations

import pytest

from conftest import CORPUS, src_system
from tamgram import terms as T
from tamgram.binder import expand_macros
from tamgram.cfg import system_cfg
from tamgram.diagnostics import ExpandError, ResolveError, TamgramError, TypeCheckError
from tamgram.pipeline import load_system


def shown(src, modules=None):
    g = system_cfg(src_system(src, modules))
    return [T.show_rule(g.vertices[k]) for k in sorted(g.vertices)][1:]


def error(src, modules=None) -> TamgramError:
    with pytest.raises(TamgramError) as e:
        src_system(src, modules)
    return e.value


# -- typing suite: one accepted and one rejected system per judgment ---------

DECLS = "fun f/1\npred Foo/1\npred !Key/1\napred Ev/1\n"

RULE_JUDGMENTS = [
    ('string_literal_bits', '[]->[ Out("s") ]', '[ "s" ]->[]', 'expected'),
    ('fun_application_bits', '[ In(x) ]->[ Out(f(x)) ]', '[ In(x) ]->[ Out(f(x, x)) ]', 'argument'),
    ('pred_is_fact', '[ In(x) ]->[ Foo(x) ]', '[ In(x) ]->[ Foo(x, x) ]', 'argument'),
    ('apred_is_afact', '[ In(x) ]--[ Ev(x) ]->[]', '[ In(x) ]--[ Foo(x) ]->[]', 'afact'),
    ('action_rejects_bits', '[ In(x) ]--[ Ev(f(x)) ]->[]', '[ In(x) ]--[ f(x) ]->[]', 'afact'),
    ('apred_not_in_conclusion', '[ In(x) ]->[ Foo(x) ]', '[ In(x) ]->[ Ev(x) ]', 'expected'),
    ('cell_read_as_bits', "[ In(x) ]->[ 'a := x ]; []->[ Out('a) ]", "[ In(x) ]->[ 'a := x ]; [ 'a ]->[]", 'expected'),
    ('assign_is_statement', "[ In(x) ]->[ 'a := x ]", '[ \'a := "v" ]->[]', 'expected'),
    ('cas_is_patmatch', '[ In(x) ]->[ \'a := x ]; [ \'a cas "v" ]->[]', '[ In(x) ]->[ \'a := x ]; []->[ \'a cas "v" ]', 'expected'),
    ('undef_is_statement', "[ In(x) ]->[ 'a := x ]; []->[ undef('a) ]", "[ In(x) ]->[ 'a := x ]; []--[ undef('a) ]->[]", 'expected'),
    ('in_only_in_premise', '[ In(x) ]->[]', '[ In(x) ]->[ In(x) ]', 'conclusion'),
    ('out_only_in_conclusion', '[]->[ Out("s") ]', '[ Out("s") ]->[]', 'premise'),
    ('fresh_only_in_premise', '[ Fr(~n) ]->[ Out(~n) ]', '[ Fr(~n) ]->[ Fr(~n) ]', 'conclusion'),
    ('persistent_pred', '[ !Key(k) ]->[ Out(k) ]', '[ In(x) ]->[ !Ev(x) ]', 'persistent'),
    ('persistence_matches_declaration', '[ In(x) ]->[ !Key(x) ]', '[ In(x) ]->[ Key(x) ]', 'persistent'),
    ('schevars', '[ In(y) ]->[ Out(y) ]', '[]->[ Out(y) ]', 'not bound'),
    ('schevars_actions', '[ In(y) ]--[ Ev(y) ]->[]', '[]--[ Ev(y) ]->[]', 'not bound'),
    ('tuple_is_bits', '[ In(<x, y>) ]->[ Out(<y, x>) ]', '[ In(x) ]->[ <x, x> ]', 'expected'),
    ('variable_sorts_agree', '[ Fr(~n) ]->[ Out(~n) ]', '[ Fr(~n), In($n) ]->[ Out(~n) ]', 'sort'),
    ('pid_read_only', "[]->[ Out('pid) ]", "[ In(x) ]->[ 'pid := x ]", 'read-only'),
    ('single_write_per_rule', "[ In(x) ]->[ 'a := x, 'b := x ]", "[ In(x) ]->[ 'a := x, 'a := x ]", 'twice'),
    ('no_temporal_in_rules', '[ In(x) ]->[ Out(x) ]', '[ In(#i) ]->[]', 'temporal'),
    ('reserved_prefix', '[ In(tg_x) ]->[ Out(tg_x) ]', '[ In(tgc_x) ]->[ Out(tgc_x) ]', 'reserved'),
    ('unknown_symbol', '[ In(x) ]->[ Foo(x) ]', '[ In(x) ]->[ Bar(x) ]', 'unknown'),
    ('while_condition_patmatch', '[ In(x) ]->[ \'a := x ]; while \'a cas "v" { []->[] }', "[ In(x) ]->[ 'a := x ]; while 'a cas y { []->[ Out(y) ] }; []->[ Out(y) ]", 'not bound'),
    ('choice_composes_processes', 'choice { { [ In(x) ]->[ Out(x) ] }; { []->[] } }', 'choice { { [ In(x) ]->[ Out(x) ] }; { []->[ Out(x) ] } }', 'not bound'),
]

FORMULA_JUDGMENTS = [
    ('formula_at_temporal', 'lemma l = All x #i. Ev(x) @ i ==> Ex #j. Ev(x) @ j', 'lemma l = All x #i. Ev(x) @ x', 'temporal'),
    ('formula_action_fact', 'lemma l = All x #i. Ev(x) @ i ==> x = x', 'lemma l = All x #i. Foo(x) @ i ==> x = x', 'afact'),
    ('formula_closed', 'lemma l = All x #i. Ev(x) @ i ==> x = x', 'lemma l = All #i. Ev(x) @ i ==> x = x', 'free'),
]


@pytest.mark.parametrize("name,ok,bad,msg", RULE_JUDGMENTS, ids=[c[0] for c in RULE_JUDGMENTS])
def test_rule_judgment_accepts(name, ok, bad, msg):
    src_system(DECLS + "process P = " + ok)


@pytest.mark.parametrize("name,ok,bad,msg", RULE_JUDGMENTS, ids=[c[0] for c in RULE_JUDGMENTS])
def test_rule_judgment_rejects(name, ok, bad, msg):
    e = error(DECLS + "process P = " + bad)
    assert msg in e.message
    assert e.span is not None


@pytest.mark.parametrize("name,ok,bad,msg", FORMULA_JUDGMENTS,
                         ids=[c[0] for c in FORMULA_JUDGMENTS])
def test_formula_judgment_accepts(name, ok, bad, msg):
    src_system(DECLS + ok)


@pytest.mark.parametrize("name,ok,bad,msg", FORMULA_JUDGMENTS,
                         ids=[c[0] for c in FORMULA_JUDGMENTS])
def test_formula_judgment_rejects(name, ok, bad, msg):
    assert msg in error(DECLS + bad).message


@pytest.mark.parametrize("sym", ["Cell", "St", "StF", "StB"])
def test_reserved_symbol_declaration_rejected(sym):
    assert "reserved" in error(f"pred {sym}/1\n").message


@pytest.mark.parametrize("sym", ["Cell", "St", "StF", "StB"])
def test_reserved_symbol_use_rejected(sym):
    assert isinstance(error(f"process P = [ In(x) ]->[ {sym}(x) ]"), ResolveError)


def test_reserved_symbol_lookalike_accepted():
    src_system("pred Stx/1\nprocess P = [ In(x) ]->[ Stx(x) ]")


def test_typing_errors_are_type_errors():
    assert isinstance(error(DECLS + "process P = [ In(x) ]--[ Foo(x) ]->[]"), TypeCheckError)


# -- modules ------------------------------------------------------------------

MODS = {"M": "fun c/0\npred Q/1", "N": "fun c/0"}


def test_open_makes_names_unqualified():
    assert shown("import M\nopen M\nprocess P = []->[ Out(c()) ]", MODS) == ["[] -> [Out(c())]"]


def test_open_without_import():
    assert isinstance(error("open M\nprocess P = []->[]", MODS), ResolveError)


def test_ambiguity_reported_at_use():
    head = "import M\nimport N\nopen M\nopen N\n"
    shown(head + 'process P = []->[ Out("x") ]', MODS)
    e = error(head + "process P = []->[ Out(c()) ]", MODS)
    assert "M.c" in e.message and "N.c" in e.message


def test_alias():
    assert shown("import M\nmodule Z = M\nprocess P = [ In(x) ]->[ Z.Q(x) ]", MODS) == \
        ["[In(x)] -> [Q(x)]"]


def test_unknown_and_cyclic_modules():
    assert "unknown module" in error("import Q\nprocess P = []->[]", {}).message
    e = error("import A\nprocess P = []->[]", {"A": "import B", "B": "import A"})
    assert "cyclic" in e.message


def test_include_reexports_but_open_does_not():
    inner = "module Inner = { fun d/0 }\n"
    use = "open Outer\nprocess P = []->[ Out(d()) ]"
    assert shown(inner + "module Outer = { include Inner }\n" + use) == ["[] -> [Out(d())]"]
    assert isinstance(error(inner + "module Outer = { open Inner }\n" + use), ResolveError)


def test_duplicate_definition():
    assert "duplicate" in error("fun f/1\nfun f/2\n").message


# -- macros ---------------------------------------------------------------------

def test_term_macro_is_hygienic():
    src = "fun f/1\nlet h(x) = let y = f(x) in <y, x>\nprocess P = [ In(y) ]->[ Out(h(y)) ]"
    assert shown(src) == ["[In(y)] -> [Out(<f(y), y>)]"]


def test_constant_binding():
    assert shown('let k = "c"\nprocess P = []->[ Out(k) ]') == ['[] -> [Out("c")]']


def test_recursive_macro_rejected():
    assert isinstance(error("let g(x) = g(x)\nprocess P = [ In(y) ]->[ Out(g(y)) ]"),
                      ExpandError)


SET = "process Set(named rw 'c, named v) = []->[ 'c := v ]\n"


def test_rw_cell_parameter_aliases_caller_cell():
    assert shown(SET + "process P = Set(v is \"one\", c is 'x); []->[ Out('x) ]") == \
        ["[] -> ['x := \"one\"]", "[] -> [Out('x)]"]


def test_missing_named_argument():
    e = error(SET + 'process P = Set(v is "one")')
    assert "'c'" in e.message


def test_write_to_read_only_cell_parameter():
    e = error("process Set(named 'c, named v) = []->[ 'c := v ]\n"
              "process P = Set(c is 'x, v is \"o\")")
    assert "rw" in e.message


def test_name_pruning():
    src = "process S(named c) = [ In(c) ]->[ Out(c) ]\nprocess P = [ In(c) ]->[ 'c := c ]; S(c is .)"
    assert shown(src) == ["[In(c)] -> ['c := c]", "[In(c)] -> [Out(c)]"]


def test_cell_name_pruning_with_undef():
    src = ("process S(named rw 'c) = []->[ undef('c) ]\n"
           "process P = []->[ 'c := \"a\" ]; S(c is '.)")
    assert shown(src) == ["[] -> ['c := \"a\"]", "[] -> [undef('c)]"]


def test_process_macro_local_names_do_not_capture():
    src = "process S(x) = [ In(y) ]->[ Out(<x, y>) ]\nprocess P = [ In(y) ]->[ 'm := y ]; S('m)"
    assert shown(src) == ["[In(y)] -> ['m := y]", "[In(y)] -> [Out(<'m, y>)]"]


def test_positional_arity_checked():
    e = error("process S(x, z) = []->[ Out(<x, z>) ]\nprocess P = S(\"a\")")
    assert isinstance(e, ExpandError)


def test_expansion_is_idempotent():
    flat = load_system(CORPUS / "wpa2_mini.tg")
    assert expand_macros(flat) == flat


def test_wpa2_module_listing():
    flat = load_system(CORPUS / "wpa2_mini.tg")
    assert [p.name for p in flat.processes] == ["Authenticator"]
    g = system_cfg(flat)
    shown_rules = [T.show_rule(r) for r in g.vertices.values()]
    assert any("Queued(" in r for r in shown_rules)
    assert any('KDF(<"NULL", "NULL", "NULL">)' in r for r in shown_rules)
