from __future__ import annotations

from collections import Counter

import pytest

from conftest import CORPUS, CORPUS_FILES, src_system
from tamgram import terms as T
from tamgram.diagnostics import TranslationError
from tamgram.pipeline import compile_file, compile_system
from tamgram.translate import (Bias, StateFact, Style, cvar, cvar_name, exit_bias, payload, tam,
                               unpack_payload, wellformedness_problems)

GOLDEN = CORPUS.parent / "tests" / "golden"
STYLES = [s.value for s in Style]


def basic(style):
    return compile_file(CORPUS / "basic_cfg.tg", style)


def copies(rules):
    return Counter(r.label for r in rules)


def test_forward_copies_the_branching_rule():
    c = basic("forward")
    assert len(c.rules) == 9
    assert copies(c.rules)[1] == 3
    assert all(n == 1 for k, n in copies(c.rules).items() if k != 1)


def test_backward_copies_the_join_rule():
    c = basic("backward")
    assert len(c.rules) == 9
    assert copies(c.rules)[5] == 3
    assert all(n == 1 for k, n in copies(c.rules).items() if k != 5)


def test_hybrid_fact_table():
    c = basic("hybrid")
    table = [(r.label, r.entry and (r.entry.family, r.entry.site),
              r.exit and (r.exit.family, r.exit.site)) for r in c.rules]
    assert table == [
        (0, None, ("StF", 1)),
        (1, ("StF", 1), ("StB", 1)),
        (2, ("StB", 1), ("StF", 5)),
        (3, ("StB", 1), ("StF", 5)),
        (4, ("StB", 1), ("StF", 5)),
        (5, ("StF", 5), ("StF", 6)),
        (6, ("StF", 6), None),
    ]


def test_exit_bias():
    g = basic("hybrid").graph
    assert exit_bias(g, 1) is Bias.BACKWARD
    assert exit_bias(g, 5) is Bias.FORWARD and exit_bias(g, 6) is Bias.FORWARD


def test_rule_names():
    assert [r.name for r in basic("forward").rules][1:4] == \
        ["Basic__1__to2", "Basic__1__to3", "Basic__1__to4"]
    assert [r.name for r in basic("backward").rules][5:8] == \
        ["Basic__5__from2", "Basic__5__from3", "Basic__5__from4"]
    names = [r.name for r in compile_file(CORPUS / "terminal.tg").rules]
    assert "Terminal__Terminal_Sends_GPO" in names


def test_duplicate_annotations_get_suffix():
    c = compile_system(src_system('process P = "s": []->[]; "s": []->[]'))
    assert [r.name for r in c.rules] == ["P__0", "P__s", "P__s__2"]
    assert any("more than once" in w.message for w in c.warnings)


def test_cells_become_reserved_variables():
    assert cvar_name("a") == T.Var("tgc_a")
    assert cvar_name("pid") == T.Var("tgc_pid", "fresh")
    assert cvar(T.Tuple((T.Cell("a"), T.Var("x")))) == T.Tuple((T.Var("tgc_a"), T.Var("x")))


def test_payload_round_trip():
    assert payload([]) == T.Str("tg_nil")
    assert payload([T.Var("x")]) == T.Var("x")
    two = payload([T.Var("x"), T.Var("y")])
    assert unpack_payload(two, 2) == (T.Var("x"), T.Var("y"))


def test_state_fact_term():
    f = StateFact("StF", 5, ("a",))
    assert tam(f.term({"a": T.Var("tgc_a")})) == "StF(~tgc_pid, '5', tgc_a)"


def test_cas_patterns_are_substituted_into_entry():
    c = basic("hybrid")
    assert tam(c.rules[2].premise[0]) == "StB(~tgc_pid, '1', '1')"


def test_as_binding_is_inlined():
    c = compile_file(CORPUS / "wpa2_mini.tg")
    shown = c.text
    assert " as " not in shown and "m2" not in shown.replace("mic_m2", "")


def test_cell_by_cell_uses_cell_facts():
    c = compile_file(CORPUS / "process_a.tg", "cell-by-cell")
    init = c.rules[0]
    assert [tam(t) for t in init.conclusion] == [
        "PcSt(~tgc_pid, '0')", "Cell(~tgc_pid, 'a', 'tg_undef')",
        "Cell(~tgc_pid, 'pid', ~tgc_pid)"]
    assert [r.name for r in c.rules] == ["A__0", "A__1", "A__2", "A__3", "A__4__from2",
                                         "A__4__from3", "A__5"]


def test_restrictions_and_annotations_emitted_in_order():
    text = compile_file(CORPUS / "terminal.tg").text
    assert text.index("restriction OnlyOneTerminal") < text.index("rule Terminal__0")
    assert "// Terminal_Sends_GPO\nrule Terminal__Terminal_Sends_GPO:" in text
    text = compile_file(CORPUS / "if_else.tg").text
    assert 'restriction TgNeq:\n  "All x y #tgc_t. (TgNeq(x, y) @ #tgc_t ==> not(x = y))"' in text


def test_functions_and_builtins_header():
    text = compile_file(CORPUS / "wpa2_mini.tg", builtins=["hashing"]).text
    head = text.splitlines()
    assert head[:6] == ["theory Wpa2_mini", "begin", "", "builtins: hashing", "",
                        "functions: Auth/0, GTK/1, KDF/1, MIC/2, snenc/3"]
    assert text.rstrip().endswith("end")
    assert "lemma executable [exists-trace]:" in text


def test_theory_name_option():
    assert compile_file(CORPUS / "process_a.tg", theory="Custom").text.startswith(
        "theory Custom\nbegin")


def test_unsourced_slot_is_a_translation_error():
    # maxR of the last rule needs 'a, but nothing defines it on the cas-free path
    from tamgram import cellflow
    from tamgram.cfg import system_cfg
    from tamgram.translate import translate

    g = system_cfg(src_system("process P = []->[ 'a := \"x\" ]; []->[ Out('a) ]"))
    table = cellflow.context_table(g)
    table.maxR[1] = frozenset({"b"})
    table.maxRA[0] = frozenset({"b"})
    with pytest.raises(TranslationError):
        translate(g, table, "hybrid")


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
@pytest.mark.parametrize("style", STYLES)
def test_golden(path, style):
    expected = (GOLDEN / f"{path.stem}.{style}.spthy").read_text(encoding="utf-8")
    assert compile_file(path, style).text == expected


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
@pytest.mark.parametrize("style", STYLES)
def test_wellformed(path, style):
    c = compile_file(path, style)
    assert wellformedness_problems(c.rules) == []
    for r in c.rules:
        for t in r.premise + r.actions + r.conclusion:
            for n in T.walk(t):
                assert not isinstance(n, (T.Assign, T.Undef, T.Cas))
