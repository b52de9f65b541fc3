from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS_FILES
from tamgram.diagnostics import LexError, ParseError
from tamgram.syntax import Kind, module_name_for, parse_source, pretty, tokenize
from tamgram.syntax import ast as A
from tamgram.testing import random_program


def kinds(src):
    return [(t.kind, t.text) for t in tokenize(src) if t.kind is not Kind.EOF]


def test_cell_assignment_tokens():
    assert kinds("'a := x") == [(Kind.CELL, "'a"), (Kind.PUNCT, ":="), (Kind.IDENT, "x")]


def test_rule_token_count():
    toks = kinds("[ In(x) ]->[ 'a := x ];")
    assert len(toks) == 11
    assert toks[-1] == (Kind.PUNCT, ";")


def test_annotation_token():
    assert kinds('"Terminal_Sends_GPO":') == [(Kind.ANNOTATION, '"Terminal_Sends_GPO"'),
                                             (Kind.PUNCT, ":")]


def test_public_and_fresh_markers():
    ks = [k for k, _ in kinds("$x ~n")]
    assert ks == [Kind.PUBLIC, Kind.FRESH, Kind.IDENT]


def test_comments_are_skipped_and_nest():
    assert kinds("x /* a /* b */ c */ // tail\ny") == [(Kind.IDENT, "x"), (Kind.IDENT, "y")]


def test_spans_are_nonempty_and_in_buffer():
    src = "process P = [ In(x) ]->[ 'a := x ]"
    for t in tokenize(src):
        if t.kind is Kind.EOF:
            continue
        assert t.span.end > t.span.start
        assert src[t.span.start:t.span.end] == t.text


def test_cell_tokens_start_with_sigil():
    for t in tokenize("'a 'bc := 'd"):
        if t.kind is Kind.CELL:
            assert t.text.startswith("'")


@pytest.mark.parametrize("src", ['"open', "x ? y", "`"])
def test_lex_errors(src):
    with pytest.raises(LexError):
        tokenize(src)


def test_unterminated_string_reports_position():
    with pytest.raises(LexError) as e:
        tokenize('x\n  "abc')
    assert e.value.span.line == 2


def test_empty_source():
    m = parse_source("", "empty.tg")
    assert m.decls == ()


def test_process_a_shape(corpus):
    m = parse_source((corpus / "process_a.tg").read_text(), "process_a.tg")
    (p,) = m.decls
    assert isinstance(p, A.ProcessDecl) and p.name == "A"
    assert isinstance(p.body, A.Step)
    ch = p.body.rest
    assert isinstance(ch, A.Choice) and len(ch.branches) == 2
    assert isinstance(ch.rest, A.Step) and isinstance(ch.rest.rest, A.Null)


def test_arity_mismatch_is_not_a_parse_error():
    parse_source("pred Foo/2\nprocess P = [ In(x) ]->[ Foo(x) ]", "t.tg")


def test_choice_accepts_comma_separators():
    a = parse_source("process P = choice { { []->[] }, { []->[] } }", "t.tg")
    b = parse_source("process P = choice { { []->[] }; { []->[] } }", "t.tg")
    assert a.decls == b.decls


@pytest.mark.parametrize("src", [
    "process P = [ In(x) ->[ 'a := x ]",
    "process P = choice { { []->[] }",
    "process = []->[]",
    "pred Foo/",
    "process P = while { []->[] }",
    "process P = []->[ 'a := ]",
])
def test_parse_errors(src):
    with pytest.raises(ParseError):
        parse_source(src, "t.tg")


def test_parse_error_location():
    with pytest.raises(ParseError) as e:
        parse_source("process P =\n  []->[ 'a := ]", "t.tg")
    assert e.value.render().startswith("t.tg:2:")


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: p.stem)
def test_round_trip(path):
    m = parse_source(path.read_text(), str(path))
    again = parse_source(pretty(m), str(path))
    assert again.decls == m.decls


def test_module_name_from_file_stem():
    assert module_name_for("dir/fun_symbols.tg") == "Fun_symbols"


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_round_trip_random_programs(seed):
    m = parse_source(random_program(random.Random(seed), depth=3), "r.tg")
    assert parse_source(pretty(m), "r.tg").decls == m.decls
