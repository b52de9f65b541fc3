from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import CORPUS, src_system
from tamgram import terms as T
from tamgram.cellflow import (CellFlow, CellUsage, MAX_OCCURRENCES, analyse,
                              cell_usage, check_all_traces_valid, context_table, next_state)
from tamgram.cfg import system_cfg
from tamgram.diagnostics import BudgetExceeded, CellflowError, ValidityError
from tamgram.pipeline import load_system
from tamgram.testing import exhaustive_valid, random_cfg, random_walk


def corpus_graph(stem, fuse=False):
    return system_cfg(load_system(CORPUS / f"{stem}.tg"), fuse_skips=fuse)


# -- oracles -------------------------------------------------------------------

def test_process_a_contexts():
    t = context_table(corpus_graph("process_a", fuse=True))
    assert t.maxR[2] == {"a"} and t.maxR[3] == {"a"}
    assert t.maxR[4] == frozenset()
    assert t.maxRA[1] == {"a"}


FROZEN = {
    "basic_cfg": """\
0: maxR = {} maxRA = {}
1: maxR = {} maxRA = {'a}
2: maxR = {'a} maxRA = {'a}
3: maxR = {'a} maxRA = {'a}
4: maxR = {'a} maxRA = {'a}
5: maxR = {'a} maxRA = {'a}
6: maxR = {'a} maxRA = {}
""",
    "while_loop": """\
0: maxR = {} maxRA = {}
1: maxR = {} maxRA = {'n}
2: maxR = {'n} maxRA = {}
3: maxR = {'n} maxRA = {'n}
4: maxR = {'n} maxRA = {'n}
5: maxR = {} maxRA = {'n}
6: maxR = {'n} maxRA = {}
""",
    "undef_chain": """\
0: maxR = {} maxRA = {}
1: maxR = {} maxRA = {}
2: maxR = {} maxRA = {'b}
3: maxR = {'b} maxRA = {'a}
4: maxR = {'a} maxRA = {}
""",
}


@pytest.mark.parametrize("stem", sorted(FROZEN))
def test_frozen_context_tables(stem):
    assert context_table(corpus_graph(stem)).dump() == FROZEN[stem]


def test_cell_usage_of_cas_and_assign():
    g = corpus_graph("undef_chain")
    assert cell_usage(g.vertices[2]) == CellUsage(frozenset(), frozenset({"b"}), frozenset({"a"}))
    assert cell_usage(g.vertices[3]) == CellUsage(frozenset({"b"}), frozenset({"a"}), frozenset())
    w = corpus_graph("while_loop")
    assert cell_usage(w.vertices[2]).reads == {"n"}


def test_define_and_undefine_conflict():
    r = T.Rule((), (), (T.Assign("a", T.Str("x")), T.Undef("a")))
    with pytest.raises(CellflowError):
        cell_usage(r)


def test_next_state():
    u = CellUsage(frozenset({"a"}), frozenset({"b"}), frozenset({"a"}))
    assert next_state({"a", "c"}, u) == {"b", "c"}


def test_read_before_definition_witness():
    g = system_cfg(src_system("process P = [ In(x) ]->[ 'a := x ]; "
                              "choice { { []->[ undef('a) ] }; { []->[] } }; []->[ Out('a) ]"))
    with pytest.raises(ValidityError) as e:
        check_all_traces_valid(g)
    err = e.value
    assert err.missing == {"a"}
    assert list(err.witness.labels) == [0, 1, 2, 4, 5]
    assert "'a" in err.message


def test_loop_carried_violation_needs_a_second_iteration():
    # 'b is read at the loop head only after the body undefined it
    g = system_cfg(src_system(
        "process P = []->[ 'a := \"x\", 'b := \"y\" ]; "
        "while 'a cas \"x\" { []->[ Out('b) ]; []->[ undef('b) ] }"))
    with pytest.raises(ValidityError) as e:
        check_all_traces_valid(g)
    assert e.value.witness.loops() == 1


def test_corpus_is_valid():
    for stem in ("process_a", "basic_cfg", "while_loop", "undef_chain", "parallel", "wpa2_mini"):
        analyse(corpus_graph(stem))


def test_budget_exceeded():
    with pytest.raises(BudgetExceeded):
        check_all_traces_valid(corpus_graph("basic_cfg"), budget=3)


def test_ctx_r_of_empty_trace():
    with pytest.raises(CellflowError):
        CellFlow(corpus_graph("process_a")).ctx_r(CellFlow(corpus_graph("process_a"))
                                                 .make_trace(frozenset(), []))


def test_make_trace_rejects_missing_edge():
    with pytest.raises(CellflowError):
        CellFlow(corpus_graph("process_a", fuse=True)).make_trace(frozenset(), [0, 2])


def test_trace_notation():
    cf = CellFlow(corpus_graph("process_a", fuse=True))
    t = cf.make_trace(frozenset(), [0, 1, 2])
    assert t.show() == "{}, 0, {'pid}, 1, {'a, 'pid}, 2, {'a, 'pid}"


# -- properties over seeded random graphs -------------------------------------

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_two_loops_decide_validity(seed):
    c = random_cfg(random.Random(seed))
    bounded = c.flow().first_violation([c.root], MAX_OCCURRENCES) is None
    assert bounded == exhaustive_valid(c.usage, c.succ, [c.root], loops=4)


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_two_loops_agree_with_fixpoint(seed):
    c = random_cfg(random.Random(seed))
    cf = c.flow()
    unbounded = all(cf.usage[k].reads <= S for k, S in cf.reachable_states([c.root]))
    assert (cf.first_violation([c.root]) is None) == unbounded


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_witness_is_shortest_first_failure(seed):
    c = random_cfg(random.Random(seed))
    cf = c.flow()
    v = cf.first_violation([c.root])
    if v is None:
        return
    ok, first = cf.trace_valid(v.trace)
    assert not ok and first.position == len(v.trace) - 1
    assert v.trace.labels[0] == c.root


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_ctx_r_within_max_required(seed):
    rng = random.Random(seed)
    c = random_cfg(rng)
    cf = c.flow()
    table = cf.context_table()
    for _ in range(10):
        w = random_walk(rng, c)
        assert cf.ctx_r(cf.make_trace(frozenset(), w)) <= table.maxR[w[0]]


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_max_required_is_attained(seed):
    # every cell of maxR(k) is demanded by some loop-free trace from k
    c = random_cfg(random.Random(seed))
    cf = c.flow()
    for k in c.usage:
        seen = set()

        def walk(path):
            seen.update(cf.ctx_r(cf.make_trace(frozenset(), path)))
            for s in c.succ.get(path[-1], ()):
                if s not in path:
                    walk(path + [s])

        walk([k])
        assert seen == cf.max_required(k)
