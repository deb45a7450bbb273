import pytest
from hypothesis import given, strategies as st

from asmkit.core import (
    FALSE, NIL, TRUE, Assign, Cond, ContradictionFailure, EvalTrace, GuardNotBoolean,
    OracleStuck, Par, Term, UndefinedFailure, check_and_apply, eval_term, fire, rule_terms,
)
from asmkit.interp import OracleEnv, TableResponder

ARITH = """
use arithmetic
fn n/0 dynamic numeric
fn b/0 dynamic relational
fn c/0 dynamic
fn q/1 static extrinsic numeric
fn t/1 static intrinsic numeric
table t { (1) -> 7 }
program
  skip
"""


def num(k: int) -> Term:
    return Term(str(k))


@pytest.fixture
def state(unit):
    return unit(ARITH).initial_state()


def test_defaults(state):
    assert state.read("n") == 0
    assert state.read("b") is FALSE
    assert state.read("c") is NIL


@given(st.integers(0, 200))
def test_succ_pred_match_python(k):
    from asmkit import parse
    s = parse(ARITH).initial_state()
    assert eval_term(s, Term("succ", (num(k),))) == k + 1
    assert eval_term(s, Term("pred", (num(k),))) == max(k - 1, 0)


def test_ite_is_lazy(state):
    # the untaken branch would query an oracle that never answers
    t = Term("ite", (Term("true"), num(1), Term("q", (num(0),))))
    assert eval_term(state, t) == 1
    with pytest.raises(OracleStuck):
        eval_term(state, Term("ite", (Term("false"), num(1), Term("q", (num(0),)))))


def test_and_is_strict(state):
    t = Term("and", (Term("false"), Term("eq", (Term("q", (num(0),)), num(0)))))
    with pytest.raises(OracleStuck):
        eval_term(state, t)


def test_partial_table_is_undefined_off_its_entries(state):
    assert eval_term(state, Term("t", (num(1),))) == 7
    with pytest.raises(UndefinedFailure):
        eval_term(state, Term("t", (num(2),)))


def test_trace_records_static_and_extrinsic(state):
    trace = EvalTrace()
    env = OracleEnv({"q": TableResponder({(3,): 4})})
    assert eval_term(state, Term("succ", (Term("q", (num(3),)),)), trace, env) == 5
    assert trace.extrinsic_queries == {("q", (3,)): 4}
    assert ("succ", (4,)) in trace.static_evals


def test_contradiction_is_detected(state):
    rule = Par((Assign("n", (), num(1)), Assign("n", (), num(2))))
    with pytest.raises(ContradictionFailure):
        check_and_apply(state, fire(rule, state))


def test_duplicate_updates_are_one_update(state):
    rule = Par((Assign("n", (), num(1)), Assign("n", (), num(1))))
    ups = fire(rule, state)
    assert len(ups) == 1
    assert check_and_apply(state, ups).read("n") == 1


def test_guard_must_be_boolean(state):
    with pytest.raises(GuardNotBoolean):
        fire(Cond(Term("c"), Par(()), Par(())), state)


def test_long_else_chains_do_not_recurse(state):
    rule: object = Assign("n", (), num(9))
    for k in range(5000):
        rule = Cond(Term("eq", (Term("n"), num(k + 1))), Par(()), rule)
    assert fire(rule, state) == frozenset({(("n", ()), 9)})
    assert sum(1 for _ in rule_terms(rule)) == 5001


def test_state_equality_ignores_default_writes(state):
    same = check_and_apply(state, fire(Assign("b", (), Term("false")), state))
    assert same == state and same.dynamic == {}


def test_true_and_false_values(state):
    assert eval_term(state, Term("not", (Term("false"),))) is TRUE
    with pytest.raises(UndefinedFailure):
        eval_term(state, Term("not", (num(3),)))
