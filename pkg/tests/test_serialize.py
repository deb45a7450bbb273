import pytest
from hypothesis import given, settings, strategies as st

from asmkit import classify_program, parse, print_unit, run, serialize
from asmkit.core import FALSE, TRUE, Term
from asmkit.cosim.generate import GenConfig, generate, responders_for
from asmkit.cosim.suites import SERIALIZATION_CONFIG, swap_report
from asmkit.serialize import SerializationError, ShapeError, build_matrix, plan_queries

HEAD = """use arithmetic
fn a/0 dynamic numeric
fn b/0 dynamic numeric
fn k/0 dynamic relational
fn e/1 static extrinsic numeric
fn r/1 static extrinsic relational
program
"""


def is_ext(name):
    return name in ("e", "r")


def e(t):
    return Term("e", (t,))


def n(k):
    return Term(str(k))


def done_subsequence(ser, budget):
    """States of the serialized run at the ends of mega-steps."""
    res = run(ser.algorithm, (), ser_env, budget, keep_states=True)
    return res, [s for s in res.states[1:] if s.read(ser.done) is TRUE]


def ser_env(symbol, args):
    return (args[0] * 3 + 1) % 7 if symbol == "e" else (TRUE if args[0] % 2 else FALSE)


def test_swap_exchanges_values():
    rep = swap_report()
    assert rep.passed, rep.first


def test_extrinsic_free_program_takes_two_steps():
    ser = serialize(parse(HEAD + "  a := succ(a)\n"))
    assert ser.bound == 2
    res = run(ser.algorithm, (), None, 6, keep_states=True)
    assert [s.read("a") for s in res.states] == [0, 1, 1, 2, 2, 3, 3]


def test_plan_orders_inner_terms_first():
    t = e(Term("succ", (e(n(1)),)))
    plan = plan_queries(Term("eq", (t, e(n(2)))), is_ext)
    assert plan.terms == [e(n(1)), t, e(n(2))]
    assert plan.conditions == [None, None, None]


def test_terms_in_ite_branches_are_conditional():
    target = Term("ite", (Term("k"), e(n(1)), n(0)))
    plan = plan_queries(target, is_ext)
    assert plan.terms == [e(n(1))]
    assert plan.conditions[0] is not None


def test_a_term_guarding_itself_is_planned():
    # e(2) is read in a guard and again in that guard's branch
    guard = Term("eq", (e(n(2)), n(0)))
    target = Term("ite", (Term("k"), Term("ite", (guard, e(n(2)), n(1))), e(n(2))))
    plan = plan_queries(target, is_ext)
    assert plan.terms == [e(n(2))]
    assert all(s.head != "e" for s in plan.conditions[0].subterms())


def test_terms_guarding_each_other_are_rejected():
    x = Term("eq", (e(n(1)), n(0)))
    y = Term("eq", (e(n(2)), n(0)))
    target = Term("ite", (Term("k"), Term("ite", (x, e(n(2)), n(0))),
                          Term("ite", (y, e(n(1)), n(0)))))
    with pytest.raises(SerializationError):
        plan_queries(target, is_ext)


@given(st.lists(st.integers(0, 3), min_size=1, max_size=5))
def test_matrix_rows_replace_in_order(args):
    terms = list(dict.fromkeys(e(n(k)) for k in args))
    target = Term("foo", tuple(terms))
    m = build_matrix(terms, target, [f"d{i}" for i in range(len(terms))])
    assert m.final == Term("foo", tuple(Term(f"d{i}") for i in range(len(terms))))
    for i, t in enumerate(terms):
        assert m.step_term(i) == t


def test_mega_steps_simulate_the_original():
    alg = parse(HEAD + "  if eq(e(a), 1) then\n    par { a := succ(a) ; b := e(succ(b)) }\n"
                "  else\n    a := e(pred(a))\n")
    ref = run(alg, (), ser_env, 8, keep_states=True)
    ser = serialize(alg)
    res, marked = done_subsequence(ser, 8 * ser.bound)
    for step in res.records:
        assert len(step.trace.extrinsic_queries) <= 1
    want = [s.restrict({"a", "b"}) for s in ref.states[1:]]
    got = [s.restrict({"a", "b"}) for s in marked]
    assert got[:len(want)] == want


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 3))
def test_generated_programs_serialize(seed, n_ext):
    from dataclasses import replace
    alg = generate(replace(SERIALIZATION_CONFIG, seed=seed, n_extrinsic=n_ext))
    env = responders_for(alg, seed)
    ser = serialize(alg)
    ref = run(alg, (), env, 5, keep_states=True)
    res = run(ser.algorithm, (), env, 5 * ser.bound, keep_states=True)
    names = {s.name for s in alg.vocab}
    marked = [k for k, s in enumerate(res.states) if k and s.read(ser.done) is TRUE]
    # mega-steps: one query per regular step, lengths within the bound
    assert all(len(r.trace.extrinsic_queries) <= 1 for r in res.records)
    starts = [0] + [k + 1 for k in marked]
    assert all(b - a <= ser.bound for a, b in zip(starts, starts[1:]))
    for k, idx in enumerate(marked[:len(ref.states) - 1]):
        assert res.states[idx].restrict(names) == ref.states[k + 1].restrict(names)
    if ref.status == "Failed":
        assert res.status == "Failed"
    classify_program(parse(print_unit(ser.algorithm)))


def test_classification_rejects_other_shapes():
    with pytest.raises(ShapeError):
        classify_program(parse(HEAD + "  a := e(a)\n"))


def test_classification_json():
    ser = serialize(parse(HEAD + "  a := e(e(a))\n"))
    rows = ser.classification_json()["clauses"]
    assert [r["kind"] for r in rows] == ["tainted", "tainted", "pure"]
    assert rows[0]["term"] == "e(a)" and rows[1]["term"].startswith("e($d")


def test_two_queries_go_out_in_matrix_order():
    alg = parse(HEAD + "  a := e(e(a))\n")
    res = run(serialize(alg).algorithm, (), ser_env, 3)
    asked = [list(r.trace.extrinsic_queries) for r in res.records]
    first = ser_env("e", (0,))
    assert asked == [[("e", (0,))], [("e", (first,))], []]
    assert res.final.read("a") == ser_env("e", (first,))
