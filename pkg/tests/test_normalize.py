import random

from hypothesis import given, settings, strategies as st

from asmkit.core import FALSE, TRUE, Assign, Cond, Par, Term, t_and
from asmkit.cosim.generate import GenConfig, generate, random_state, responders_for
from asmkit.cosim.harness import verify_normalization
from asmkit.cosim.suites import merge_example, merge_example_report, normalization_states
from asmkit.interp import OracleEnv, TableResponder, step
from asmkit.normalize import (
    clause_bodies_are_assignments, is_conditional_tree, merge_parallel, normalize,
)


def test_merge_example_clause_order():
    p, q = merge_example()
    (g1, p1), (g2, p2) = p.clauses
    (h1, q1), = q.clauses
    assert list(merge_parallel(p, q).clauses) == [
        (t_and(g1, h1), Par(p1.rules + q1.rules)), (g1, p1),
        (t_and(g2, h1), Par(p2.rules + q1.rules)), (g2, p2), (h1, q1)]


def test_merge_example_categories():
    rep = merge_example_report()
    assert rep.passed and rep.cases == 6, rep.first


def test_merge_by_brute_force():
    """Every truth assignment of the three guards: the merged cascade fires
    the union of what the two cascades fire."""
    from asmkit.cosim.suites import merge_example_algorithm
    alg = merge_example_algorithm()
    state = alg.initial_state()
    p, q = merge_example()
    merged = merge_parallel(p, q).to_rule()
    for bits in range(8):
        answers = {s: TRUE if bits >> k & 1 else FALSE for k, s in enumerate(("g1", "g2", "h1"))}
        env = OracleEnv({s: TableResponder({(): v}) for s, v in answers.items()})
        want = set()
        if answers["g1"] is TRUE:
            want.add((("p", ()), 1))
        elif answers["g2"] is TRUE:
            want.add((("p", ()), 2))
        if answers["h1"] is TRUE:
            want.add((("q", ()), 1))
        _, rec = step(alg.evolve(program=merged), state, env)
        assert set(rec.updates) == want


def test_parallel_assignments_give_one_clause():
    body = Par((Assign("a", (), Term("1")), Par((Assign("b", (), Term("2")),))))
    cc = normalize(body)
    assert len(cc.clauses) == 1 and cc.clauses[0][0] == Term("true")
    assert [a.target for a in cc.clauses[0][1].rules] == ["a", "b"]


def test_conditional_tree_shape():
    leaf = Assign("a", (), Term("1"))
    assert is_conditional_tree(Cond(Term("b"), leaf, Cond(Term("c"), leaf, Par(()))))
    assert not is_conditional_tree(Par((Cond(Term("b"), leaf, leaf), leaf)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_normal_form_is_flat(seed):
    cc = normalize(generate(GenConfig(seed=seed)).program)
    assert clause_bodies_are_assignments(cc)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_normalization_preserves_steps(seed):
    alg = generate(GenConfig(seed=seed, n_extrinsic=seed % 3))
    states = normalization_states(alg, random.Random(seed), 20)
    rep = verify_normalization(alg.program, states, responders_for(alg, seed))
    assert rep.passed, rep.first


def test_random_states_differ():
    alg = generate(GenConfig(seed=3))
    rng = random.Random(0)
    assert len({frozenset(random_state(alg, rng).dynamic.items()) for _ in range(10)}) > 1
