from dataclasses import replace

from asmkit import parse, serialize
from asmkit.core import Assign, Par, Term
from asmkit.cosim.generate import GenConfig, generate, responders_for
from asmkit.cosim.harness import (
    CosimReport, verify_normalization, verify_separation, verify_serialization,
)
from asmkit.cosim.shrink import shrink, smaller_rules
from asmkit.cosim.suites import SUITES, load_corpus, separation_suite
from asmkit.separate import separate_all

COUNTER = """use arithmetic
fn a/0 dynamic numeric
fn b/0 dynamic numeric
fn e/1 static extrinsic numeric
init a := 2
program
  par { a := succ(a) ; b := e(a) }
"""


def test_generation_is_deterministic():
    cfg = GenConfig(seed=11, n_extrinsic=2)
    assert generate(cfg) == generate(cfg)
    assert generate(cfg) != generate(replace(cfg, seed=12))


def test_report_json_is_stable():
    a = separation_suite(seed=3, count=20).dumps()
    assert a == separation_suite(seed=3, count=20).dumps()
    assert a != separation_suite(seed=4, count=20).dumps()


def test_suite_registry():
    assert set(SUITES) == {"separate", "normalize", "serialize", "prune"}


def test_separation_checker_catches_a_wrong_rewrite():
    alg = parse(COUNTER)
    cert = separate_all(alg)
    names = cert.renaming["a"]
    broken = cert.algorithm.evolve(program=Par((Assign(names.updated, (), Term("7")),
                                                Assign(names.marker, (), Term("true")))))
    env = responders_for(alg)
    assert verify_separation(alg, cert, (), env, 5).passed
    assert not verify_separation(alg, replace(cert, algorithm=broken), (), env, 5).passed


def test_normalization_checker_catches_a_dropped_update():
    alg = parse(COUNTER)
    rep = CosimReport("n")
    verify_normalization(alg.program, [alg.initial_state()], responders_for(alg), "ok", rep)
    assert rep.passed
    import asmkit.cosim.harness as harness
    real = harness.normalize

    def lossy(rule):
        cc = real(rule)
        return replace(cc, clauses=tuple((g, Par(b.rules[:1])) for g, b in cc.clauses))
    harness.normalize = lossy
    try:
        bad = verify_normalization(alg.program, [alg.initial_state()], responders_for(alg))
    finally:
        harness.normalize = real
    assert not bad.passed


def test_serialization_checker_catches_a_skipped_query():
    alg = parse(COUNTER)
    ser = serialize(alg)
    env = responders_for(alg)
    assert verify_serialization(alg, ser, (), env, 4).passed
    other = serialize(parse(COUNTER.replace("b := e(a)", "b := e(succ(a))")))
    assert not verify_serialization(alg, other, (), env, 4).passed


def test_shrink_finds_a_smaller_failing_program():
    alg = generate(GenConfig(seed=5, max_rule_depth=4))
    target = "b1"

    def assigns_target(a):
        return any(r.target == target for r in _assigns(a.program))
    if not assigns_target(alg):
        alg = alg.evolve(program=Par((alg.program, Assign(target, (), Term("true")))))
    small = shrink(alg, assigns_target)
    assert assigns_target(small)
    assert all(not assigns_target(alg.evolve(program=r)) for r in smaller_rules(small.program))


def _assigns(rule):
    from asmkit.core import rule_assigns
    return list(rule_assigns(rule))


def test_corpus_units_load():
    assert load_corpus("even.asm").output.name == "out"
