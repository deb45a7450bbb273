import pytest
from hypothesis import given, settings, strategies as st

from asmkit import PreconditionError, run, separate_all, separate_one
from asmkit.core import TRUE, default_value
from asmkit.cosim.generate import GenConfig, generate, responders_for
from asmkit.cosim.harness import verify_separation
from asmkit.cosim.suites import load_corpus, separation_hand_cases


def reconstruct(cert, state, f, args):
    """Value of the original f(args) read back from the separated state."""
    names = cert.renaming[f]
    if state.read(names.marker, args) is TRUE:
        return state.read(names.updated, args)
    table = cert.algorithm.tables[names.static]
    return table.entries.get(args, default_value(cert.algorithm.vocab[names.static]))


def test_watchdog_runs_the_same_after_separation():
    alg = load_corpus("watchdog.asm")
    cert = separate_all(alg)
    assert cert.algorithm.init == {}
    a, b = run(alg, keep_states=True), run(cert.algorithm, keep_states=True)
    assert (a.status, a.output, a.steps) == (b.status, b.output, b.steps)
    for sa, sb in zip(a.states, b.states):
        assert reconstruct(cert, sb, "armed", ()) == sa.read("armed")


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_separated_runs_track_the_original(seed):
    alg = generate(GenConfig(seed=seed, n_extrinsic=seed % 2))
    env = responders_for(alg, seed)
    cert = separate_all(alg)
    a = run(alg, (), env, 15, keep_states=True)
    b = run(cert.algorithm, (), env, 15, keep_states=True)
    assert (a.status, a.steps) == (b.status, b.steps)
    for sa, sb in zip(a.states, b.states):
        for (name, args), v in sa.dynamic.items():
            if name in cert.renaming:
                assert reconstruct(cert, sb, name, args) == v
        for f, names in cert.renaming.items():
            for (name, args) in sb.dynamic:
                if name == names.updated:
                    assert reconstruct(cert, sb, f, args) == sa.read(f, args)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_separation_claims_hold(seed):
    alg = generate(GenConfig(seed=seed, n_extrinsic=1))
    rep = verify_separation(alg, separate_all(alg), (), responders_for(alg, seed), 20)
    assert rep.passed, rep.first


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_separated_dynamics_start_at_defaults(seed):
    b = separate_all(generate(GenConfig(seed=seed, init_prob=1.0))).algorithm
    assert all(v == default_value(b.vocab[name]) for (name, _), v in b.init.items())


def test_hand_cases():
    rep = separation_hand_cases()
    assert rep.passed and rep.cases == 5, rep.first


def test_only_dynamics_can_be_separated():
    alg = load_corpus("even.asm")
    for name in ("x", "out", "odd_ext", "nope"):
        with pytest.raises(PreconditionError):
            separate_one(alg, name)


def test_fresh_names_avoid_clashes(unit):
    alg = unit("""
        @generated
        fn f/0 dynamic relational
        fn $s_f/0 dynamic
        program
          f := not(f)
    """)
    names = separate_one(alg, "f").renaming["f"]
    assert names.static != "$s_f"
