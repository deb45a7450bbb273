import io
import json
import math

import pytest

from asmkit import FALSE, TRUE, EnumValue, OracleEnv, load_bundle, oracle_dispatch_run, run
from asmkit.cosim.suites import corpus_path, load_corpus
from asmkit.interp import (
    BUDGET_EXHAUSTED, OUTPUT_PRODUCED, RUN_FAILED, RUN_STUCK, DepthExceeded,
)


def parity_env():
    return OracleEnv.load(corpus_path("parity.json"))


@pytest.mark.parametrize("x", range(10))
def test_even_with_a_table_oracle(x):
    res = run(load_corpus("even.asm"), [x], parity_env())
    assert res.status == OUTPUT_PRODUCED
    assert res.output == (TRUE if x % 2 == 0 else FALSE)


def test_unanswered_query_is_stuck():
    res = run(load_corpus("even.asm"), [3])
    assert res.status == RUN_STUCK
    assert (res.stuck.symbol, res.stuck.args) == ("odd_ext", (2,))


def test_contradiction_fails_the_run():
    res = run(load_corpus("separation/clash_separated.asm"))
    assert res.status == RUN_FAILED
    assert type(res.failure).__name__ == "ContradictionFailure"


def test_initial_values_and_enums():
    res = run(load_corpus("watchdog.asm"))
    assert res.status == OUTPUT_PRODUCED and res.steps == 1
    assert res.output == EnumValue("Msg", "alarm")


def test_budget_is_respected(unit):
    alg = unit("""
        use arithmetic
        fn n/0 dynamic numeric
        program
          n := succ(n)
    """)
    res = run(alg, budget=25, keep_states=True)
    assert res.status == BUDGET_EXHAUSTED and res.steps == 25
    assert [s.read("n") for s in res.states] == list(range(26))


def test_trace_file_is_json_lines():
    buf = io.StringIO()
    run(load_corpus("even.asm"), [2], parity_env(), trace_file=buf)
    rows = [json.loads(line) for line in buf.getvalue().splitlines()]
    assert rows[0]["extrinsic_queries"] == [["odd_ext", [1], True]]
    assert rows[-1] == {"output": True, "status": OUTPUT_PRODUCED, "steps": 1}


@pytest.mark.parametrize("x", range(7))
def test_dispatch_computes_factorial(x):
    bundle = load_bundle(corpus_path("factorial.json"))
    res = oracle_dispatch_run(bundle, 0, [x])
    assert res.output == math.factorial(x)


@pytest.mark.parametrize("x", range(13))
def test_dispatch_computes_parity(x):
    res = oracle_dispatch_run(load_bundle(corpus_path("evenodd.json")), 0, [x])
    assert res.output == (TRUE if x % 2 == 0 else FALSE)


def test_dispatch_depth_limit():
    with pytest.raises(DepthExceeded):
        oracle_dispatch_run(load_bundle(corpus_path("evenodd.json")), 0, [40], max_depth=10)
