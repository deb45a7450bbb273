"""Acceptance criteria 1-9, one test each.  Every test records a single
``criterion N: PASS|FAIL ...`` line; the lines are printed in the terminal
summary of the pytest run."""
import time

from asmkit import is_means_fit_effective, load_bundle, prune
from asmkit.cosim import suites

RESULTS = {}


def report(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}"
    RESULTS[n] = line
    print(line)
    assert ok, line


def test_criterion_1_separation():
    t0 = time.perf_counter()
    rep = suites.separation_suite(seed=0, count=500, steps=20)
    hand = suites.separation_hand_cases()
    elapsed = time.perf_counter() - t0
    claims = {k: rep.checks.get(k, 0) for k in ("objective", "a", "b", "c", "d", "e")}
    ok = (rep.passed and hand.passed and rep.cases >= 500 and hand.cases == 5
          and all(claims.values()) and elapsed < 120)
    report(1, ok, f"{rep.cases} generated + {hand.cases} hand cases, claims {claims}, "
                  f"{elapsed:.1f}s")


def test_criterion_2_normalization():
    example = suites.merge_example_report()
    rep = suites.normalization_suite(seed=0, count=500, n_states=50)
    ok = (example.passed and example.checks.get("five_clauses") == 1
          and example.cases >= 6 and rep.passed and rep.cases >= 500
          and rep.checks.get("abnormal", 0) >= 500 * 50)
    report(2, ok, f"merge example ok={example.passed}, {rep.cases} rules, "
                  f"{rep.checks.get('abnormal', 0)} rule-state pairs, "
                  f"{rep.checks.get('updates', 0)} with equal update and query sets")


def test_criterion_3_serialization():
    rep = suites.serialization_suite(seed=0, count=200, mega_steps=10)
    needed = ("one_query", "state", "bound", "swap")
    ok = rep.passed and rep.cases >= 200 and all(rep.checks.get(k, 0) > 0 for k in needed)
    report(3, ok, f"{rep.cases} cases, checks {dict(sorted(rep.checks.items()))}")


def test_criterion_4_shape():
    rep = suites.serialization_suite(seed=0, count=200, mega_steps=1)
    shapes = rep.checks.get("shape", 0)
    bad = rep.failures.get("shape", 0)
    ok = shapes >= 200 and bad == 0
    report(4, ok, f"{shapes} serialized outputs classified, {bad} rejected")


def test_criterion_5_pruning():
    rep = suites.pruning_suite(budget=200_000)
    effective = all(
        is_means_fit_effective(prune(load_bundle(suites.corpus_path(name))).algorithm.vocab)
        for name, _, _ in suites.PRUNING_CASES)
    outputs = rep.info["outputs"]
    fact = [outputs[f"factorial.json[{x}]"]["output"] for x in range(7)]
    fib10 = outputs["fib.json[10]"]["output"]
    ok = (rep.passed and effective and fact == [1, 1, 2, 6, 24, 120, 720] and fib10 == 55
          and rep.checks.get("stack", 0) == rep.cases)
    report(5, ok, f"{rep.cases} runs, effective={effective}, factorial={fact}, fib(10)={fib10}")


def test_criterion_6_relativized():
    rep = suites.relativized_suite(budget=200_000)
    ok = rep.passed and rep.checks.get("only_passthrough") == 1
    report(6, ok, f"{rep.cases} runs, checks {dict(sorted(rep.checks.items()))}")


def test_criterion_7_uninformative():
    rep = suites.uninformative_suite(seed=0, count=100, samples=100)
    ok = rep.passed and rep.checks.get("probe", 0) > 0
    report(7, ok, f"{rep.cases} algorithms, {rep.checks.get('probe', 0)} symbols probed")


def test_criterion_8_roundtrip():
    rep = suites.roundtrip_suite(seed=0, count=1000)
    corpus = len(suites.corpus_units())
    ok = rep.passed and rep.cases == corpus + 1000
    report(8, ok, f"{corpus} corpus units + 1000 generated units")


DETERMINISM_RUNS = [
    ("separate", lambda: suites.separation_suite(seed=7, count=60)),
    ("normalize", lambda: suites.normalization_suite(seed=7, count=60, n_states=20)),
    ("serialize", lambda: suites.serialization_suite(seed=7, count=40)),
    ("prune", lambda: suites.pruning_suite()),
]


def test_criterion_9_determinism():
    same = {name: fn().dumps() == fn().dumps() for name, fn in DETERMINISM_RUNS}
    report(9, all(same.values()), f"byte-identical reruns {same}")
