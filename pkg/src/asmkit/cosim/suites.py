"""Seeded verification suites over generated algorithms and the corpus."""
from __future__ import annotations

import itertools
import os
import random
from dataclasses import replace
from typing import Callable, Dict, List, Optional

from ..algorithm import Algorithm
from ..bundle import load_bundle
from ..core import (
    FALSE, NIL, TRUE, Assign, Cond, EnumValue, Par, Symbol, Term, default_value, else_chain,
)
from ..interp import OracleEnv, TableResponder, run
from ..normalize import CompoundConditional, merge_parallel, normalize
from ..parser import parse, print_unit
from ..separate import separate_all
from ..serialize import classify_program, serialize
from .generate import COLORS, GenConfig, generate, random_state, responders_for
from .harness import (
    CosimReport, verify_normalization, verify_pruning, verify_separation, verify_serialization,
)
from .shrink import shrink

CORPUS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "corpus")


def corpus_path(*parts: str) -> str:
    return os.path.join(CORPUS, *parts)


def load_corpus(name: str) -> Algorithm:
    with open(corpus_path(name)) as fh:
        return parse(fh.read())


def corpus_units() -> List[str]:
    out = []
    for root, _, files in os.walk(CORPUS):
        for f in sorted(files):
            if f.endswith(".asm"):
                out.append(os.path.relpath(os.path.join(root, f), CORPUS))
    return sorted(out)


def sub_seed(seed: int, k: int) -> int:
    return seed * 1_000_003 + k


def _shrink_into(rep: CosimReport, alg: Algorithm, fails: Callable[[Algorithm], bool]) -> None:
    """Record a smaller failing program once per report."""
    if "shrunk" in rep.info:
        return
    small = shrink(alg, fails)
    rep.info["shrunk"] = print_unit(small)


# ---------------------------------------------------------------------------
# Separation


def separation_suite(seed: int = 0, count: int = 500, steps: int = 20,
                     config: Optional[GenConfig] = None) -> CosimReport:
    rep = CosimReport("separation")
    base = config or GenConfig()
    for k in range(count):
        cfg = replace(base, seed=sub_seed(seed, k), n_extrinsic=k % 2)
        alg = generate(cfg)
        env = responders_for(alg, cfg.seed)
        case = f"seed={cfg.seed}"
        before = len(rep.failures)
        verify_separation(alg, separate_all(alg), (), env, steps, case, rep)
        if rep.failures and not before:
            _shrink_into(rep, alg, lambda a: not verify_separation(
                a, separate_all(a), (), env, steps).passed)
    return rep


def separation_hand_cases() -> CosimReport:
    """Hand-written cases: both failure scenarios, the read-after-update
    case and a stuck query."""
    rep = CosimReport("separation-hand")
    probes = [
        ("undefined_static.asm", None, "Failed", "UndefinedFailure"),
        ("clash_separated.asm", None, "Failed", "ContradictionFailure"),
        ("clash_retained.asm", ["f"], "Failed", "ContradictionFailure"),
        ("update_then_read.asm", None, "BudgetExhausted", None),
        ("stuck_query.asm", None, "Stuck", None),
    ]
    for name, only, status, failure in probes:
        alg = load_corpus(os.path.join("separation", name))
        cert = separate_all(alg, only)
        verify_separation(alg, cert, (), None, 6, name, rep)
        ra = run(alg, (), None, 6)
        rb = run(cert.algorithm, (), None, 6)
        got = (ra.status, rb.status, type(ra.failure).__name__ if ra.failure else None,
               type(rb.failure).__name__ if rb.failure else None)
        rep.check("scenario", got == (status, status, failure, failure), name, ra.steps,
                  {"got": got})
        if name == "update_then_read.asm":
            s_name = cert.renaming["f"].static
            late = [r for r in rb.records[1:]
                    if any(n == s_name and a == (0,) for n, a in r.trace.static_evals)]
            rep.check("d_after_update", not late,
                      name, 1, {"reads_of_initial_after_update": len(late)})
    return rep


# ---------------------------------------------------------------------------
# Normalization


def merge_example():
    """The m=2, n=1 merge: guards are nullary extrinsic relations, bodies
    set distinct variables, so update and query sets identify each path."""
    g1, g2, h1 = Term("g1"), Term("g2"), Term("h1")
    p1 = Par((Assign("p", (), Term("1")),))
    p2 = Par((Assign("p", (), Term("2")),))
    q1 = Par((Assign("q", (), Term("1")),))
    p = CompoundConditional(((g1, p1), (g2, p2)))
    q = CompoundConditional(((h1, q1),))
    return p, q


def merge_example_algorithm() -> Algorithm:
    from ..backends import Arithmetic
    p, q = merge_example()
    decls = (Symbol("g1", 0, static=True, intrinsic=False, relational=True),
             Symbol("g2", 0, static=True, intrinsic=False, relational=True),
             Symbol("h1", 0, static=True, intrinsic=False, relational=True),
             Symbol("p", 0, numerical=True), Symbol("q", 0, numerical=True))
    return Algorithm(decls, Par((p.to_rule(), q.to_rule())), (Arithmetic(),))


def six_category_envs():
    """One oracle per category: which guard, if any, is the first to hold."""
    cats = {
        "g1&h1": (True, False, True), "g1&!h1": (True, False, False),
        "!g1&g2&h1": (False, True, True), "!g1&g2&!h1": (False, True, False),
        "!g1&!g2&h1": (False, False, True), "none": (False, False, False),
    }
    out = {}
    for name, (a, b, c) in cats.items():
        out[name] = OracleEnv({s: TableResponder({(): TRUE if v else FALSE})
                               for s, v in zip(("g1", "g2", "h1"), (a, b, c))})
    return out


def merge_example_report() -> CosimReport:
    from ..core import t_and
    rep = CosimReport("normalization-example")
    p, q = merge_example()
    merged = merge_parallel(p, q)
    (g1, p1), (g2, p2) = p.clauses
    (h1, q1), = q.clauses
    expected = [(t_and(g1, h1), Par(p1.rules + q1.rules)), (g1, p1),
                (t_and(g2, h1), Par(p2.rules + q1.rules)), (g2, p2), (h1, q1)]
    rep.check("five_clauses", list(merged.clauses) == expected, "merge", 0,
              {"got": [str(c) for c in merged.clauses]})
    alg = merge_example_algorithm()
    state = alg.initial_state()
    for name, env in six_category_envs().items():
        verify_normalization(alg.program, [state], env, name, rep)
    return rep


def _guard_symbols(rule) -> List[str]:
    names: List[str] = []

    def walk(r):
        if isinstance(r, Cond):
            links, last = else_chain(r)
            for c in links:
                names.extend(t.head for t in c.guard.subterms())
                walk(c.then)
            walk(last)
        elif isinstance(r, Par):
            for x in r.rules:
                walk(x)
    walk(rule)
    return list(dict.fromkeys(names))


def _small_values(sym: Symbol):
    if sym.relational:
        return [TRUE, FALSE]
    if sym.numerical:
        return [0, 1, 2]
    return [NIL, EnumValue("Color", COLORS[0]), EnumValue("Color", COLORS[1])]


def normalization_states(alg: Algorithm, rng: random.Random, n_states: int = 50,
                         cap: int = 64) -> list:
    """Guard-relevant nullary locations enumerated over small value sets,
    everything else sampled; at least ``n_states`` states."""
    relevant = [alg.vocab[n] for n in _guard_symbols(alg.program)
                if n in alg.vocab and alg.vocab[n].dynamic and alg.vocab[n].arity == 0]
    combos = list(itertools.product(*[_small_values(s) for s in relevant]))
    if len(combos) > cap:
        combos = rng.sample(combos, cap)
    states = []
    for combo in combos:
        st = random_state(alg, rng)
        dyn = dict(st.dynamic)
        for s, v in zip(relevant, combo):
            dyn[(s.name, ())] = v
        states.append(st.with_dynamic(dyn))
    while len(states) < n_states:
        states.append(random_state(alg, rng))
    return states


def normalization_suite(seed: int = 0, count: int = 500, n_states: int = 50,
                        config: Optional[GenConfig] = None) -> CosimReport:
    rep = CosimReport("normalization")
    base = config or GenConfig()
    for k in range(count):
        cfg = replace(base, seed=sub_seed(seed, k), n_extrinsic=k % 3)
        alg = generate(cfg)
        env = responders_for(alg, cfg.seed)
        states = normalization_states(alg, random.Random(f"states:{cfg.seed}"), n_states)
        before = bool(rep.failures)
        verify_normalization(alg.program, states, env, f"seed={cfg.seed}", rep)
        if rep.failures and not before:
            _shrink_into(rep, alg, lambda a: not verify_normalization(
                a.program, states, env).passed)
        rep.info["clauses"] = rep.info.get("clauses", 0) + len(normalize(alg.program))
    return rep


# ---------------------------------------------------------------------------
# Serialization


def swap_algorithm() -> Algorithm:
    return parse("use arithmetic\n"
                 "fn a/0 dynamic numeric\nfn b/0 dynamic numeric\n"
                 "init a := 1\ninit b := 2\n"
                 "program\n  par {\n    a := b ;\n    b := a\n  }\n")


def swap_report() -> CosimReport:
    rep = CosimReport("swap")
    alg = swap_algorithm()
    ser = serialize(alg)
    verify_serialization(alg, ser, (), None, 4, "swap", rep)
    res = run(ser.algorithm, (), None, ser.bound or 2, keep_states=True)
    done_states = [s for s in res.states if s.read(ser.done) is TRUE]
    first = done_states[0] if done_states else None
    rep.check("swap", first is not None and (first.read("a"), first.read("b")) == (2, 1),
              "swap", 0, {"a": first and first.read("a"), "b": first and first.read("b")})
    return rep


# Normalizing a parallel composition multiplies clause counts, so wide
# programs serialize into cascades of thousands of clauses.  Narrower
# programs keep the suite fast while still nesting conditionals.
SERIALIZATION_CONFIG = GenConfig(max_par_width=2)


def serialization_suite(seed: int = 0, count: int = 200, mega_steps: int = 10,
                        config: Optional[GenConfig] = None) -> CosimReport:
    rep = CosimReport("serialization")
    base = config or SERIALIZATION_CONFIG
    lengths = []
    for k in range(count):
        cfg = replace(base, seed=sub_seed(seed, k), n_extrinsic=1 + k % 3)
        alg = generate(cfg)
        env = responders_for(alg, cfg.seed)
        ser = serialize(alg)
        before = bool(rep.failures)
        verify_serialization(alg, ser, (), env, mega_steps, f"seed={cfg.seed}", rep)
        check_shape(ser.algorithm, rep, f"seed={cfg.seed}")
        lengths.append(ser.bound)
        if rep.failures and not before:
            _shrink_into(rep, alg, lambda a: not verify_serialization(
                a, serialize(a), (), env, mega_steps).passed)
    rep.info["max_bound"] = max(lengths) if lengths else 0
    rep.absorb(swap_report())
    free = serialize(parse("use arithmetic\nfn a/0 dynamic numeric\nprogram\n  a := succ(a)\n"))
    rep.check("extrinsic_free_bound", free.bound == 2, "succ", 0, {"bound": free.bound})
    return rep


def check_shape(alg: Algorithm, rep: CosimReport, case: str = "") -> bool:
    """Printed, re-parsed and classified: pure or tainted clauses only,
    exactly one extrinsic-head term per tainted clause."""
    try:
        classify_program(parse(print_unit(alg)))
    except Exception as exc:  # any shape or parse problem is a failed check
        return rep.check("shape", False, case, 0, {"error": str(exc)})
    return rep.check("shape", True, case)


# ---------------------------------------------------------------------------
# Pruning


def parity(x: int) -> bool:
    return x % 2 == 0


def factorial(x: int) -> int:
    acc = 1
    for k in range(2, x + 1):
        acc *= k
    return acc


def fibonacci(x: int) -> int:
    a, b = 0, 1
    for _ in range(x):
        a, b = b, a + b
    return a


PRUNING_CASES = [
    ("evenodd.json", range(13), lambda x: TRUE if parity(x) else FALSE),
    ("factorial.json", range(7), factorial),
    ("fib.json", range(11), fibonacci),
]


def pruning_suite(budget: int = 200_000) -> CosimReport:
    rep = CosimReport("pruning")
    for name, xs, oracle in PRUNING_CASES:
        bundle = load_bundle(corpus_path(name))
        verify_pruning(bundle, [[x] for x in xs], budget, None, name, rep)
        for x in xs:
            got = rep.info["outputs"][f"{name}[{x}]"]["output"]
            rep.check("independent_oracle", got == oracle(x), f"{name}[{x}]", 0,
                      {"got": got, "want": oracle(x)})
    return rep


def relativized_suite(budget: int = 200_000) -> CosimReport:
    rep = CosimReport("relativized")
    bundle = load_bundle(corpus_path("relativized.json"))
    env = OracleEnv.load(corpus_path("g_table.json"))
    verify_pruning(bundle, [[x] for x in range(6)], budget, env, "relativized.json", rep)
    from ..prune import prune
    b_alg = prune(bundle).algorithm
    ext = sorted(s.name for s in b_alg.vocab if s.extrinsic)
    rep.check("only_passthrough", ext == ["g"], "relativized.json", 0, {"extrinsic": ext})
    for x in range(6):
        got = rep.info["outputs"][f"relativized.json[{x}]"]["output"]
        rep.check("independent_oracle", got == 2 * (x + 1), f"[{x}]", 0, {"got": got})
    return rep


# ---------------------------------------------------------------------------
# Round trip and uninformativeness


def roundtrip_suite(seed: int = 0, count: int = 1000) -> CosimReport:
    rep = CosimReport("roundtrip")
    units = [(name, load_corpus(name)) for name in corpus_units()]
    units += [(f"seed={sub_seed(seed, k)}",
               generate(GenConfig(seed=sub_seed(seed, k), n_extrinsic=k % 3,
                                  with_output=k % 2 == 0, n_inputs=int(k % 3 == 0))))
              for k in range(count)]
    for name, alg in units:
        rep.cases += 1
        text = print_unit(alg)
        try:
            again = parse(text)
        except Exception as exc:
            rep.check("parse", False, name, 0, {"error": str(exc)})
            continue
        rep.check("identity", again == alg, name, 0, {"text": text})
        rep.check("stable_text", print_unit(again) == text, name)
    return rep


def _probe_args(sym: Symbol, rng: random.Random, samples: int) -> List[tuple]:
    pool = [TRUE, FALSE, NIL] + list(range(64)) + [EnumValue("Color", c) for c in COLORS]
    return [tuple(rng.choice(pool) for _ in range(sym.arity)) for _ in range(samples)]


def uninformative_suite(seed: int = 0, count: int = 100, samples: int = 100) -> CosimReport:
    """After separating everything, every non-input dynamic starts at its
    default: a scan of the initial-value table plus sampled reads."""
    rep = CosimReport("uninformative")
    algs = [(name, load_corpus(name)) for name in corpus_units()]
    algs += [(f"seed={sub_seed(seed, k)}", generate(GenConfig(seed=sub_seed(seed, k))))
             for k in range(count)]
    rng = random.Random(f"probe:{seed}")
    for name, alg in algs:
        rep.cases += 1
        b = separate_all(alg).algorithm
        informative = {loc: v for loc, v in b.init.items()
                       if v != default_value(b.vocab[loc[0]])}
        rep.check("static_scan", not informative, name, 0, {"init": informative})
        state = b.initial_state([0] * len(b.inputs))
        for sym in b.dynamic_symbols():
            if sym.io == "in":
                continue
            bad = [a for a in _probe_args(sym, rng, samples)
                   if state.read(sym.name, a) != default_value(sym)]
            rep.check("probe", not bad, name, 0, {"symbol": sym.name, "args": bad[:3]})
    return rep


SUITES: Dict[str, Callable[..., CosimReport]] = {
    "separate": separation_suite,
    "normalize": normalization_suite,
    "serialize": serialization_suite,
    "prune": pruning_suite,
}
