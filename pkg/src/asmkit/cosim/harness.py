"""Co-simulation of original/transformed pairs with per-claim verdicts."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence

from ..algorithm import Algorithm
from ..core import (
    ContradictionFailure, EvalTrace, GuardNotBoolean, OracleStuck, RunFailure, State, TRUE,
    FALSE, Term, UndefinedFailure, Value, default_value, encode_value, eval_term, fire,
    rule_subterms,
)
from ..interp import (
    ADVANCED, FAILED, OUTPUT_PRODUCED, OracleEnv, oracle_dispatch_run, output_of, run, step,
)
from ..normalize import normalize
from ..parser import format_term
from ..prune import StackAudit, prune
from ..separate import SeparationCert
from ..serialize import SerializedAlgorithm


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [_jsonable(x) for x in obj]
        return sorted(items, key=repr) if isinstance(obj, (set, frozenset)) else items
    if isinstance(obj, Term):
        return format_term(obj)
    if obj is None or isinstance(obj, (str, int, float, bool)):
        return obj
    try:
        return encode_value(obj)
    except Exception:
        return repr(obj)


@dataclass
class Divergence:
    case: str
    step: int
    claim: str
    witness: dict

    def to_json(self) -> dict:
        return {"case": self.case, "step": self.step, "claim": self.claim,
                "witness": _jsonable(self.witness)}


@dataclass
class CosimReport:
    """Per-claim check counts and the first divergence, if any."""

    name: str
    cases: int = 0
    steps: int = 0
    checks: Dict[str, int] = field(default_factory=dict)
    failures: Dict[str, int] = field(default_factory=dict)
    first: Optional[Divergence] = None
    info: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def check(self, claim: str, ok: bool, case: str = "", step: int = 0,
              witness: Optional[dict] = None) -> bool:
        self.checks[claim] = self.checks.get(claim, 0) + 1
        if not ok:
            self.failures[claim] = self.failures.get(claim, 0) + 1
            if self.first is None:
                self.first = Divergence(case, step, claim, witness or {})
        return ok

    def absorb(self, other: "CosimReport") -> None:
        self.cases += other.cases
        self.steps += other.steps
        for k, v in other.checks.items():
            self.checks[k] = self.checks.get(k, 0) + v
        for k, v in other.failures.items():
            self.failures[k] = self.failures.get(k, 0) + v
        if self.first is None and other.first is not None:
            self.first = other.first

    def to_json(self) -> dict:
        return {"name": self.name, "status": self.status, "cases": self.cases,
                "steps": self.steps, "checks": dict(sorted(self.checks.items())),
                "failures": dict(sorted(self.failures.items())),
                "first_divergence": self.first.to_json() if self.first else None,
                "info": _jsonable(self.info)}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2)


def _outcome_class(exc) -> str:
    if exc is None:
        return "ok"
    if isinstance(exc, UndefinedFailure):
        return "undefined"
    if isinstance(exc, ContradictionFailure):
        return "contradiction"
    if isinstance(exc, GuardNotBoolean):
        return "guard"
    if isinstance(exc, OracleStuck):
        return "stuck"
    return type(exc).__name__


def clashes(updates) -> set:
    """Locations receiving more than one value."""
    seen: Dict = {}
    for loc, v in updates:
        seen.setdefault(loc, set()).add(v)
    return {loc for loc, vs in seen.items() if len(vs) > 1}


def _eval_or_exc(state, term, env):
    try:
        return eval_term(state, term, None, env), None
    except (RunFailure, OracleStuck) as exc:
        return None, exc


# ---------------------------------------------------------------------------
# Separation


def separated_value(cert: SeparationCert, state: State, f: str, args) -> Value:
    """``ite(delta(x), d(x), s(x))`` read off a state of the separated algorithm."""
    names = cert.renaming[f]
    if state.read(names.marker, args) is TRUE:
        return state.read(names.updated, args)
    table = state.frame.tables[names.static]
    v = table.entries.get(tuple(args))
    return default_value(state.vocab[names.static]) if v is None else v


def verify_separation(alg: Algorithm, cert: SeparationCert, inputs: Sequence[Value] = (),
                      env: Optional[Callable] = None, budget: int = 20,
                      case: str = "", report: Optional[CosimReport] = None) -> CosimReport:
    """Lock-step runs of ``alg`` and ``cert.algorithm``.

    Claims: (a) the separated triple interprets f pointwise; (b) every other
    symbol is evaluated at the same arguments; (c) every program term has
    the same value once rewritten; (d) f's reads become delta reads, and d
    (s) is read only where delta is true (false); (e) failures coincide,
    with matching scenario class.
    """
    rep = report or CosimReport("separation")
    rep.cases += 1
    sep = cert.renaming
    b_alg = cert.algorithm
    sa, sb = alg.initial_state(inputs), b_alg.initial_state(inputs)
    kept = {s.name for s in alg.vocab if s.name not in sep}
    dyn_kept = {s.name for s in alg.dynamic_symbols() if s.name not in sep}
    terms = list(dict.fromkeys(rule_subterms(alg.program)))
    for k in range(budget):
        out_a, out_b = output_of(alg, sa), output_of(b_alg, sb)
        rep.check("objective", out_a == out_b, case, k, {"a": out_a, "b": out_b})
        if out_a is not None or out_b is not None:
            break
        # (a)
        for f, names in sep.items():
            arity = alg.vocab[f].arity
            points = {args for (n, args) in sa.dynamic if n == f}
            points |= {args for (n, args) in sb.dynamic if n in (names.updated, names.marker)}
            points |= set(b_alg.tables[names.static].entries)
            points |= {tuple([v] * arity) for v in range(3)}
            for args in sorted(points, key=repr):
                va, vb = sa.read(f, args), separated_value(cert, sb, f, args)
                if not rep.check("a", va == vb, case, k, {"symbol": f, "args": args,
                                                          "a": va, "b": vb}):
                    break
        rep.check("a", sa.restrict(dyn_kept) == sb.restrict(dyn_kept), case, k,
                  {"a": sa.restrict(dyn_kept), "b": sb.restrict(dyn_kept)})
        # (c)
        for t in terms:
            va, ea = _eval_or_exc(sa, t, env)
            vb, eb = _eval_or_exc(sb, cert.rewrite(t), env)
            ok = _outcome_class(ea) == _outcome_class(eb) and va == vb
            if not rep.check("c", ok, case, k, {"term": t, "a": va, "b": vb,
                                               "a_exc": _outcome_class(ea),
                                               "b_exc": _outcome_class(eb)}):
                break
        na, ra = step(alg, sa, env, k)
        nb, rb = step(b_alg, sb, env, k)
        rep.steps += 1
        # (e)
        exc_a = ra.failure or ra.stuck
        exc_b = rb.failure or rb.stuck
        ok = ra.outcome == rb.outcome and _outcome_class(exc_a) == _outcome_class(exc_b)
        if ok and isinstance(exc_a, (UndefinedFailure, OracleStuck)):
            ok = (exc_a.symbol, exc_a.args) == (exc_b.symbol, exc_b.args)
        if ok and isinstance(exc_a, ContradictionFailure):
            rename = {f: names.updated for f, names in sep.items()}
            expected = {(rename.get(n, n), args) for n, args in clashes(ra.updates)}
            ok = expected == clashes(rb.updates)
        rep.check("e", ok, case, k, {"a": _outcome_class(exc_a), "b": _outcome_class(exc_b),
                                     "a_detail": exc_a and exc_a.describe(),
                                     "b_detail": exc_b and exc_b.describe()})
        if ra.outcome != ADVANCED or rb.outcome != ADVANCED:
            break
        # (b)
        ev_a, ev_b = ra.trace.evaluated(kept), rb.trace.evaluated(kept)
        rep.check("b", ev_a == ev_b, case, k, {"only_a": ev_a - ev_b, "only_b": ev_b - ev_a})
        # (d)
        for f, names in sep.items():
            read_f = {args for (n, args) in ra.trace.dynamic_evals if n == f}
            read_delta = {args for (n, args) in rb.trace.dynamic_evals if n == names.marker}
            rep.check("d", read_f == read_delta, case, k,
                      {"symbol": f, "f_reads": read_f, "delta_reads": read_delta})
            for (n, args) in rb.trace.dynamic_evals:
                if n == names.updated:
                    rep.check("d", sb.read(names.marker, args) is TRUE, case, k,
                              {"symbol": n, "args": args})
            for (n, args) in rb.trace.static_evals:
                if n == names.static:
                    rep.check("d", sb.read(names.marker, args) is FALSE, case, k,
                              {"symbol": n, "args": args})
        sa, sb = na, nb
    return rep


# ---------------------------------------------------------------------------
# Normalization


def _fire_traced(rule, state, env):
    trace = EvalTrace()
    try:
        return fire(rule, state, trace, env), trace, None
    except (RunFailure, OracleStuck) as exc:
        return None, trace, exc


def verify_normalization(rule, states: Iterable[State], env: Optional[Callable] = None,
                         case: str = "", report: Optional[CosimReport] = None) -> CosimReport:
    """Same update set, evaluation set and query set at every given state;
    abnormal (failed or stuck) in one iff abnormal in the other."""
    rep = report or CosimReport("normalization")
    rep.cases += 1
    normal = normalize(rule).to_rule()
    for k, st in enumerate(states):
        rep.steps += 1
        ua, ta, ea = _fire_traced(rule, st, env)
        ub, tb, eb = _fire_traced(normal, st, env)
        if not rep.check("abnormal", (ea is None) == (eb is None), case, k,
                         {"a": _outcome_class(ea), "b": _outcome_class(eb), "state": st.dynamic}):
            continue
        if ea is not None:
            continue
        rep.check("updates", ua == ub, case, k,
                  {"only_a": ua - ub, "only_b": ub - ua, "state": st.dynamic})
        rep.check("evaluations", ta.evaluated() == tb.evaluated(), case, k,
                  {"only_a": ta.evaluated() - tb.evaluated(),
                   "only_b": tb.evaluated() - ta.evaluated(), "state": st.dynamic})
        rep.check("queries", set(ta.extrinsic_queries) == set(tb.extrinsic_queries), case, k,
                  {"a": set(ta.extrinsic_queries), "b": set(tb.extrinsic_queries)})
    return rep


# ---------------------------------------------------------------------------
# Serialization


def verify_serialization(alg: Algorithm, ser: SerializedAlgorithm,
                         inputs: Sequence[Value] = (), env: Optional[Callable] = None,
                         mega_steps: int = 10, case: str = "",
                         report: Optional[CosimReport] = None) -> CosimReport:
    """Each step of ``alg`` against one mega-step of the serialized algorithm."""
    rep = report or CosimReport("serialization")
    rep.cases += 1
    b_alg, done = ser.algorithm, ser.done
    ref = run(alg, inputs, env, mega_steps, keep_states=True)
    names = {s.name for s in alg.dynamic_symbols()}
    sb = b_alg.initial_state(inputs)
    cap = 4 * (ser.bound or 64) + 16
    idx = 0
    for k, rec in enumerate(ref.records):
        length, union = 0, set()
        finished = False
        while True:
            nb, rb = step(b_alg, sb, env, idx)
            idx += 1
            length += 1
            queries = set(rb.trace.extrinsic_queries)
            rep.check("one_query", len(queries) <= 1, case, idx, {"queries": queries})
            union |= queries
            if rb.abnormal:
                rep.check("failure", rec.abnormal and rec.outcome == rb.outcome, case, k,
                          {"a": rec.outcome, "b": rb.outcome})
                finished = True
                break
            sb = nb
            if sb.read(done) is TRUE:
                break
            if length > cap:
                rep.check("bound", False, case, k, {"length": length, "bound": ser.bound})
                return rep
        if finished:
            return rep
        rep.steps += 1
        rep.check("failure", not rec.abnormal, case, k, {"a": rec.outcome, "b": "Advanced"})
        want = ref.states[k + 1].restrict(names)
        got = sb.restrict(names)
        rep.check("state", got == want, case, k, {"a": want, "b": got})
        rep.check("query_union", union == set(rec.trace.extrinsic_queries), case, k,
                  {"a": set(rec.trace.extrinsic_queries), "b": union})
        if output_of(b_alg, sb) is not None:
            break
        nb, rb = step(b_alg, sb, env, idx)
        idx += 1
        length += 1
        rep.check("reset", rb.outcome == ADVANCED and not rb.trace.extrinsic_queries
                  and nb.read(done) is FALSE, case, k, {"outcome": rb.outcome})
        sb = nb
        if ser.bound is not None:
            rep.check("bound", length <= ser.bound, case, k, {"length": length,
                                                              "bound": ser.bound})
    rep.info["mega_steps"] = rep.info.get("mega_steps", 0) + len(ref.records)
    return rep


# ---------------------------------------------------------------------------
# Pruning


def verify_pruning(bundle, inputs: Iterable[Sequence[Value]], budget: int = 200_000,
                   env: Optional[OracleEnv] = None, case: str = "",
                   report: Optional[CosimReport] = None, **prune_options) -> CosimReport:
    """Pruned runs against oracle dispatch over ``inputs``, with the stack audit."""
    rep = report or CosimReport("pruning")
    pruned = prune(bundle, **prune_options)
    b_alg = pruned.algorithm
    extra = {s.name for s in b_alg.vocab if s.extrinsic} - set(bundle.passthrough)
    rep.check("no_extrinsic", not extra, case, 0, {"extrinsic": extra})
    outputs = rep.info.setdefault("outputs", {})
    for xs in inputs:
        rep.cases += 1
        audit = StackAudit(pruned)
        got = run(b_alg, list(xs), env, budget, keep_records=False, on_step=audit)
        ref = oracle_dispatch_run(bundle, 0, list(xs), budget, env=env)
        rep.steps += got.steps
        label = f"{case}{list(xs)}"
        outputs[label] = {"output": got.output, "steps": got.steps}
        rep.check("output", got.status == OUTPUT_PRODUCED and ref.status == OUTPUT_PRODUCED
                  and got.output == ref.output, label, got.steps,
                  {"pruned": got.summary(), "reference": ref.summary()})
        rep.check("stack", audit.ok, label, audit.steps, {"violations": audit.violations})
    return rep
