"""Step function, run loop, oracle environments and oracle dispatch."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, TextIO, Tuple

from .algorithm import Algorithm
from .core import (
    Args, ASMError, EvalTrace, OracleStuck, RunFailure, State, Value, check_and_apply,
    decode_value, default_value, encode_value, fire, sorted_updates,
)

ADVANCED = "Advanced"
FAILED = "Failed"
STUCK = "StuckOnOracle"

OUTPUT_PRODUCED = "OutputProduced"
RUN_FAILED = "Failed"
RUN_STUCK = "Stuck"
BUDGET_EXHAUSTED = "BudgetExhausted"


class NoAnswer:
    """Responder for a genuine oracle that never replies."""

    def __call__(self, args: Args):
        return None

    def __repr__(self) -> str:
        return "NoAnswer()"


NO_ANSWER = NoAnswer()


@dataclass
class TableResponder:
    table: Dict[Args, Value]

    def __call__(self, args: Args) -> Optional[Value]:
        return self.table.get(args)


class OracleEnv:
    """Responders for extrinsic symbols.

    A responder maps an argument tuple to a value, or to None for no reply.
    Symbols without a responder never answer.
    """

    def __init__(self, responders: Optional[Mapping[str, Callable]] = None):
        self.responders: Dict[str, Callable] = dict(responders or {})

    def __call__(self, symbol: str, args: Args) -> Value:
        responder = self.responders.get(symbol, NO_ANSWER)
        v = responder(args)
        if v is None:
            raise OracleStuck(symbol, args)
        return v

    def merged(self, other: "OracleEnv") -> "OracleEnv":
        return OracleEnv({**self.responders, **other.responders})

    @classmethod
    def from_tables(cls, tables: Mapping[str, Sequence[Sequence]]) -> "OracleEnv":
        """From the JSON layout ``{symbol: [[arg, ..., value], ...]}``."""
        responders = {}
        for sym, rows in tables.items():
            table = {}
            for row in rows:
                *args, v = [decode_value(x) for x in row]
                table[tuple(args)] = v
            responders[sym] = TableResponder(table)
        return cls(responders)

    @classmethod
    def load(cls, path) -> "OracleEnv":
        with open(path) as fh:
            return cls.from_tables(json.load(fh))


EMPTY_ENV = OracleEnv()


@dataclass
class StepRecord:
    index: int
    updates: frozenset
    trace: EvalTrace
    outcome: str
    failure: Optional[RunFailure] = None
    stuck: Optional[OracleStuck] = None

    @property
    def abnormal(self) -> bool:
        return self.outcome != ADVANCED

    def to_json(self) -> dict:
        row = {"step": self.index,
               "updates": [[s, [encode_value(a) for a in args], encode_value(v)]
                           for (s, args), v in sorted_updates(self.updates)]}
        row.update(self.trace.to_json())
        if self.outcome == ADVANCED:
            row["outcome"] = ADVANCED
        elif self.outcome == FAILED:
            row["outcome"] = {FAILED: self.failure.describe()}
        else:
            row["outcome"] = {STUCK: self.stuck.describe()}
        return row


def step(alg: Algorithm, state: State, env: Optional[Callable] = None,
         index: int = 0) -> Tuple[State, StepRecord]:
    """Fire the program once; on failure or a stuck query the state is returned unchanged."""
    trace = EvalTrace()
    updates: frozenset = frozenset()
    try:
        updates = fire(alg.program, state, trace, env)
        nxt = check_and_apply(state, updates)
    except RunFailure as exc:
        return state, StepRecord(index, updates, trace, FAILED, failure=exc)
    except OracleStuck as exc:
        return state, StepRecord(index, updates, trace, STUCK, stuck=exc)
    return nxt, StepRecord(index, updates, trace, ADVANCED)


@dataclass
class RunResult:
    status: str
    output: Optional[Value]
    steps: int
    records: List[StepRecord] = field(default_factory=list)
    states: List[State] = field(default_factory=list)
    final: Optional[State] = None
    failure: Optional[RunFailure] = None
    stuck: Optional[OracleStuck] = None

    def summary(self) -> dict:
        return {"status": self.status,
                "output": encode_value(self.output) if self.output is not None else None,
                "steps": self.steps}


def output_of(alg: Algorithm, state: State) -> Optional[Value]:
    """The output value if it differs from the default, else None."""
    out = alg.output
    if out is None:
        return None
    v = state.read(out.name)
    return None if v == default_value(out) else v


def run(alg: Algorithm, inputs: Sequence[Value] = (), env: Optional[Callable] = None,
        budget: int = 10_000, *, keep_records: bool = True, keep_states: bool = False,
        on_step: Optional[Callable[[State, StepRecord, State], None]] = None,
        trace_file: Optional[TextIO] = None) -> RunResult:
    """Iterate ``step`` from the initial state until output, failure, a stuck
    query, or ``budget`` steps."""
    state = alg.initial_state(inputs)
    result = RunResult(BUDGET_EXHAUSTED, None, 0)
    if keep_states:
        result.states.append(state)
    steps = 0
    while True:
        out = output_of(alg, state)
        if out is not None:
            result.status, result.output = OUTPUT_PRODUCED, out
            break
        if steps >= budget:
            break
        nxt, rec = step(alg, state, env, steps)
        steps += 1
        if keep_records:
            result.records.append(rec)
        if trace_file is not None:
            trace_file.write(json.dumps(rec.to_json(), sort_keys=True) + "\n")
        if on_step is not None:
            on_step(state, rec, nxt)
        if rec.outcome == FAILED:
            result.status, result.failure = RUN_FAILED, rec.failure
            break
        if rec.outcome == STUCK:
            result.status, result.stuck = RUN_STUCK, rec.stuck
            break
        state = nxt
        if keep_states:
            result.states.append(state)
    result.steps = steps
    result.final = state
    if trace_file is not None:
        trace_file.write(json.dumps(result.summary(), sort_keys=True) + "\n")
    return result


class DepthExceeded(ASMError):
    pass


def oracle_dispatch_run(bundle, entry: int, inputs: Sequence[Value], budget: int = 100_000,
                        max_depth: int = 64, env: Optional[OracleEnv] = None) -> RunResult:
    """Reference semantics for a bundle: every covered extrinsic query is
    answered by recursively running the algorithm that computes it.

    Passthrough symbols are answered by ``env``.  An inner run that fails or
    gets stuck leaves the outer query unanswered.  Answers are memoized, which
    is unobservable because runs are deterministic.
    """
    base = env or EMPTY_ENV
    memo: Dict[Tuple[int, Args], Optional[Value]] = {}

    def make_env(depth: int) -> Callable:
        def answer(symbol: str, args: Args) -> Value:
            if symbol in bundle.passthrough or symbol not in bundle.coverage:
                return base(symbol, args)
            j = bundle.coverage[symbol]
            key = (j, args)
            if key not in memo:
                if depth + 1 > max_depth:
                    raise DepthExceeded(f"oracle recursion deeper than {max_depth}")
                inner = run(bundle.algorithms[j], list(args), make_env(depth + 1), budget,
                            keep_records=False)
                memo[key] = inner.output if inner.status == OUTPUT_PRODUCED else None
            v = memo[key]
            if v is None:
                raise OracleStuck(symbol, args)
            return v
        return answer

    return run(bundle.algorithms[entry], list(inputs), make_env(0), budget, keep_records=False)
