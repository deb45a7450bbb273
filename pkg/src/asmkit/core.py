"""Semantic kernel: values, symbols, vocabularies, terms, rules, states.

Term evaluation is strict and left to right, except for ``ite`` which
evaluates its guard first and then at most one branch.  Rule firing
produces an update set; detecting contradictions is a separate step
(:func:`check_and_apply`).
"""
from __future__ import annotations

import enum
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union


class Logic(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    NIL = "nil"

    def __repr__(self) -> str:
        return self.value


TRUE = Logic.TRUE
FALSE = Logic.FALSE
NIL = Logic.NIL


@dataclass(frozen=True)
class EnumValue:
    datatype: str
    name: str

    def __repr__(self) -> str:
        return f"{self.datatype}.{self.name}"


# Naturals are plain ints; never pass Python bools around as values.
Value = Union[Logic, int, EnumValue]
Args = Tuple[Value, ...]
Location = Tuple[str, Args]
Update = Tuple[Location, Value]

_LOGIC_ORDER = {TRUE: 0, FALSE: 1, NIL: 2}


def is_value(v) -> bool:
    if isinstance(v, bool):
        return False
    return isinstance(v, (Logic, EnumValue)) or (isinstance(v, int) and v >= 0)


def boolean(flag: bool) -> Logic:
    return TRUE if flag else FALSE


def value_key(v: Value):
    """Total order on values, used wherever output must be deterministic."""
    if isinstance(v, Logic):
        return (0, _LOGIC_ORDER[v], "")
    if isinstance(v, int):
        return (1, v, "")
    return (2, 0, f"{v.datatype}.{v.name}")


def args_key(args: Args):
    return tuple(value_key(a) for a in args)


def encode_value(v: Value):
    """JSON encoding: true/false/null, integers, and "Datatype.elem" strings."""
    if v is TRUE:
        return True
    if v is FALSE:
        return False
    if v is NIL:
        return None
    if isinstance(v, EnumValue):
        return f"{v.datatype}.{v.name}"
    return v


def decode_value(obj) -> Value:
    if obj is True:
        return TRUE
    if obj is False:
        return FALSE
    if obj is None:
        return NIL
    if isinstance(obj, int) and obj >= 0:
        return obj
    if isinstance(obj, str) and "." in obj:
        datatype, _, name = obj.partition(".")
        return EnumValue(datatype, name)
    raise ValueError(f"cannot decode value {obj!r}")


# ---------------------------------------------------------------------------
# Errors


class ASMError(Exception):
    """Base class for everything this package raises on purpose."""


class RunFailure(ASMError):
    """A step of an algorithm failed (the run cannot continue)."""

    kind = "Failure"

    def describe(self) -> dict:
        return {"reason": self.kind}


class UndefinedFailure(RunFailure):
    kind = "UndefinedFailure"

    def __init__(self, symbol: str, args: Args):
        super().__init__(f"{symbol} is undefined at {args!r}")
        self.symbol = symbol
        self.args = tuple(args)

    def describe(self) -> dict:
        return {"reason": self.kind, "symbol": self.symbol,
                "args": [encode_value(a) for a in self.args]}


class ContradictionFailure(RunFailure):
    kind = "ContradictionFailure"

    def __init__(self, symbol: str, args: Args, first: Value, second: Value):
        super().__init__(f"contradictory updates of {symbol}{args!r}: {first!r} vs {second!r}")
        self.symbol = symbol
        self.args = tuple(args)
        self.first = first
        self.second = second

    def describe(self) -> dict:
        return {"reason": self.kind, "symbol": self.symbol,
                "args": [encode_value(a) for a in self.args],
                "values": [encode_value(self.first), encode_value(self.second)]}


class GuardNotBoolean(RunFailure):
    kind = "GuardNotBoolean"

    def __init__(self, guard: "Term", value: Value):
        super().__init__(f"guard evaluated to non-Boolean {value!r}")
        self.guard = guard
        self.value = value

    def describe(self) -> dict:
        return {"reason": self.kind, "value": encode_value(self.value)}


class OracleStuck(ASMError):
    """An extrinsic query was issued and the oracle never answers."""

    def __init__(self, symbol: str, args: Args):
        super().__init__(f"no answer for {symbol}{args!r}")
        self.symbol = symbol
        self.args = tuple(args)

    def describe(self) -> dict:
        return {"symbol": self.symbol, "args": [encode_value(a) for a in self.args]}


class InconsistencyError(ASMError):
    def __init__(self, symbol: str, args: Optional[Args], message: str = ""):
        super().__init__(message or f"inconsistent interpretations of {symbol} at {args!r}")
        self.symbol = symbol
        self.args = args


# ---------------------------------------------------------------------------
# Symbols and vocabularies


@dataclass(frozen=True)
class Symbol:
    name: str
    arity: int
    static: bool = False
    intrinsic: bool = True
    relational: bool = False
    numerical: bool = False
    io: Optional[str] = None  # None | "in" | "out"
    position: int = 0  # 1-based input position when io == "in"

    @property
    def dynamic(self) -> bool:
        return not self.static

    @property
    def extrinsic(self) -> bool:
        return self.static and not self.intrinsic

    @property
    def default(self) -> Value:
        return default_value(self)

    def markings(self) -> tuple:
        return (self.arity, self.static, self.intrinsic if self.static else True,
                self.relational, self.numerical, self.io, self.position)


def default_value(sym: Symbol) -> Value:
    if sym.relational:
        return FALSE
    if sym.numerical:
        return 0
    return NIL


LOGIC_SYMBOLS: Dict[str, Symbol] = {
    s.name: s
    for s in (
        Symbol("eq", 2, static=True, relational=True),
        Symbol("true", 0, static=True, relational=True),
        Symbol("false", 0, static=True, relational=True),
        Symbol("nil", 0, static=True),
        Symbol("and", 2, static=True, relational=True),
        Symbol("or", 2, static=True, relational=True),
        Symbol("not", 1, static=True, relational=True),
        Symbol("ite", 3, static=True),
    )
}

RESERVED_MARK = "$"


def is_reserved(name: str) -> bool:
    return RESERVED_MARK in name


def numeral_symbol(name: str) -> Symbol:
    return Symbol(name, 0, static=True, numerical=True)


class Vocabulary:
    """Finite set of nonlogic symbols keyed by name.

    Logic symbols are always present.  When ``numerals`` is set, every decimal
    literal resolves to a nullary numerical static constant.
    """

    __slots__ = ("_symbols", "numerals")

    def __init__(self, symbols: Iterable[Symbol] = (), numerals: bool = False):
        table: Dict[str, Symbol] = {}
        for s in symbols:
            if s.name in LOGIC_SYMBOLS:
                raise InconsistencyError(s.name, None, f"cannot redeclare logic symbol {s.name}")
            old = table.get(s.name)
            if old is not None and old != s:
                raise InconsistencyError(s.name, None, f"conflicting declarations of {s.name}")
            table[s.name] = s
        self._symbols = table
        self.numerals = numerals

    def get(self, name: str) -> Optional[Symbol]:
        sym = self._symbols.get(name)
        if sym is not None:
            return sym
        sym = LOGIC_SYMBOLS.get(name)
        if sym is not None:
            return sym
        if self.numerals and name.isdigit():
            return numeral_symbol(name)
        return None

    def __getitem__(self, name: str) -> Symbol:
        sym = self.get(name)
        if sym is None:
            raise KeyError(name)
        return sym

    def __contains__(self, name: str) -> bool:
        return self.get(name) is not None

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self._symbols.values())

    def __len__(self) -> int:
        return len(self._symbols)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Vocabulary) and self._symbols == other._symbols
                and self.numerals == other.numerals)

    def __repr__(self) -> str:
        return f"Vocabulary({list(self._symbols)!r})"

    def consistent_with(self, other: "Vocabulary") -> bool:
        for s in self:
            t = other._symbols.get(s.name)
            if t is not None and t.markings() != s.markings():
                return False
        return True

    def union(self, other: "Vocabulary") -> "Vocabulary":
        if not self.consistent_with(other):
            raise InconsistencyError("", None, "vocabularies are not consistent")
        return Vocabulary(list(self) + [s for s in other if s.name not in self._symbols],
                          self.numerals or other.numerals)


def is_means_fit_effective(vocab: Iterable[Symbol]) -> bool:
    """True iff the vocabulary has no extrinsic (oracle) functions."""
    return not any(s.extrinsic for s in vocab)


# ---------------------------------------------------------------------------
# Terms and rules


@dataclass(frozen=True)
class Term:
    head: str
    args: Tuple["Term", ...] = ()

    def __repr__(self) -> str:
        if not self.args:
            return self.head
        return f"{self.head}({', '.join(map(repr, self.args))})"

    def subterms(self) -> Iterator["Term"]:
        """Post-order traversal: arguments (left to right) before the term."""
        for a in self.args:
            yield from a.subterms()
        yield self


def app(head: str, *args: Term) -> Term:
    return Term(head, tuple(args))


def const(name) -> Term:
    return Term(str(name))


T_TRUE = Term("true")
T_FALSE = Term("false")
T_NIL = Term("nil")


def t_not(t: Term) -> Term:
    return Term("not", (t,))


def t_and(a: Term, b: Term) -> Term:
    return Term("and", (a, b))


def t_eq(a: Term, b: Term) -> Term:
    return Term("eq", (a, b))


def t_ite(c: Term, a: Term, b: Term) -> Term:
    return Term("ite", (c, a, b))


class Rule:
    __slots__ = ()


@dataclass(frozen=True)
class Assign(Rule):
    target: str
    args: Tuple[Term, ...]
    rhs: Term


@dataclass(frozen=True)
class Cond(Rule):
    guard: Term
    then: Rule
    orelse: Rule


@dataclass(frozen=True)
class Par(Rule):
    rules: Tuple[Rule, ...] = ()


SKIP = Par(())


def assign(target: str, rhs: Term, *args: Term) -> Assign:
    return Assign(target, tuple(args), rhs)


def par(*rules: Rule) -> Par:
    return Par(tuple(rules))


def rule_terms(rule: Rule) -> Iterator[Term]:
    """Top-level terms of a rule in evaluation order (guards, lhs args, rhs)."""
    if isinstance(rule, Assign):
        yield from rule.args
        yield rule.rhs
    elif isinstance(rule, Cond):
        # else-if chains can be very long: walk them without recursing
        while isinstance(rule, Cond):
            yield rule.guard
            yield from rule_terms(rule.then)
            rule = rule.orelse
        yield from rule_terms(rule)
    else:
        for r in rule.rules:
            yield from rule_terms(r)


def rule_subterms(rule: Rule) -> Iterator[Term]:
    for t in rule_terms(rule):
        yield from t.subterms()


def rule_assigns(rule: Rule) -> Iterator[Assign]:
    if isinstance(rule, Assign):
        yield rule
    elif isinstance(rule, Cond):
        while isinstance(rule, Cond):
            yield from rule_assigns(rule.then)
            rule = rule.orelse
        yield from rule_assigns(rule)
    else:
        for r in rule.rules:
            yield from rule_assigns(r)


def map_rule_terms(rule: Rule, fn: Callable[[Term], Term]) -> Rule:
    if isinstance(rule, Assign):
        return Assign(rule.target, tuple(fn(a) for a in rule.args), fn(rule.rhs))
    if isinstance(rule, Cond):
        return rebuild_chain(rule, lambda c: (fn(c.guard), map_rule_terms(c.then, fn)),
                             lambda tail: map_rule_terms(tail, fn))
    return Par(tuple(map_rule_terms(r, fn) for r in rule.rules))


def else_chain(rule: Rule) -> Tuple[list, Rule]:
    """Split ``if b1 then P1 else if b2 then P2 ... else Q`` into its links and Q."""
    links = []
    while isinstance(rule, Cond):
        links.append(rule)
        rule = rule.orelse
    return links, rule


def rebuild_chain(rule: Rule, link: Callable[["Cond"], Tuple["Term", Rule]],
                  tail: Callable[[Rule], Rule]) -> Rule:
    """Map an else-if chain link by link, without recursing along it.

    ``link`` returns the new guard and then-branch of a link; it is called in
    chain order, before ``tail`` is applied to the final else-branch.
    """
    links, last = else_chain(rule)
    parts = [link(c) for c in links]
    out = tail(last)
    for g, then in reversed(parts):
        out = Cond(g, then, out)
    return out


@contextmanager
def deep_recursion(limit: int = 8000):
    """Temporarily allow deeper recursion for transforms of nested rules."""
    old = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old, limit))
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


def replace_subterm(t: Term, old: Term, new: Term) -> Term:
    """Replace every occurrence of ``old`` inside ``t`` by ``new``."""
    if t == old:
        return new
    if not t.args:
        return t
    args = tuple(replace_subterm(a, old, new) for a in t.args)
    return t if args == t.args else Term(t.head, args)


def rename_symbols(t: Term, mapping: Mapping[str, str]) -> Term:
    args = tuple(rename_symbols(a, mapping) for a in t.args)
    return Term(mapping.get(t.head, t.head), args)


# ---------------------------------------------------------------------------
# States


@dataclass
class Table:
    """Interpretation of a static symbol by a finite table.

    A partial table is undefined off its entries; a total one returns the
    symbol's default value there.
    """

    entries: Dict[Args, Value] = field(default_factory=dict)
    total: bool = False


class EvalTrace:
    """Everything evaluated while firing one rule (or evaluating one term).

    Entries are keyed by (symbol, args) and keep first-evaluation order.
    Logic symbols are not recorded.
    """

    __slots__ = ("static_evals", "dynamic_evals", "extrinsic_queries")

    def __init__(self):
        self.static_evals: Dict[Location, Value] = {}
        self.dynamic_evals: Dict[Location, Value] = {}
        self.extrinsic_queries: Dict[Location, Optional[Value]] = {}

    def evaluated(self, symbols=None) -> set:
        """Set of (symbol, args) evaluated, static and dynamic, optionally filtered."""
        keys = set(self.static_evals) | set(self.dynamic_evals)
        if symbols is not None:
            keys = {k for k in keys if k[0] in symbols}
        return keys

    def to_json(self) -> dict:
        def rows(d):
            return [[s, [encode_value(a) for a in args], encode_value(v) if v is not None else None]
                    for (s, args), v in d.items()]
        return {"static_evals": rows(self.static_evals),
                "extrinsic_queries": rows(self.extrinsic_queries)}


Oracle = Callable[[str, Args], Value]


class Frame:
    """The part of a state that never changes during a run."""

    __slots__ = ("vocab", "statics", "tables")

    def __init__(self, vocab: Vocabulary, statics, tables: Mapping[str, Table]):
        self.vocab = vocab
        self.statics = statics
        self.tables = dict(tables)


class State:
    """A first-order structure: fixed statics plus finite dynamic overrides.

    ``dynamic`` never stores a location at its default value, so two states
    over the same frame are observably equal iff their ``dynamic`` maps are.
    """

    __slots__ = ("frame", "dynamic")

    def __init__(self, frame: Frame, dynamic: Optional[Dict[Location, Value]] = None):
        self.frame = frame
        self.dynamic = dynamic if dynamic is not None else {}

    @property
    def vocab(self) -> Vocabulary:
        return self.frame.vocab

    def __eq__(self, other) -> bool:
        return isinstance(other, State) and self.dynamic == other.dynamic

    def __repr__(self) -> str:
        return f"State({self.dynamic!r})"

    def read(self, name: str, args: Args = ()) -> Value:
        sym = self.frame.vocab[name]
        if sym.static:
            raise ValueError(f"{name} is static")
        return self.dynamic.get((name, tuple(args)), default_value(sym))

    def restrict(self, names) -> Dict[Location, Value]:
        return {k: v for k, v in self.dynamic.items() if k[0] in names}

    def with_dynamic(self, dynamic: Dict[Location, Value]) -> "State":
        vocab = self.frame.vocab
        clean = {k: v for k, v in dynamic.items() if v != default_value(vocab[k[0]])}
        return State(self.frame, clean)


def apply_symbol(state: State, sym: Symbol, args: Args, trace: Optional[EvalTrace],
                 oracle: Optional[Oracle]) -> Value:
    """Apply a nonlogic basic function to already evaluated arguments."""
    name = sym.name
    if not sym.static:
        v = state.dynamic.get((name, args))
        if v is None:
            v = default_value(sym)
        if trace is not None:
            trace.dynamic_evals.setdefault((name, args), v)
        return v
    if sym.intrinsic:
        table = state.frame.tables.get(name)
        if table is not None:
            v = table.entries.get(args)
            if v is None:
                if not table.total:
                    raise UndefinedFailure(name, args)
                v = default_value(sym)
        else:
            v = state.frame.statics.apply(name, args)
    else:
        if trace is not None:
            trace.extrinsic_queries.setdefault((name, args), None)
        if oracle is None:
            raise OracleStuck(name, args)
        v = oracle(name, args)
        if trace is not None:
            trace.extrinsic_queries[(name, args)] = v
    if trace is not None:
        trace.static_evals.setdefault((name, args), v)
    return v


def eval_term(state: State, term: Term, trace: Optional[EvalTrace] = None,
              oracle: Optional[Oracle] = None) -> Value:
    """Value of ``term`` at ``state``.

    Raises UndefinedFailure at an undefined point of a partial static, and
    OracleStuck when an extrinsic query goes unanswered.
    """
    head = term.head
    if head in LOGIC_SYMBOLS:
        return _eval_logic(state, term, trace, oracle)
    sym = state.frame.vocab[head]
    args = tuple([eval_term(state, a, trace, oracle) for a in term.args])
    return apply_symbol(state, sym, args, trace, oracle)


def _eval_logic(state, term, trace, oracle) -> Value:
    head = term.head
    if head == "ite":
        c = eval_term(state, term.args[0], trace, oracle)
        if c is TRUE:
            return eval_term(state, term.args[1], trace, oracle)
        if c is FALSE:
            return eval_term(state, term.args[2], trace, oracle)
        return NIL
    if head == "true":
        return TRUE
    if head == "false":
        return FALSE
    if head == "nil":
        return NIL
    vals = [eval_term(state, a, trace, oracle) for a in term.args]
    if head == "eq":
        return TRUE if vals[0] == vals[1] else FALSE
    if any(v is not TRUE and v is not FALSE for v in vals):
        raise UndefinedFailure(head, tuple(vals))
    if head == "not":
        return FALSE if vals[0] is TRUE else TRUE
    if head == "and":
        return TRUE if vals[0] is TRUE and vals[1] is TRUE else FALSE
    return TRUE if vals[0] is TRUE or vals[1] is TRUE else FALSE


def fire(rule: Rule, state: State, trace: Optional[EvalTrace] = None,
         oracle: Optional[Oracle] = None) -> frozenset:
    """Update set produced by ``rule`` at ``state`` (possibly inconsistent)."""
    out: list = []
    _fire(rule, state, trace, oracle, out)
    return frozenset(out)


def _fire(rule, state, trace, oracle, out) -> None:
    while isinstance(rule, Cond):
        g = eval_term(state, rule.guard, trace, oracle)
        if g is TRUE:
            rule = rule.then
        elif g is FALSE:
            rule = rule.orelse
        else:
            raise GuardNotBoolean(rule.guard, g)
    if isinstance(rule, Assign):
        args = tuple([eval_term(state, a, trace, oracle) for a in rule.args])
        out.append(((rule.target, args), eval_term(state, rule.rhs, trace, oracle)))
    else:
        for r in rule.rules:
            _fire(r, state, trace, oracle, out)


def sorted_updates(updates: Iterable[Update]) -> list:
    return sorted(updates, key=lambda u: (u[0][0], args_key(u[0][1]), value_key(u[1])))


def find_contradiction(updates: Iterable[Update]) -> Optional[ContradictionFailure]:
    seen: Dict[Location, Value] = {}
    for loc, v in sorted_updates(updates):
        old = seen.get(loc)
        if old is not None and old != v:
            return ContradictionFailure(loc[0], loc[1], old, v)
        seen[loc] = v
    return None


def check_and_apply(state: State, updates: Iterable[Update]) -> State:
    """Successor state, or ContradictionFailure if the update set is inconsistent."""
    updates = list(updates)
    bad = find_contradiction(updates)
    if bad is not None:
        raise bad
    if not updates:
        return state
    vocab = state.frame.vocab
    dynamic = dict(state.dynamic)
    for (name, args), v in updates:
        sym = vocab[name]
        if sym.static:
            raise ASMError(f"update of static symbol {name}")
        if v == default_value(sym):
            dynamic.pop((name, args), None)
        else:
            dynamic[(name, args)] = v
    return State(state.frame, dynamic)
