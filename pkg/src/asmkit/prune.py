"""Pruning: inline a closed bundle of algorithms into one oracle-free algorithm.

Every extrinsic query covered by a member becomes a call: the caller
suspends, a fresh session of the callee runs on an explicit call stack, and
its output is handed back.  Member dynamics get a leading session argument
``$n`` so that every call works on a fresh, uninformative copy.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from .algorithm import Algorithm, PreconditionError
from .backends import Arithmetic
from .bundle import AlgorithmBundle, UncoveredExtrinsic
from .core import (
    T_NIL, T_TRUE, T_FALSE, Assign, Cond, Par, Rule, Symbol, Table, Term, default_value, t_eq,
    t_not,
)
from .separate import separate_all
from .serialize import SerializedAlgorithm, cascade, classify_program, serialize

TOP = "$top"
N = "$n"
MAX = "$max"
ACTIVE = "$active"
LEVEL = "$level"  # the stack level a session runs at
RET = "$ret"
TO = "$to"
INITIALIZED = "$initialized"

BOOKKEEPING = (
    Symbol(TOP, 0, numerical=True),
    Symbol(N, 0, numerical=True),
    Symbol(MAX, 0, numerical=True),
    Symbol(ACTIVE, 1, numerical=True),
    Symbol(LEVEL, 1, numerical=True),
    Symbol(RET, 1, numerical=True),
    Symbol(TO, 1),
    Symbol(INITIALIZED, 0, relational=True),
)


def _succ(t: Term) -> Term:
    return Term("succ", (t,))


def _pred(t: Term) -> Term:
    return Term("pred", (t,))


def _num(k: int) -> Term:
    return Term(str(k))


def _v(name: str, *args: Term) -> Term:
    return Term(name, tuple(args))


def member_name(i: int, name: str) -> str:
    return f"$p{i}_{name}"


@dataclass
class SessionizedMember:
    """Member ``i`` after renaming and adding the session argument."""

    index: int
    source: SerializedAlgorithm
    names: Dict[str, str]          # original declared symbol -> name in B
    session_indexed: Set[str]      # names in B that take the session argument
    decls: List[Symbol]
    tables: Dict[str, Table]
    clauses: List[Tuple[Term, Par]]

    def term(self, t: Term, session: Term = Term(N)) -> Term:
        args = tuple(self.term(a, session) for a in t.args)
        name = self.names.get(t.head, t.head)
        if name in self.session_indexed:
            args = (session,) + args
        return Term(name, args)

    def assign(self, a: Assign, session: Term = Term(N)) -> Assign:
        args = tuple(self.term(x, session) for x in a.args)
        return Assign(self.names[a.target], (session,) + args, self.term(a.rhs, session))

    def var(self, original: str, session: Term = Term(N)) -> Term:
        return self.term(Term(original), session)

    @property
    def input_names(self) -> List[str]:
        return [self.names[s.name] for s in self.source.algorithm.inputs]

    @property
    def output_name(self) -> str:
        return self.names[self.source.algorithm.output.name]


def sessionize(prog: SerializedAlgorithm, i: int,
               keep: FrozenSet[str] = frozenset()) -> SessionizedMember:
    """Rename member ``i``'s declared symbols into its own namespace and give
    every dynamic one a leading session argument.  Extrinsic symbols are left
    alone; ``keep`` is accepted for symmetry with passthrough handling."""
    alg = prog.algorithm
    names: Dict[str, str] = {}
    indexed: Set[str] = set()
    decls: List[Symbol] = []
    for s in alg.decls:
        if s.extrinsic:
            continue
        new = member_name(i, s.name)
        names[s.name] = new
        if s.dynamic:
            indexed.add(new)
            decls.append(Symbol(new, s.arity + 1, relational=s.relational,
                                numerical=s.numerical))
        else:
            decls.append(Symbol(new, s.arity, static=True, relational=s.relational,
                                numerical=s.numerical))
    tables = {names[k]: t for k, t in alg.tables.items()}
    member = SessionizedMember(i, prog, names, indexed, decls, tables, [])
    member.clauses = [(member.term(g), Par(tuple(member.assign(a) for a in body.rules)))
                      for g, body in prog.clauses]
    return member


def call_flag(i: int, k: int) -> str:
    return f"$call{i}_{k}"


def install_call(member: SessionizedMember, coverage: Dict[str, int],
                 callees: Sequence[SessionizedMember],
                 passthrough: FrozenSet[str] = frozenset()) -> Tuple[List[Tuple[Term, Rule]], List[Symbol]]:
    """Replace each covered tainted assignment by the two-step call program.

    Returns the new clauses and the session-indexed call flags they use.
    """
    out: List[Tuple[Term, Rule]] = []
    flags: List[Symbol] = []
    n, top, mx = Term(N), Term(TOP), Term(MAX)
    for k, ((guard, body), cls) in enumerate(zip(member.clauses, member.source.classification)):
        if cls.kind != "tainted" or cls.term.head in passthrough:
            out.append((guard, body))
            continue
        e = cls.term.head
        if e not in coverage:
            raise UncoveredExtrinsic(e)
        callee = callees[coverage[e]]
        if len(callee.input_names) != len(cls.term.args):
            raise PreconditionError(f"{e} has {len(cls.term.args)} arguments, its "
                                    f"algorithm takes {len(callee.input_names)} inputs")
        flag = call_flag(member.index, k)
        flags.append(Symbol(flag, 1, relational=True))
        fresh = _succ(mx)
        call = [
            Assign(TOP, (), _succ(top)),
            Assign(ACTIVE, (_succ(top),), _num(callee.index)),
            Assign(N, (), fresh),
            Assign(MAX, (), fresh),
            Assign(LEVEL, (fresh,), _succ(top)),
        ]
        call += [Assign(name, (fresh,), member.term(arg))
                 for name, arg in zip(callee.input_names, cls.term.args)]
        call += [Assign(RET, (fresh,), n), Assign(flag, (n,), T_TRUE)]
        target = member.names[cls.variable]
        rest = tuple(member.assign(a) for a in cls.rest)
        resume = Par((Assign(target, (n,), _v(TO, n)),) + rest + (Assign(flag, (n,), T_FALSE),))
        admin = Cond(t_not(_v(flag, n)), Par(tuple(call)),
                     Cond(t_eq(_v(LEVEL, n), top), resume, Par(())))
        out.append((guard, admin))
    return out, flags


def install_return(member: SessionizedMember, clauses: Sequence[Tuple[Term, Rule]],
                   literal: bool = False) -> Rule:
    """``Pi_i^+``: run the member until its output exists, then return it.

    With ``literal`` the session returns at its first completed mega-step,
    output or not; kept only to study that variant.
    """
    n = Term(N)
    done = member.var(member.source.done)
    out = _v(member.output_name, n)
    ret = Par((Assign(TOP, (), _pred(Term(TOP))), Assign(N, (), _v(RET, n)),
               Assign(TO, (_v(RET, n),), out)))
    body = cascade(clauses)
    if literal:
        return Cond(t_not(done), body, ret)
    reset = Assign(done.head, done.args, T_FALSE)
    return Cond(t_not(done), body, Cond(t_eq(out, T_NIL), reset, ret))


@dataclass
class PrunedAlgorithm:
    algorithm: Algorithm
    members: List[SessionizedMember]
    bundle: AlgorithmBundle
    literal_return: bool = False

    @property
    def session_indexed(self) -> Set[str]:
        names = {LEVEL, RET, TO}
        for m in self.members:
            names |= m.session_indexed
        names |= {s.name for s in self.algorithm.decls if s.name.startswith("$call")}
        return names


def prepare_member(alg: Algorithm, assume_serialized: bool = False) -> SerializedAlgorithm:
    """Bring a member into serialized shape with no informative dynamics."""
    if assume_serialized:
        if alg.init:
            raise PreconditionError("serialized members must start uninformative")
        return classify_program(alg)
    informative = sorted({name for (name, _), v in alg.init.items()
                          if v != default_value(alg.vocab[name])})
    if informative:
        alg = separate_all(alg, only=[n for n in (s.name for s in alg.decls)
                                      if n in informative]).algorithm
    return serialize(alg)


def prune(bundle: AlgorithmBundle, assume_serialized: bool = False,
          literal_return: bool = False) -> PrunedAlgorithm:
    bundle.validate()
    bundle = bundle.deduplicated()
    passthrough = bundle.passthrough
    prepared = [prepare_member(a, assume_serialized) for a in bundle.algorithms]
    members = [sessionize(p, i, passthrough) for i, p in enumerate(prepared)]

    decls: List[Symbol] = []
    entry = bundle.algorithms[0]
    io = list(entry.inputs) + [entry.output]
    decls.extend(io)
    decls.extend(BOOKKEEPING)
    tables: Dict[str, Table] = {}
    toil: List[Rule] = []
    extrinsic: Dict[str, Symbol] = {}
    for m in members:
        clauses, flags = install_call(m, bundle.coverage, members, passthrough)
        decls.extend(m.decls)
        decls.extend(flags)
        tables.update(m.tables)
        for s in m.source.algorithm.extrinsic_symbols():
            if s.name in passthrough:
                old = extrinsic.setdefault(s.name, s)
                if old != s:
                    raise PreconditionError(f"passthrough {s.name} declared inconsistently")
        plus = install_return(m, clauses, literal_return)
        toil.append(Cond(t_eq(_v(ACTIVE, Term(TOP)), _num(m.index)), plus, Par(())))
    taken = {s.name for s in decls}
    for name in extrinsic:
        if name in taken:
            raise PreconditionError(f"passthrough {name} clashes with another symbol")
    decls.extend(extrinsic[k] for k in sorted(extrinsic))

    m0 = members[0]
    zero = _num(0)
    initialize = Par(tuple(Assign(name, (zero,), Term(s.name))
                           for name, s in zip(m0.input_names, entry.inputs))
                     + (Assign(INITIALIZED, (), T_TRUE),))
    out0 = _v(m0.output_name, zero)
    program = Cond(t_not(Term(INITIALIZED)), initialize,
                   Cond(t_eq(out0, T_NIL), Par(tuple(toil)),
                        Assign(entry.output.name, (), out0)))

    backends = [Arithmetic()]
    for a in bundle.algorithms:
        for b in a.backends:
            if b not in backends:
                backends.append(b)
    alg = Algorithm(tuple(decls), program, tuple(backends), tables, {})
    alg.statics  # union check raises on inconsistent datastructures
    alg.vocab
    return PrunedAlgorithm(alg, members, bundle, literal_return)


# ---------------------------------------------------------------------------
# Stack audit


@dataclass
class StackAudit:
    """Checks the call-stack invariants of a pruned algorithm step by step.

    Feed it ``(before, record, after)`` triples, e.g. as ``run(on_step=...)``.
    """

    pruned: PrunedAlgorithm
    violations: List[str] = field(default_factory=list)
    assigned: Set[int] = field(default_factory=set)
    finished: Set[int] = field(default_factory=set)
    steps: int = 0

    def _fail(self, msg: str) -> None:
        if len(self.violations) < 20:
            self.violations.append(f"step {self.steps}: {msg}")

    def __call__(self, before, record, after) -> None:
        read = before.read
        top, mx, n = read(TOP), read(MAX), read(N)
        if not top <= mx:
            self._fail(f"top {top} > max {mx}")
        out0 = self.pruned.members[0].output_name
        toil = read(INITIALIZED) is T_TRUE and read(out0, (0,)) is T_NIL
        if toil:
            active = read(ACTIVE, (top,))
            if not (isinstance(active, int) and active < len(self.pruned.members)):
                self._fail(f"active({top}) = {active!r} names no member")
            if read(LEVEL, (n,)) != top:
                self._fail(f"session {n} runs at level {read(LEVEL, (n,))}, top is {top}")
        indexed = self.pruned.session_indexed
        for (name, args) in record.trace.dynamic_evals:
            if name in indexed and args and args[0] in self.finished:
                self._fail(f"abandoned session {args[0]} read via {name}")
        if record.outcome == "Advanced":
            new_n, new_max = after.read(N), after.read(MAX)
            if new_max != mx:
                if new_max != mx + 1 or new_n != new_max or new_max in self.assigned:
                    self._fail(f"session {new_max} is not fresh")
                self.assigned.add(new_max)
            elif new_n != n and after.read(TOP) == top - 1:
                self.finished.add(n)
            out = self.pruned.algorithm.output
            if after.read(out.name) != default_value(out) and after.read(TOP) != 0:
                self._fail("finished with a non-empty stack")
        self.steps += 1

    @property
    def ok(self) -> bool:
        return not self.violations
