"""Datastructure backends: one-sorted structures for the static functions.

Sorts are unary static relations (``nat``, and one per enum datatype).
Logic elements belong to every structure.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

from .core import (
    FALSE, NIL, TRUE, Args, EnumValue, InconsistencyError, Logic, Symbol, UndefinedFailure,
    Value, boolean, default_value,
)

LOGIC_ELEMENTS = (TRUE, FALSE, NIL)


class Arithmetic:
    """Natural-numbers arithmetic: zero, succ, pred (pred(0) = 0), decimal literals."""

    name = "arithmetic"
    symbols = (
        Symbol("zero", 0, static=True, numerical=True),
        Symbol("succ", 1, static=True, numerical=True),
        Symbol("pred", 1, static=True, numerical=True),
        Symbol("nat", 1, static=True, relational=True),
    )
    numerals = True

    def __eq__(self, other) -> bool:
        return isinstance(other, Arithmetic)

    def __hash__(self) -> int:
        return hash("arithmetic")

    def __repr__(self) -> str:
        return "Arithmetic()"

    def contains(self, v: Value) -> bool:
        return isinstance(v, (Logic, int)) and not isinstance(v, bool)

    def elements(self):
        return None

    def owns(self, name: str) -> bool:
        return name in ("zero", "succ", "pred", "nat") or name.isdigit()

    def apply(self, name: str, args: Args) -> Value:
        if name.isdigit():
            return int(name)
        if name == "zero":
            return 0
        if name == "nat":
            return boolean(isinstance(args[0], int))
        x = args[0]
        if not isinstance(x, int):
            # outside the naturals: a numerical function's default
            return 0
        if name == "succ":
            return x + 1
        if name == "pred":
            return x - 1 if x > 0 else 0
        raise KeyError(name)


@dataclass
class EnumBackend:
    """A finite datatype; its elements are nullary constants.

    ``functions`` optionally carries finite tables over the datatype,
    keyed by symbol name: ``{name: (Symbol, {args: value})}``.
    """

    datatype: str
    elements_: Tuple[str, ...]
    functions: Dict[str, Tuple[Symbol, Dict[Args, Value]]] = field(default_factory=dict)

    def __post_init__(self):
        self.elements_ = tuple(self.elements_)

    @property
    def name(self) -> str:
        return self.datatype

    @property
    def symbols(self) -> Tuple[Symbol, ...]:
        own = [Symbol(e, 0, static=True) for e in self.elements_]
        own.append(Symbol(self.datatype, 1, static=True, relational=True))
        own.extend(sym for sym, _ in self.functions.values())
        return tuple(own)

    numerals = False

    def value(self, element: str) -> EnumValue:
        return EnumValue(self.datatype, element)

    def contains(self, v: Value) -> bool:
        if isinstance(v, Logic):
            return True
        return isinstance(v, EnumValue) and v.datatype == self.datatype and v.name in self.elements_

    def elements(self):
        return list(LOGIC_ELEMENTS) + [self.value(e) for e in self.elements_]

    def owns(self, name: str) -> bool:
        return name == self.datatype or name in self.elements_ or name in self.functions

    def apply(self, name: str, args: Args) -> Value:
        if name == self.datatype:
            return boolean(isinstance(args[0], EnumValue) and self.contains(args[0]))
        if name in self.elements_:
            return self.value(name)
        sym, table = self.functions[name]
        v = table.get(tuple(args))
        return default_value(sym) if v is None else v


class UnionStructure:
    """Union of pairwise consistent structures.

    A basic function of part i applied to a tuple not entirely inside part i
    yields the default value.
    """

    def __init__(self, parts: Sequence):
        self.parts = tuple(parts)
        owners: Dict[str, list] = {}
        for p in self.parts:
            for s in p.symbols:
                owners.setdefault(s.name, []).append((p, s))
        self._owners = owners
        self.numerals = any(getattr(p, "numerals", False) for p in self.parts)

    def __eq__(self, other) -> bool:
        return isinstance(other, UnionStructure) and self.parts == other.parts

    def __repr__(self) -> str:
        return f"UnionStructure({list(self.parts)!r})"

    @property
    def symbols(self) -> Tuple[Symbol, ...]:
        seen: Dict[str, Symbol] = {}
        for p in self.parts:
            for s in p.symbols:
                seen.setdefault(s.name, s)
        return tuple(seen.values())

    def contains(self, v: Value) -> bool:
        return any(p.contains(v) for p in self.parts)

    def elements(self):
        out = []
        for p in self.parts:
            es = p.elements()
            if es is None:
                return None
            out.extend(e for e in es if e not in out)
        return out

    def owns(self, name: str) -> bool:
        return any(p.owns(name) for p in self.parts)

    def apply(self, name: str, args: Args) -> Value:
        owners = self._owners.get(name)
        if owners is None:
            if name.isdigit() and self.numerals:
                return int(name)
            raise UndefinedFailure(name, args)
        for part, sym in owners:
            if all(part.contains(a) for a in args):
                return part.apply(name, args)
        return default_value(owners[0][1])


def _check_pair(p, q) -> None:
    qsyms = {s.name: s for s in q.symbols}
    for s in p.symbols:
        t = qsyms.get(s.name)
        if t is None:
            continue
        if s.markings() != t.markings():
            raise InconsistencyError(s.name, None, f"{s.name} has different markings in two parts")
        pe, qe = p.elements(), q.elements()
        if pe is None and qe is None:
            raise InconsistencyError(s.name, None,
                                     f"cannot verify {s.name} on two distinct infinite parts")
        shared = [e for e in (pe if pe is not None else qe)
                  if p.contains(e) and q.contains(e)]
        for args in itertools.product(shared, repeat=s.arity):
            if p.apply(s.name, args) != q.apply(s.name, args):
                raise InconsistencyError(s.name, tuple(args))


def union_structures(parts: Iterable):
    """Union of pairwise consistent structures; raises InconsistencyError otherwise."""
    unique = []
    for p in parts:
        if p not in unique:
            unique.append(p)
    for i, p in enumerate(unique):
        for q in unique[i + 1:]:
            _check_pair(p, q)
    if len(unique) == 1:
        return unique[0]
    return UnionStructure(unique)


EMPTY_STRUCTURE = UnionStructure(())
