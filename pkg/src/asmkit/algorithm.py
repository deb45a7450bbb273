"""Algorithms: a vocabulary, backends, static tables, initial values, a program."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .backends import EMPTY_STRUCTURE, union_structures
from .core import (
    Args, ASMError, Frame, Location, Rule, State, Symbol, Table, Value, Vocabulary,
    default_value, is_reserved,
)


class PreconditionError(ASMError):
    pass


@dataclass(eq=True)
class Algorithm:
    """A sequential ASM together with its initial-state description.

    ``decls`` are the declared (non-backend) symbols in declaration order.
    Input variables are bound at run time; every other dynamic location
    starts at its default unless listed in ``init``.
    """

    decls: Tuple[Symbol, ...]
    program: Rule
    backends: Tuple = ()
    tables: Dict[str, Table] = field(default_factory=dict)
    init: Dict[Location, Value] = field(default_factory=dict)

    def __post_init__(self):
        self.decls = tuple(self.decls)
        self.backends = tuple(self.backends)

    @cached_property
    def statics(self):
        return union_structures(self.backends) if self.backends else EMPTY_STRUCTURE

    @cached_property
    def vocab(self) -> Vocabulary:
        syms: List[Symbol] = []
        for b in self.backends:
            syms.extend(b.symbols)
        syms.extend(self.decls)
        return Vocabulary(syms, numerals=any(b.numerals for b in self.backends))

    @cached_property
    def frame(self) -> Frame:
        return Frame(self.vocab, self.statics, self.tables)

    @property
    def inputs(self) -> List[Symbol]:
        return sorted((s for s in self.decls if s.io == "in"), key=lambda s: s.position)

    @property
    def output(self) -> Optional[Symbol]:
        for s in self.decls:
            if s.io == "out":
                return s
        return None

    def decl(self, name: str) -> Optional[Symbol]:
        for s in self.decls:
            if s.name == name:
                return s
        return None

    def dynamic_symbols(self) -> List[Symbol]:
        return [s for s in self.decls if s.dynamic]

    def extrinsic_symbols(self) -> List[Symbol]:
        return [s for s in self.decls if s.extrinsic]

    def has_reserved(self) -> bool:
        return any(is_reserved(s.name) for s in self.decls)

    def evolve(self, **changes) -> "Algorithm":
        return replace(self, **changes)

    def initial_state(self, inputs: Sequence[Value] = ()) -> State:
        ins = self.inputs
        if len(inputs) != len(ins):
            raise PreconditionError(f"expected {len(ins)} inputs, got {len(inputs)}")
        dynamic: Dict[Location, Value] = {}
        for loc, v in self.init.items():
            if v != default_value(self.vocab[loc[0]]):
                dynamic[loc] = v
        for sym, v in zip(ins, inputs):
            if v != default_value(sym):
                dynamic[(sym.name, ())] = v
            else:
                dynamic.pop((sym.name, ()), None)
        return State(self.frame, dynamic)


SourceUnit = Algorithm


def fresh_name(taken: Iterable[str], base: str) -> str:
    """``base`` if unused, else ``base$2``, ``base$3``, ..."""
    taken = set(taken)
    if base not in taken:
        return base
    k = 2
    while f"{base}${k}" in taken:
        k += 1
    return f"{base}${k}"
