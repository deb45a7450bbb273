"""Random well-typed algorithms for differential testing.

Three value types: booleans (relational symbols), naturals (numeric
symbols) and colors (an enum, plain symbols).  Everything is derived from
the config seed, so the same config always yields the same algorithm.
"""
from __future__ import annotations

import random
import zlib
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from ..algorithm import Algorithm
from ..backends import Arithmetic, EnumBackend
from ..core import (
    FALSE, NIL, TRUE, Assign, Cond, EnumValue, Par, Rule, Symbol, Table, Term, Value, boolean,
)
from ..interp import OracleEnv

BOOL, NAT, COLOR = "bool", "nat", "color"
COLORS = ("red", "green", "blue")
COLOR_BACKEND = EnumBackend("Color", COLORS)


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    min_dynamic: int = 2
    max_dynamic: int = 5
    max_term_depth: int = 3
    max_rule_depth: int = 4
    max_par_width: int = 3
    n_extrinsic: int = 0
    with_table: bool = True
    with_output: bool = False
    n_inputs: int = 0
    init_prob: float = 0.5
    max_symbols: int = 10
    # relative weights of assign / par / cond / skip
    weights: Tuple[int, int, int, int] = (4, 2, 3, 1)
    lazy_queries: bool = True  # allow extrinsic terms inside ite branches


@dataclass
class _Sym:
    name: str
    type: str
    arity: int
    kind: str  # "dynamic" | "table" | "extrinsic"


def _type_flags(ty: str) -> Dict[str, bool]:
    return {"relational": ty == BOOL, "numerical": ty == NAT}


class _Gen:
    def __init__(self, cfg: GenConfig):
        self.cfg = cfg
        self.rng = random.Random(f"asmgen:{cfg.seed}")
        self.syms: List[_Sym] = []

    # -- vocabulary ------------------------------------------------------
    def vocabulary(self) -> None:
        cfg, rng = self.cfg, self.rng
        budget = cfg.max_symbols - cfg.n_extrinsic - int(cfg.with_table) \
            - int(cfg.with_output) - cfg.n_inputs
        n_dyn = max(1, min(budget, rng.randint(cfg.min_dynamic, cfg.max_dynamic)))
        counts = {BOOL: 0, NAT: 0, COLOR: 0}
        for k in range(n_dyn):
            ty = (BOOL, NAT, COLOR)[k] if k < 3 else rng.choice((BOOL, NAT, COLOR))
            counts[ty] += 1
            prefix = {BOOL: "b", NAT: "n", COLOR: "c"}[ty]
            arity = 1 if rng.random() < 0.25 else 0
            self.syms.append(_Sym(f"{prefix}{counts[ty]}", ty, arity, "dynamic"))
        if cfg.with_table:
            self.syms.append(_Sym("tbl", NAT, 1, "table"))
        for k in range(cfg.n_extrinsic):
            ty = rng.choice((NAT, NAT, BOOL))
            self.syms.append(_Sym(f"e{k + 1}", ty, 1, "extrinsic"))
        for k in range(cfg.n_inputs):
            self.syms.append(_Sym(f"x{k + 1}", NAT, 0, "input"))

    def of(self, ty: str, kinds=("dynamic", "input", "table", "extrinsic")) -> List[_Sym]:
        return [s for s in self.syms if s.type == ty and s.kind in kinds]

    # -- terms -----------------------------------------------------------
    def const(self, ty: str) -> Term:
        if ty == BOOL:
            return Term(self.rng.choice(("true", "false")))
        if ty == NAT:
            return Term(str(self.rng.randint(0, 3)))
        return Term(self.rng.choice(COLORS))

    def term(self, ty: str, depth: int, queries: bool = True) -> Term:
        rng = self.rng
        kinds = ("dynamic", "input", "table", "extrinsic") if queries else ("dynamic", "input", "table")
        syms = self.of(ty, kinds)
        if depth <= 0 or rng.random() < 0.3:
            leaves = [s for s in syms if s.arity == 0]
            if leaves and rng.random() < 0.7:
                return Term(rng.choice(leaves).name)
            return self.const(ty)
        choices = ["sym", "ite"] if syms else ["ite"]
        if ty == BOOL:
            choices += ["eq", "not", "and", "or"]
        elif ty == NAT:
            choices += ["succ", "pred"]
        pick = rng.choice(choices)
        d = depth - 1
        if pick == "sym":
            s = rng.choice(syms)
            args = tuple(self.term(NAT, d, queries) for _ in range(s.arity))
            return Term(s.name, args)
        if pick == "ite":
            inner = queries and self.cfg.lazy_queries
            return Term("ite", (self.term(BOOL, d, queries), self.term(ty, d, inner),
                                self.term(ty, d, inner)))
        if pick == "eq":
            sub = rng.choice((BOOL, NAT, COLOR))
            return Term("eq", (self.term(sub, d, queries), self.term(sub, d, queries)))
        if pick == "not":
            return Term("not", (self.term(BOOL, d, queries),))
        if pick in ("and", "or"):
            return Term(pick, (self.term(BOOL, d, queries), self.term(BOOL, d, queries)))
        return Term(pick, (self.term(NAT, d, queries),))

    # -- rules -----------------------------------------------------------
    def rule(self, depth: int) -> Rule:
        rng, cfg = self.rng, self.cfg
        forms = ["assign", "par", "cond", "skip"]
        weights = list(cfg.weights)
        if depth == 0:
            weights = [weights[0], 3 * weights[1], 3 * weights[2], 0]
        elif depth >= cfg.max_rule_depth:
            weights = [weights[0], 0, 0, weights[3]]
        form = rng.choices(forms, weights)[0]
        if form == "skip":
            return Par(())
        if form == "par":
            width = rng.randint(2, cfg.max_par_width)
            return Par(tuple(self.rule(depth + 1) for _ in range(width)))
        if form == "cond":
            guard = self.term(BOOL, cfg.max_term_depth)
            orelse = self.rule(depth + 1) if rng.random() < 0.6 else Par(())
            return Cond(guard, self.rule(depth + 1), orelse)
        targets = [s for s in self.syms if s.kind == "dynamic"]
        if self.cfg.with_output and rng.random() < 0.1:
            return Assign("out", (), self.term(COLOR, 1))
        s = rng.choice(targets)
        args = tuple(self.term(NAT, 1) for _ in range(s.arity))
        return Assign(s.name, args, self.term(s.type, cfg.max_term_depth))

    def value(self, ty: str) -> Value:
        if ty == BOOL:
            return boolean(self.rng.random() < 0.5)
        if ty == NAT:
            return self.rng.randint(0, 4)
        return EnumValue("Color", self.rng.choice(COLORS))

    def algorithm(self) -> Algorithm:
        self.vocabulary()
        decls: List[Symbol] = []
        for k in range(self.cfg.n_inputs):
            decls.append(Symbol(f"x{k + 1}", 0, numerical=True, io="in", position=k + 1))
        if self.cfg.with_output:
            decls.append(Symbol("out", 0, io="out"))
        tables: Dict[str, Table] = {}
        init = {}
        for s in self.syms:
            flags = _type_flags(s.type)
            if s.kind == "dynamic":
                decls.append(Symbol(s.name, s.arity, **flags))
                if s.arity == 0:
                    if self.rng.random() < self.cfg.init_prob:
                        init[(s.name, ())] = self.value(s.type)
                else:
                    for a in range(3):
                        if self.rng.random() < self.cfg.init_prob / 2:
                            init[(s.name, (a,))] = self.value(s.type)
            elif s.kind == "table":
                decls.append(Symbol(s.name, 1, static=True, **flags))
                tables[s.name] = Table({(a,): self.rng.randint(0, 4) for a in range(3)})
            elif s.kind == "extrinsic":
                decls.append(Symbol(s.name, 1, static=True, intrinsic=False, **flags))
        program = self.rule(0)
        return Algorithm(tuple(decls), program, (Arithmetic(), COLOR_BACKEND), tables, init)


def generate(config: GenConfig) -> Algorithm:
    return _Gen(config).algorithm()


@dataclass
class HashResponder:
    """Total responder: a fixed pseudo-random function of the arguments."""

    salt: str
    relational: bool = False
    modulus: int = 5

    def __call__(self, args) -> Value:
        h = zlib.crc32(f"{self.salt}:{args!r}".encode())
        if self.relational:
            return TRUE if h % 2 else FALSE
        return h % self.modulus


def responders_for(alg: Algorithm, seed: int = 0) -> OracleEnv:
    """Deterministic answers for every extrinsic symbol of ``alg``."""
    return OracleEnv({s.name: HashResponder(f"{seed}:{s.name}", s.relational)
                      for s in alg.extrinsic_symbols()})


def random_state(alg: Algorithm, rng: random.Random, base=None, locations: Optional[list] = None):
    """A state of ``alg`` with random values at a few locations of each dynamic."""
    state = base if base is not None else alg.initial_state([0] * len(alg.inputs))
    dynamic = dict(state.dynamic)
    for s in alg.dynamic_symbols():
        points = [()] if s.arity == 0 else [(a,) for a in range(4)]
        for p in points:
            if rng.random() < 0.7:
                dynamic[(s.name, p)] = _random_value(s, rng)
    return state.with_dynamic(dynamic)


def _random_value(s: Symbol, rng: random.Random) -> Value:
    if s.relational:
        return boolean(rng.random() < 0.5)
    if s.numerical:
        return rng.randint(0, 4)
    return rng.choice([NIL] + [EnumValue("Color", c) for c in COLORS])
