"""Algorithm bundles: members plus a map from extrinsic symbols to the member computing them."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List

from .algorithm import Algorithm, PreconditionError
from .parser import parse, print_unit


class UncoveredExtrinsic(PreconditionError):
    def __init__(self, symbol: str):
        super().__init__(f"extrinsic {symbol} is neither covered nor passthrough")
        self.symbol = symbol


@dataclass
class AlgorithmBundle:
    algorithms: List[Algorithm]
    coverage: Dict[str, int]
    passthrough: FrozenSet[str] = field(default_factory=frozenset)

    def __post_init__(self):
        self.passthrough = frozenset(self.passthrough)

    def validate(self) -> None:
        n = len(self.algorithms)
        for sym, j in self.coverage.items():
            if not 0 <= j < n:
                raise PreconditionError(f"coverage of {sym} points at missing member {j}")
        for alg in self.algorithms:
            if alg.output is None:
                raise PreconditionError("every bundle member must have an output variable")
            for s in alg.extrinsic_symbols():
                if s.name in self.passthrough:
                    continue
                if s.name not in self.coverage:
                    raise UncoveredExtrinsic(s.name)
                callee = self.algorithms[self.coverage[s.name]]
                if len(callee.inputs) != s.arity:
                    raise PreconditionError(
                        f"{s.name}/{s.arity} covered by a member with {len(callee.inputs)} inputs")

    def deduplicated(self) -> "AlgorithmBundle":
        """Drop members identical to an earlier one, keeping the lowest index."""
        texts = [print_unit(a) for a in self.algorithms]
        keep: List[int] = []
        remap: Dict[int, int] = {}
        for i, t in enumerate(texts):
            first = texts.index(t)
            if first == i:
                remap[i] = len(keep)
                keep.append(i)
            else:
                remap[i] = remap[first]
        return AlgorithmBundle([self.algorithms[i] for i in keep],
                               {s: remap[j] for s, j in self.coverage.items()},
                               self.passthrough)


def load_bundle(path: str) -> AlgorithmBundle:
    """Read ``{"members": [...], "coverage": {...}, "passthrough": [...]}``;
    member paths are relative to the bundle file."""
    with open(path) as fh:
        doc = json.load(fh)
    base = os.path.dirname(os.path.abspath(path))
    members = []
    for rel in doc["members"]:
        with open(os.path.join(base, rel)) as fh:
            members.append(parse(fh.read()))
    return AlgorithmBundle(members, {k: int(v) for k, v in doc.get("coverage", {}).items()},
                           frozenset(doc.get("passthrough", ())))
