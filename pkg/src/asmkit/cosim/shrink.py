"""Deterministic best-effort shrinking of failing generated programs."""
from __future__ import annotations

from typing import Callable, Iterator

from ..algorithm import Algorithm
from ..core import Cond, Par, Rule

SKIP = Par(())


def smaller_rules(rule: Rule) -> Iterator[Rule]:
    """Candidates strictly smaller than ``rule``, most aggressive first."""
    if rule == SKIP:
        return
    yield SKIP
    if isinstance(rule, Cond):
        yield rule.then
        yield rule.orelse
        for t in smaller_rules(rule.then):
            yield Cond(rule.guard, t, rule.orelse)
        for e in smaller_rules(rule.orelse):
            yield Cond(rule.guard, rule.then, e)
    elif isinstance(rule, Par):
        for i, r in enumerate(rule.rules):
            yield r
            yield Par(rule.rules[:i] + rule.rules[i + 1:])
        for i, r in enumerate(rule.rules):
            for s in smaller_rules(r):
                yield Par(rule.rules[:i] + (s,) + rule.rules[i + 1:])


def shrink(alg: Algorithm, still_fails: Callable[[Algorithm], bool],
           max_tries: int = 500) -> Algorithm:
    """Greedily replace the program by smaller ones that keep failing."""
    tries = 0
    current = alg
    improved = True
    while improved and tries < max_tries:
        improved = False
        for cand in smaller_rules(current.program):
            tries += 1
            if tries > max_tries:
                break
            candidate = current.evolve(program=cand)
            try:
                failing = still_fails(candidate)
            except Exception:
                failing = False
            if failing:
                current = candidate
                improved = True
                break
    return current
