"""Normalization to a compound conditional of parallel assignments.

The result fires the same update set and evaluates the same (symbol, args)
pairs as the original rule at every state.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, List, Tuple

from .core import (
    T_FALSE, T_TRUE, Assign, Cond, Par, Rule, Term, else_chain, t_and, t_ite,
)

Clause = Tuple[Term, Par]


@dataclass(frozen=True)
class CompoundConditional:
    """``if g1 then P1 elseif g2 then P2 ...``; no clause firing means no updates."""

    clauses: Tuple[Clause, ...] = ()

    def __len__(self) -> int:
        return len(self.clauses)

    def to_rule(self) -> Rule:
        rule: Rule = Par(())
        for g, body in reversed(self.clauses):
            rule = Cond(g, body, rule)
        return rule


def _body(*parts: Par) -> Par:
    return Par(tuple(r for p in parts for r in p.rules))


def merge_parallel(p: CompoundConditional, q: CompoundConditional) -> CompoundConditional:
    """Compound conditional equivalent to ``p || q``.

    For each clause of ``p``: its conjunction with every clause of ``q`` in
    order, then the clause alone; finally the clauses of ``q``.  The first
    conjunction is strict (the original always evaluates q's first guard);
    later ones use ``ite`` so that q's later guards are evaluated only
    where the original would reach them.
    """
    out: List[Clause] = []
    for g, pb in p.clauses:
        for j, (h, qb) in enumerate(q.clauses):
            guard = t_and(g, h) if j == 0 else t_ite(g, h, T_FALSE)
            out.append((guard, _body(pb, qb)))
        out.append((g, pb))
    out.extend(q.clauses)
    return CompoundConditional(tuple(out))


def normalize(rule: Rule) -> CompoundConditional:
    if isinstance(rule, Assign):
        return CompoundConditional(((T_TRUE, Par((rule,))),))
    if isinstance(rule, Par) and rule.rules and is_parallel_assignments(rule):
        return CompoundConditional(((T_TRUE, flat_assignments(rule)),))
    if isinstance(rule, Par):
        if not rule.rules:
            return CompoundConditional()
        acc = normalize(rule.rules[0])
        for r in rule.rules[1:]:
            acc = merge_parallel(acc, normalize(r))
        return acc
    links, last = else_chain(rule)
    thens = [normalize(c.then) for c in links]
    q = normalize(last)
    for c, p in zip(reversed(links), reversed(thens)):
        q = _branch(c.guard, p, q)
    return q


def _branch(beta: Term, p: CompoundConditional, q: CompoundConditional) -> CompoundConditional:
    if not p.clauses and not q.clauses:
        # still evaluate the guard, which may query or fail
        return CompoundConditional(((t_ite(beta, T_FALSE, T_FALSE), Par(())),))
    out = [(t_ite(beta, g, T_FALSE), b) for g, b in p.clauses]
    out += [(t_ite(beta, T_FALSE, h), b) for h, b in q.clauses]
    return CompoundConditional(tuple(out))


def is_parallel_assignments(rule: Rule) -> bool:
    """Assignments composed in parallel, possibly nested."""
    return isinstance(rule, Assign) or (
        isinstance(rule, Par) and all(is_parallel_assignments(r) for r in rule.rules))


def flat_assignments(rule: Rule) -> Par:
    if isinstance(rule, Assign):
        return Par((rule,))
    return Par(tuple(a for r in rule.rules for a in flat_assignments(r).rules))


def is_conditional_tree(rule: Rule) -> bool:
    """Parallel assignments, or ``if b then P else Q`` with P and Q of this shape."""
    if is_parallel_assignments(rule):
        return True
    links, last = else_chain(rule)
    return (bool(links) and all(is_conditional_tree(c.then) for c in links)
            and is_conditional_tree(last))


def clause_bodies_are_assignments(cc: CompoundConditional) -> bool:
    return all(all(isinstance(r, Assign) for r in body.rules) for _, body in cc.clauses)
