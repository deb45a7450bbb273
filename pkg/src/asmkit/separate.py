"""Make dynamic functions initially uninformative.

A dynamic ``f`` is replaced by a static ``s`` holding its initial
interpretation, a dynamic ``d`` holding the values assigned since, and a
dynamic relation ``delta`` marking the updated arguments.  Reads of
``f(t)`` become ``ite(delta(t), d(t), s(t))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .algorithm import Algorithm, PreconditionError, fresh_name
from .core import (
    T_TRUE, Assign, Cond, Par, Rule, Symbol, Table, Term, is_reserved, rebuild_chain, t_ite,
)


@dataclass(frozen=True)
class Renaming:
    static: str
    updated: str  # d
    marker: str   # delta


@dataclass
class SeparationCert:
    algorithm: Algorithm
    renaming: Dict[str, Renaming] = field(default_factory=dict)

    def rewrite(self, t: Term) -> Term:
        """The rewritten term for a term of the original program."""
        for f, names in self.renaming.items():
            t = rewrite_term(t, f, names)
        return t

    def to_json(self) -> dict:
        return {"renaming": {f: {"s": r.static, "d": r.updated, "delta": r.marker}
                             for f, r in self.renaming.items()}}


def rewrite_term(t: Term, f: str, names: Optional[Renaming] = None) -> Term:
    """Bottom-up replacement of every ``f(u)`` by ``ite(delta(u'), d(u'), s(u'))``."""
    names = names or default_names(f)
    args = tuple(rewrite_term(a, f, names) for a in t.args)
    if t.head != f:
        return t if args == t.args else Term(t.head, args)
    return t_ite(Term(names.marker, args), Term(names.updated, args), Term(names.static, args))


def default_names(f: str) -> Renaming:
    return Renaming(f"$s_{f}", f"$d_{f}", f"$delta_{f}")


def _rewrite_rule(rule: Rule, f: str, names: Renaming) -> Rule:
    rw = lambda t: rewrite_term(t, f, names)  # noqa: E731
    if isinstance(rule, Assign):
        args = tuple(rw(a) for a in rule.args)
        rhs = rw(rule.rhs)
        if rule.target == f:
            return Par((Assign(names.updated, args, rhs), Assign(names.marker, args, T_TRUE)))
        return Assign(rule.target, args, rhs)
    if isinstance(rule, Cond):
        return rebuild_chain(rule, lambda c: (rw(c.guard), _rewrite_rule(c.then, f, names)),
                             lambda tail: _rewrite_rule(tail, f, names))
    return Par(tuple(_rewrite_rule(r, f, names) for r in rule.rules))


def separate_one(alg: Algorithm, f: str) -> SeparationCert:
    sym = alg.decl(f)
    if sym is None or sym.static:
        raise PreconditionError(f"{f} is not a declared dynamic symbol")
    if sym.io is not None:
        raise PreconditionError(f"{f} is an input or output variable")
    if is_reserved(f):
        raise PreconditionError(f"{f} is a reserved symbol")
    taken = [s.name for s in alg.vocab]
    base = default_names(f)
    s_name = fresh_name(taken, base.static)
    d_name = fresh_name(taken + [s_name], base.updated)
    m_name = fresh_name(taken + [s_name, d_name], base.marker)
    names = Renaming(s_name, d_name, m_name)

    new_syms = (
        Symbol(s_name, sym.arity, static=True, relational=sym.relational,
               numerical=sym.numerical),
        Symbol(d_name, sym.arity, relational=sym.relational, numerical=sym.numerical),
        Symbol(m_name, sym.arity, relational=True),
    )
    decls: List[Symbol] = []
    for s in alg.decls:
        if s.name == f:
            decls.extend(new_syms)
        else:
            decls.append(s)
    tables = dict(alg.tables)
    tables[s_name] = Table({loc[1]: v for loc, v in alg.init.items() if loc[0] == f}, total=True)
    init = {loc: v for loc, v in alg.init.items() if loc[0] != f}
    program = _rewrite_rule(alg.program, f, names)
    new = replace(alg, decls=tuple(decls), tables=tables, init=init, program=program)
    return SeparationCert(new, {f: names})


def separable(alg: Algorithm) -> List[str]:
    """Non-input dynamic symbols not required to be initially uninformative."""
    return [s.name for s in alg.decls
            if s.dynamic and s.io is None and not is_reserved(s.name)]


def separate_all(alg: Algorithm, only: Optional[List[str]] = None) -> SeparationCert:
    """Apply ``separate_one`` to every separable symbol in declaration order."""
    targets = separable(alg) if only is None else list(only)
    current = alg
    renaming: Dict[str, Renaming] = {}
    for f in targets:
        cert = separate_one(current, f)
        current = cert.algorithm
        renaming.update(cert.renaming)
    return SeparationCert(current, renaming)
