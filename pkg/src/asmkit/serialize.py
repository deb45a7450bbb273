"""Query serialization: at most one extrinsic query per regular step.

The program becomes ``if not(Done) then P' else Done := false`` where the
meaningful part ``P'`` evaluates the extrinsic-head terms one per step into
fresh variables and then performs the original step without queries.  A run
of regular steps ending with the Done reset is a mega-step and simulates one
step of the original algorithm.

Every node of the conditional tree owns an activation flag: a parent
switches one child on after deciding its guard, and the child switches
itself off when done.  Guards therefore stay shallow however deep the tree.

Terms inside an ``ite`` branch are queried only when the original would
evaluate them: their step is guarded by the branch condition, rewritten over
the already stored answers.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .algorithm import Algorithm, fresh_name
from .core import (
    T_FALSE, T_TRUE, ASMError, Assign, Cond, Par, Rule, Symbol, Term, deep_recursion, map_rule_terms,
    replace_subterm, rule_terms, t_ite, t_not,
)
from .normalize import flat_assignments, is_conditional_tree, is_parallel_assignments, normalize

Target = Union[Rule, Term]
Clause = Tuple[Term, Par]


class SerializationError(ASMError):
    pass


def _targets_terms(target: Target) -> List[Term]:
    return [target] if isinstance(target, Term) else list(rule_terms(target))


def _occurrences(t: Term, path: tuple, out: list, is_ext: Callable[[str], bool]) -> None:
    if t.head == "ite":
        c, x, y = t.args
        _occurrences(c, path, out, is_ext)
        _occurrences(x, path + ((c, True),), out, is_ext)
        _occurrences(y, path + ((c, False),), out, is_ext)
        return
    for a in t.args:
        _occurrences(a, path, out, is_ext)
    if is_ext(t.head):
        out.append((t, path))


def _extrinsic_subterms(t: Term, is_ext) -> List[Term]:
    return [s for s in t.subterms() if is_ext(s.head)]


@dataclass
class QueryPlan:
    """Extrinsic-head terms in query order, with the condition (over the
    original vocabulary) under which each is evaluated; None means always."""

    terms: List[Term]
    conditions: List[Optional[Term]]


def plan_queries(target: Target, is_ext: Callable[[str], bool]) -> QueryPlan:
    occ: list = []
    for t in _targets_terms(target):
        _occurrences(t, (), occ, is_ext)
    first: Dict[Term, int] = {}
    paths: Dict[Term, list] = {}
    for k, (t, path) in enumerate(occ):
        first.setdefault(t, k)
        paths.setdefault(t, []).append(path)
    distinct = sorted(first, key=first.get)
    conditions: Dict[Term, Optional[Term]] = {}
    deps: Dict[Term, set] = {}
    for t in distinct:
        d = {s for s in _extrinsic_subterms(t, is_ext) if s != t}
        if any(not p for p in paths[t]):
            conditions[t] = None
        else:
            # Lazy disjunction in evaluation order.  If testing an occurrence's
            # path would itself reach t, an earlier disjunct already holds, so
            # the blanked copies of t below are never evaluated.
            cond = None
            for p in paths[t]:
                c = _blind(_path_condition(p), t, is_ext)
                cond = c if cond is None else t_ite(cond, T_TRUE, c)
            conditions[t] = cond
            d.update(_extrinsic_subterms(cond, is_ext))
        d.discard(t)
        deps[t] = d & set(distinct)
    order: List[Term] = []
    placed: set = set()
    while len(order) < len(distinct):
        ready = [t for t in distinct if t not in placed and deps[t] <= placed]
        if not ready:
            raise SerializationError("extrinsic terms guard each other cyclically")
        order.append(ready[0])
        placed.add(ready[0])
    return QueryPlan(order, [conditions[t] for t in order])


def _blind(cond: Term, t: Term, is_ext) -> Term:
    """Replace the extrinsic terms of ``cond`` that contain ``t`` by false."""
    if is_ext(cond.head) and t in cond.subterms():
        return T_FALSE
    if not cond.args:
        return cond
    return Term(cond.head, tuple(_blind(a, t, is_ext) for a in cond.args))


def _path_condition(path) -> Term:
    cond = T_TRUE
    for guard, side in reversed(path):
        cond = t_ite(guard, cond, T_FALSE) if side else t_ite(guard, T_FALSE, cond)
    return cond


def order_extrinsic_terms(target: Target, is_ext: Callable[[str], bool]) -> List[Term]:
    """Distinct extrinsic-head terms; subterms first, then leftmost-innermost."""
    return plan_queries(target, is_ext).terms


def _substitute(target, old: Term, new: Term):
    if target is None:
        return None
    if isinstance(target, Term):
        return replace_subterm(target, old, new)
    return map_rule_terms(target, lambda t: replace_subterm(t, old, new))


@dataclass
class SubstitutionMatrix:
    """``rows[i][j]`` is term j after replacing the first i terms by their
    variables; ``targets[i]`` is the rule or guard after the same steps."""

    variables: List[str]
    rows: List[List[Term]]
    targets: List[Target]

    def step_term(self, i: int) -> Term:
        """The term queried at step i (0-based): t_i with earlier answers substituted."""
        return self.rows[i][i]

    @property
    def final(self) -> Target:
        return self.targets[-1]


def build_matrix(terms: Sequence[Term], target: Target,
                 variables: Optional[Sequence[str]] = None) -> SubstitutionMatrix:
    n = len(terms)
    variables = list(variables) if variables is not None else [f"$d_{i + 1}" for i in range(n)]
    row = list(terms)
    rows = [row]
    targets = [target]
    for i in range(n):
        ti, di = row[i], Term(variables[i])
        row = [replace_subterm(t, ti, di) for t in row]
        rows.append(row)
        targets.append(_substitute(targets[-1], ti, di))
    return SubstitutionMatrix(variables, rows, targets)


@dataclass
class ClauseClass:
    kind: str  # "pure" | "tainted"
    variable: Optional[str] = None
    term: Optional[Term] = None
    rest: Tuple[Assign, ...] = ()

    def to_json(self, index: int) -> dict:
        from .parser import format_term
        row = {"clause": index, "kind": self.kind}
        if self.kind == "tainted":
            row.update(variable=self.variable, term=format_term(self.term))
        return row


@dataclass
class SerializedAlgorithm:
    algorithm: Algorithm
    done: str
    clauses: List[Clause]
    classification: List[ClauseClass]
    bound: Optional[int] = None
    aux: List[str] = field(default_factory=list)

    def classification_json(self) -> dict:
        return {"done": self.done, "bound": self.bound,
                "clauses": [c.to_json(i) for i, c in enumerate(self.classification)]}


class _Builder:
    def __init__(self, alg: Algorithm):
        self.alg = alg
        self.is_ext = lambda name: (alg.vocab.get(name) is not None
                                    and alg.vocab[name].extrinsic)
        self.taken = {s.name for s in alg.vocab}
        self.aux: List[Symbol] = []
        self.nodes = 0

    def fresh(self, base: str, relational: bool = True) -> str:
        name = fresh_name(self.taken, base)
        self.taken.add(name)
        self.aux.append(Symbol(name, 0, relational=relational))
        return name

    def queries(self, target: Target, node: int, prefix: Optional[Term]):
        """Clauses evaluating the extrinsic terms of ``target`` one per step."""
        plan = plan_queries(target, self.is_ext)
        n = len(plan.terms)
        ds = [self.fresh(f"$d_{node}_{i + 1}", relational=False) for i in range(n)]
        bs = [self.fresh(f"$b_{node}_{i + 1}") for i in range(n)]
        matrix = build_matrix(plan.terms, target, ds)
        clauses: List[Clause] = []
        conds = [plan.conditions[i] for i in range(n)]
        for i in range(n):
            # the condition only mentions earlier terms; substitute their answers
            cond = conds[i]
            for k in range(i):
                cond = _substitute(cond, matrix.rows[k][k], Term(ds[k]))
            base = (t_not(Term(bs[i])) if prefix is None
                    else t_ite(prefix, t_not(Term(bs[i])), T_FALSE))
            body = Par((Assign(ds[i], (), matrix.step_term(i)), Assign(bs[i], (), T_TRUE)))
            if cond is None:
                clauses.append((base, body))
            else:
                clauses.append((t_ite(base, cond, T_FALSE), body))
                clauses.append((base, Par((Assign(bs[i], (), T_TRUE),))))
        return clauses, matrix, bs

    def build(self, rule: Rule, act: Optional[str], done: Optional[str]) -> Tuple[List[Clause], int]:
        """Clauses of one node of the conditional tree and its mega-step length.

        ``act`` is the node's activation flag (``None`` at the root).  A child
        is switched on by its parent and switches itself off when it is
        finished, so every guard only mentions the node's own flags.
        """
        node = self.nodes
        self.nodes += 1
        finish = Assign(done, (), T_TRUE) if act is None else Assign(act, (), T_FALSE)
        if is_parallel_assignments(rule):
            body = flat_assignments(rule)
            clauses, matrix, bs = self.queries(body, node, None if act is None else Term(act))
            final = matrix.final
            resets = tuple(Assign(b, (), T_FALSE) for b in bs)
            guard = T_TRUE if act is None else Term(act)
            clauses.append((guard, Par(final.rules + (finish,) + resets)))
            return clauses, len(matrix.variables) + 1
        assert isinstance(rule, Cond)
        a = self.fresh(f"$a_{node}")
        start = _when(act, t_not(Term(a)))
        clauses, matrix, bs = self.queries(rule.guard, node, start)
        resets = tuple(Assign(b, (), T_FALSE) for b in bs)
        go_p = self.fresh(f"$go_{node}_then")
        go_q = self.fresh(f"$go_{node}_else")
        beta = matrix.final
        # not(beta) is undefined unless beta is Boolean, so a bad guard fails here
        clauses.append((start, Par((Assign(go_p, (), beta), Assign(go_q, (), t_not(beta)),
                                    Assign(a, (), T_TRUE)) + resets)))
        p_clauses, lp = self.build(rule.then, go_p, None)
        q_clauses, lq = self.build(rule.orelse, go_q, None)
        clauses += p_clauses + q_clauses
        clauses.append((_when(act, Term(a)), Par((Assign(a, (), T_FALSE), finish))))
        return clauses, len(matrix.variables) + 1 + max(lp, lq) + 1


def _when(flag: Optional[str], guard: Term) -> Term:
    """``guard`` restricted to steps where ``flag`` holds (lazily)."""
    return guard if flag is None else t_ite(Term(flag), guard, T_FALSE)


def cascade(clauses: Sequence[Clause]) -> Rule:
    rule: Rule = Par(())
    for g, body in reversed(clauses):
        rule = Cond(g, body, rule)
    return rule


def serialize(alg: Algorithm) -> SerializedAlgorithm:
    program = alg.program
    if not is_conditional_tree(program):
        program = normalize(program).to_rule()
    b = _Builder(alg)
    done = b.fresh("$done")
    with deep_recursion():
        clauses, length = b.build(program, None, done)
    top = Cond(t_not(Term(done)), cascade(clauses), Assign(done, (), T_FALSE))
    new = alg.evolve(decls=alg.decls + tuple(b.aux), program=top)
    classes = classify_clauses(clauses, b.is_ext)
    return SerializedAlgorithm(new, done, list(clauses), classes, bound=length + 1,
                               aux=[s.name for s in b.aux])


# ---------------------------------------------------------------------------
# Syntactic shape check


class ShapeError(ASMError):
    pass


def _count_ext(t: Term, is_ext) -> int:
    return sum(1 for s in t.subterms() if is_ext(s.head))


def classify_clauses(clauses: Sequence[Clause], is_ext) -> List[ClauseClass]:
    out = []
    for k, (g, body) in enumerate(clauses):
        if _count_ext(g, is_ext):
            raise ShapeError(f"clause {k}: extrinsic function in guard")
        if not isinstance(body, Par) or not all(isinstance(r, Assign) for r in body.rules):
            raise ShapeError(f"clause {k}: body is not a parallel composition of assignments")
        counts = [sum(_count_ext(t, is_ext) for t in r.args) + _count_ext(r.rhs, is_ext)
                  for r in body.rules]
        if sum(counts) == 0:
            out.append(ClauseClass("pure"))
            continue
        idx = [i for i, n in enumerate(counts) if n]
        head = body.rules[idx[0]]
        if (sum(counts) != 1 or head.args or not is_ext(head.rhs.head)):
            raise ShapeError(f"clause {k}: neither pure nor tainted")
        rest = tuple(r for i, r in enumerate(body.rules) if i != idx[0])
        out.append(ClauseClass("tainted", head.target, head.rhs, rest))
    return out


def classify_program(alg: Algorithm) -> SerializedAlgorithm:
    """Recover the clause structure of an already serialized program.

    Expects ``if not(D) then <cascade> else D := false`` where only the last
    clause mentions D, and sets it to true.
    """
    prog = alg.program
    is_ext = lambda name: name in alg.vocab and alg.vocab[name].extrinsic  # noqa: E731
    ok = (isinstance(prog, Cond) and prog.guard.head == "not"
          and not prog.guard.args[0].args and isinstance(prog.orelse, Assign))
    if not ok:
        raise ShapeError("program is not of the form if not(Done) then ... else Done := false")
    done = prog.guard.args[0].head
    if prog.orelse != Assign(done, (), T_FALSE):
        raise ShapeError("else branch must reset Done")
    clauses: List[Clause] = []
    rule = prog.then
    while isinstance(rule, Cond):
        clauses.append((rule.guard, rule.then))
        rule = rule.orelse
    if rule != Par(()) or not clauses:
        raise ShapeError("meaningful part is not a compound conditional")
    for k, (g, body) in enumerate(clauses):
        mentions = any(s.head == done for s in g.subterms()) or any(
            isinstance(r, Assign) and (r.target == done
                                       or any(s.head == done for t in (r.rhs, *r.args)
                                              for s in t.subterms()))
            for r in getattr(body, "rules", (body,)))
        if k < len(clauses) - 1 and mentions:
            raise ShapeError(f"clause {k} mentions {done}")
    last = clauses[-1][1]
    if Assign(done, (), T_TRUE) not in getattr(last, "rules", ()):
        raise ShapeError("last clause does not set Done")
    classes = classify_clauses(clauses, is_ext)
    return SerializedAlgorithm(alg, done, clauses, classes)
