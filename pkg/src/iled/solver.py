"""Grounding, stable models, credulous entailment and minimal abduction.

The solver is small on purpose. Programs that are locally stratified once
their abducibles are fixed (the event calculus axioms and the use/try and
exception transformations all are) get their unique stable model from a
stratum-by-stratum fixpoint. Everything else goes through an exhaustive
guess-and-check over the negated atoms, which is only allowed below a cap on
the size of the Herbrand base.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

import networkx as nx

from .errors import ResourceLimit, UnsafeClauseError
from .logic import (FALSE, Clause, Const, Fn, Literal, Program, Term, Var, constants_of,
                    evaluate_arithmetic, match, substitute, term_vars)

__all__ = [
    "GroundProgram", "Interpretation", "AbductiveTask", "AbductiveSolution",
    "ground", "least_model", "stable_models", "is_stable_model", "credulous_entails",
    "abduce", "abduce_all_minimal", "EXHAUSTIVE_CAP", "ABDUCTION_CAP", "candidate_order",
]

EXHAUSTIVE_CAP = 24
ABDUCTION_CAP = 2 ** 20


@dataclass(frozen=True)
class Interpretation:
    true_atoms: FrozenSet[int]

    def atoms(self, gp: "GroundProgram") -> Set[Fn]:
        return {gp.atoms[i] for i in self.true_atoms}


class GroundProgram:
    """Variable-free clauses with a dense atom index."""

    def __init__(self, clauses: Sequence[Clause]):
        self.clauses: Tuple[Clause, ...] = tuple(clauses)
        self.atoms: List[Fn] = []
        self.atom_index: Dict[Fn, int] = {}
        self.rules: List[Tuple[int, Tuple[int, ...], Tuple[int, ...]]] = []
        for c in self.clauses:
            if not c.head.ground or any(not l.atom.ground for l in c.body):
                raise ValueError(f"clause is not ground: {c}")
            head = -1 if c.head == FALSE else self._id(c.head)
            pos = tuple(self._id(l.atom) for l in c.body if not l.negated)
            neg = tuple(self._id(l.atom) for l in c.body if l.negated)
            self.rules.append((head, pos, neg))
        self._stratified: Optional[bool] = None
        self._components: Optional[List[Set[int]]] = None

    def _id(self, atom: Fn) -> int:
        i = self.atom_index.get(atom)
        if i is None:
            i = self.atom_index[atom] = len(self.atoms)
            self.atoms.append(atom)
        return i

    def __len__(self):
        return len(self.clauses)

    def dump(self) -> str:
        from .syntax import format_clause
        return "".join(format_clause(c) + "\n" for c in self.clauses)

    # stratification ------------------------------------------------------
    def _analyse(self):
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.atoms)))
        neg_edges = []
        for head, pos, neg in self.rules:
            if head < 0:
                continue
            for b in pos:
                g.add_edge(b, head)
            for b in neg:
                g.add_edge(b, head)
                neg_edges.append((b, head))
        cond = nx.condensation(g)
        member = cond.graph["mapping"]
        self._stratified = all(member[b] != member[h] for b, h in neg_edges)
        self._components = [set(cond.nodes[c]["members"]) for c in nx.topological_sort(cond)]
        self._member = member

    @property
    def stratified(self) -> bool:
        if self._stratified is None:
            self._analyse()
        return self._stratified


def least_model(rules: Iterable[Tuple[int, Tuple[int, ...], Tuple[int, ...]]], neg_true: Callable[[int], bool] = None) -> Set[int]:
    """Least model of the rules whose negative literals hold under ``neg_true``.

    ``neg_true(a)`` says whether ``not a`` holds; rules with a failing
    negative literal are dropped (the reduct). Head ``-1`` stands for false.
    """
    waiting: Dict[int, List[int]] = defaultdict(list)
    missing: List[int] = []
    heads: List[int] = []
    queue: List[int] = []
    model: Set[int] = set()
    for head, pos, neg in rules:
        if neg and neg_true is not None and not all(neg_true(a) for a in neg):
            continue
        if neg and neg_true is None:
            continue
        idx = len(heads)
        heads.append(head)
        pset = set(pos)
        missing.append(len(pset))
        for a in pset:
            waiting[a].append(idx)
        if not pset:
            queue.append(head)
    while queue:
        a = queue.pop()
        if a in model:
            continue
        model.add(a)
        for idx in waiting.get(a, ()):
            missing[idx] -= 1
            if missing[idx] == 0:
                queue.append(heads[idx])
    return model


def _perfect_model(gp: GroundProgram, facts: Iterable[int] = ()) -> Set[int]:
    if gp._components is None:
        gp._analyse()
    by_comp: Dict[int, List[Tuple[int, Tuple[int, ...], Tuple[int, ...]]]] = defaultdict(list)
    constraints = []
    for r in gp.rules:
        if r[0] < 0:
            constraints.append(r)
        else:
            by_comp[gp._member[r[0]]].append(r)
    model: Set[int] = set(facts)
    for comp in gp._components:
        rules = by_comp.get(gp._member[next(iter(comp))], ())
        if not rules:
            continue
        changed = True
        while changed:
            changed = False
            for head, pos, neg in rules:
                if head in model:
                    continue
                if all(p in model for p in pos) and not any(n in model for n in neg):
                    model.add(head)
                    changed = True
    for head, pos, neg in constraints:
        if all(p in model for p in pos) and not any(n in model for n in neg):
            model.add(-1)
            break
    return model


def stable_models(gp: GroundProgram, cap: int = EXHAUSTIVE_CAP, facts: Iterable[int] = ()) -> List[Interpretation]:
    """All stable models, sorted by their sorted atom ids.

    ``facts`` adds extra atom ids as facts without regrounding.
    """
    facts = frozenset(facts)
    if gp.stratified:
        m = _perfect_model(gp, facts)
        if -1 in m:
            return []
        return [Interpretation(frozenset(m))]
    if len(gp.atoms) > cap:
        raise ResourceLimit(
            f"Herbrand base has {len(gp.atoms)} atoms, above the exhaustive cap of {cap}; "
            "use the stratified event-calculus path or abduce()")
    rules = list(gp.rules) + [(f, (), ()) for f in facts]
    negated = sorted({a for _, _, neg in rules for a in neg})
    out = []
    for bits in itertools.product((False, True), repeat=len(negated)):
        guess = {a for a, b in zip(negated, bits) if b}
        m = least_model(rules, lambda a: a not in guess)
        if -1 in m:
            continue
        if {a for a in negated if a in m} == guess:
            out.append(Interpretation(frozenset(m)))
    out.sort(key=lambda i: sorted(i.true_atoms))
    return out


def is_stable_model(gp: GroundProgram, true_atoms: Iterable[int]) -> bool:
    """Reduct check written independently of :func:`stable_models`."""
    interp = set(true_atoms)
    if -1 in interp:
        return False
    reduct = []
    for head, pos, neg in gp.rules:
        if any(a in interp for a in neg):
            continue
        reduct.append((head, set(pos)))
    model: Set[int] = set()
    changed = True
    while changed:
        changed = False
        for head, pos in reduct:
            if head not in model and pos <= model:
                model.add(head)
                changed = True
    return model == interp


# ---------------------------------------------------------------------------
# grounding

def ground(p: Iterable[Clause], domains: Optional[Mapping[str, Iterable]] = None,
           window_constants: Iterable = (), var_types: Optional[Callable[[Clause], Mapping[Var, str]]] = None,
           relevance: bool = True, max_instances: int = 2_000_000) -> GroundProgram:
    """Ground a program.

    Typed variables (``var_types(clause)`` maps variables to keys of
    ``domains``) range over their domain. Untyped variables are bound by
    joining positive body literals against the atoms that could possibly be
    derived; untyped head variables left unbound range over the universe of
    constants. An untyped variable that occurs only in negative literals
    makes the clause unsafe. With ``relevance=False`` ground positive body
    literals are kept even when no rule can derive them.
    """
    clauses = list(p)
    domains = {k: [_as_term(v) for v in vs] for k, vs in (domains or {}).items()}
    universe: Set[Term] = set(_as_term(c) for c in window_constants)
    for vs in domains.values():
        universe.update(vs)
    for c in clauses:
        constants_of(c.head, universe)
        for l in c.body:
            constants_of(l.atom, universe)
    universe_list = sorted(universe, key=_term_sort_key)

    prepared = []
    for c in clauses:
        types = dict(var_types(c)) if var_types else {}
        types = {v: t for v, t in types.items() if t in domains}
        head_vars = term_vars(c.head)
        pos_vars: List[Var] = []
        for l in c.body:
            if not l.negated:
                term_vars(l.atom, pos_vars)
        for l in c.body:
            if l.negated:
                for v in term_vars(l.atom):
                    if v not in types and v not in pos_vars:
                        raise UnsafeClauseError(f"unsafe clause (variable {v} only under negation): {c}")
        free_head = [v for v in head_vars if v not in types and v not in pos_vars]
        typed = [v for v in term_vars(c.head) + [w for l in c.body for w in term_vars(l.atom)] if v in types]
        typed = list(dict.fromkeys(typed))
        prepared.append((c, types, typed, free_head))

    possible: Set[Fn] = set()
    index: Dict[Tuple[str, int], List[Fn]] = defaultdict(list)
    seen: Set[Clause] = set()
    out: List[Clause] = []

    def add_possible(a: Fn) -> bool:
        if a in possible:
            return False
        possible.add(a)
        index[(a.name, len(a.args))].append(a)
        return True

    changed = True
    while changed:
        changed = False
        for c, types, typed, free_head in prepared:
            for theta in _enumerate(c, types, typed, free_head, domains, universe_list, index, possible, relevance):
                head = evaluate_arithmetic(substitute(c.head, theta))
                body = tuple(Literal(evaluate_arithmetic(substitute(l.atom, theta)), l.negated) for l in c.body)
                gc = Clause(head, body)
                if gc in seen:
                    continue
                seen.add(gc)
                out.append(gc)
                if len(out) > max_instances:
                    raise ResourceLimit(f"grounding exceeded {max_instances} clause instances")
                if head != FALSE and add_possible(head):
                    changed = True
    return GroundProgram(out)


def _as_term(v) -> Term:
    if isinstance(v, (Var, Const, Fn)):
        return v
    return Const(v)


def _term_sort_key(t: Term):
    from .syntax import format_term
    if isinstance(t, Const) and isinstance(t.value, int):
        return (0, t.value, "")
    return (1, 0, format_term(t))


def _enumerate(c: Clause, types, typed, free_head, domains, universe, index, possible, relevance):
    pos = [l.atom for l in c.body if not l.negated]

    def join(i, theta):
        if i == len(pos):
            yield theta
            return
        atom = substitute(pos[i], theta)
        if atom.ground:
            atom = evaluate_arithmetic(atom)
            if not relevance or atom in possible:
                yield from join(i + 1, theta)
            return
        for cand in list(index.get((atom.name, len(atom.args)), ())):
            th = _match_arith(atom, cand, theta)
            if th is not None:
                yield from join(i + 1, th)

    typed_domains = [domains[types[v]] for v in typed]
    for combo in itertools.product(*typed_domains):
        theta0 = dict(zip(typed, combo))
        for theta in join(0, theta0):
            if free_head:
                for extra in itertools.product(universe, repeat=len(free_head)):
                    th = dict(theta)
                    th.update(zip(free_head, extra))
                    yield th
            else:
                yield theta


def _match_arith(pattern: Fn, target: Fn, theta):
    """Match allowing ``V+k`` / ``V-k`` subterms against integers."""
    if not _has_arith(pattern):
        return match(pattern, target, theta)
    return _match_rec(pattern, target, dict(theta))


def _has_arith(t) -> bool:
    return isinstance(t, Fn) and (t.name in ("+", "-") and len(t.args) == 2 or any(_has_arith(a) for a in t.args))


def _match_rec(p, t, theta):
    if isinstance(p, Fn) and p.name in ("+", "-") and len(p.args) == 2:
        a, b = p.args
        a, b = substitute(a, theta), substitute(b, theta)
        if not (isinstance(t, Const) and isinstance(t.value, int)):
            return None
        if isinstance(b, Const) and isinstance(a, Var):
            val = t.value - b.value if p.name == "+" else t.value + b.value
            return match(a, Const(val), theta)
        v = evaluate_arithmetic(Fn(p.name, (a, b)))
        return theta if v == t else None
    if isinstance(p, Fn):
        if not isinstance(t, Fn) or p.name != t.name or len(p.args) != len(t.args):
            return None
        for pa, ta in zip(p.args, t.args):
            theta = _match_rec(pa, ta, theta)
            if theta is None:
                return None
        return theta
    return match(p, t, theta)


# ---------------------------------------------------------------------------
# entailment

def _satisfies(model_atoms: Set[Fn], lits: Iterable[Literal]) -> bool:
    return all((l.atom in model_atoms) != l.negated for l in lits)


def credulous_entails(p: Iterable[Clause], q: Iterable[Literal], domains: Optional[Mapping[str, Iterable]] = None,
                      cap: int = EXHAUSTIVE_CAP, **ground_kw) -> bool:
    """True iff some stable model of ``p`` satisfies every literal of ``q``."""
    q = list(q)
    gp = ground(p, domains, **ground_kw)
    for m in stable_models(gp, cap):
        if _satisfies(m.atoms(gp), q):
            return True
    return False


# ---------------------------------------------------------------------------
# abduction

@dataclass(frozen=True)
class AbductiveTask:
    """Background program, abducible atom patterns and goal literals.

    Abducible patterns may contain variables; they are instantiated over
    ``domains`` through ``var_types`` (variable name to domain key) or over
    the universe of constants otherwise.
    """

    background: Program
    abducibles: Tuple[Fn, ...]
    goals: Tuple[Literal, ...]
    domains: Mapping[str, Tuple] = field(default_factory=dict)
    var_types: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "abducibles", tuple(self.abducibles))
        object.__setattr__(self, "goals", tuple(self.goals))
        if not isinstance(self.background, Program):
            object.__setattr__(self, "background", Program(tuple(self.background)))


@dataclass(frozen=True)
class AbductiveSolution:
    delta: Tuple[Fn, ...]
    objective: Tuple

    def __str__(self):
        from .syntax import format_term
        return "{" + ", ".join(format_term(a) for a in self.delta) + "}"


def candidate_order(atom: Fn):
    """Sort key for abducible instances: time point, predicate, serialization."""
    from .syntax import format_term
    time = -1
    if atom.args and isinstance(atom.args[-1], Const) and isinstance(atom.args[-1].value, int):
        time = atom.args[-1].value
    return (time, atom.name, format_term(atom))


def _instances(task: AbductiveTask) -> List[Fn]:
    universe: Set[Term] = set()
    for c in task.background:
        constants_of(c.head, universe)
        for l in c.body:
            constants_of(l.atom, universe)
    for l in task.goals:
        constants_of(l.atom, universe)
    for a in task.abducibles:
        constants_of(a, universe)
    for vs in task.domains.values():
        universe.update(_as_term(v) for v in vs)
    universe_list = sorted(universe, key=_term_sort_key)
    out: Set[Fn] = set()
    for pat in task.abducibles:
        vs = term_vars(pat)
        doms = []
        for v in vs:
            key = task.var_types.get(v.name)
            doms.append([_as_term(x) for x in task.domains[key]] if key in task.domains else universe_list)
        for combo in itertools.product(*doms):
            out.add(evaluate_arithmetic(substitute(pat, dict(zip(vs, combo)))))
    return sorted(out, key=candidate_order)


class _Checker:
    def __init__(self, task: AbductiveTask, cands: List[Fn], cap: int):
        facts = [Clause(a) for a in cands]
        types = task.var_types

        def vt(c):
            return {v: types[v.name] for v in term_vars(c.head) + [w for l in c.body for w in term_vars(l.atom)]
                    if v.name in types}
        self.gp = ground(list(task.background) + facts, task.domains, var_types=vt if types else None)
        # candidate facts are switched on per query, not compiled in
        self.cand_ids = [self.gp.atom_index[a] for a in cands]
        cand_set = set(self.cand_ids)
        self.gp.rules = [r for r in self.gp.rules if not (r[0] in cand_set and not r[1] and not r[2])]
        self.gp._stratified = None
        self.gp._components = None
        self.goals = []
        for l in task.goals:
            self.goals.append((self.gp.atom_index.get(l.atom), l.negated))
        self.cap = cap
        self.calls = 0

    def check(self, chosen: Sequence[int]) -> bool:
        self.calls += 1
        for m in stable_models(self.gp, facts=[self.cand_ids[i] for i in chosen]):
            if all(((aid is not None and aid in m.true_atoms) != neg) for aid, neg in self.goals):
                return True
        return False


def abduce(task: AbductiveTask, minimize: bool = True, cap: int = ABDUCTION_CAP,
           objective: Optional[Callable[[Tuple[Fn, ...]], Tuple]] = None) -> Optional[AbductiveSolution]:
    """A cardinality-minimal explanation, or None when none exists.

    Candidates are explored by increasing cardinality (which bounds every
    branch by the best cardinality so far). Among explanations of minimum
    cardinality the one minimising ``objective(delta)`` wins, then the
    lexicographically smallest in candidate order.
    """
    cands = _instances(task)
    checker = _Checker(task, cands, cap)
    explored = 0
    for k in range(len(cands) + 1):
        found = []
        for combo in itertools.combinations(range(len(cands)), k):
            explored += 1
            if explored > cap:
                raise ResourceLimit(f"abduction explored more than {cap} candidate sets", best=k)
            if checker.check(combo):
                delta = tuple(cands[i] for i in combo)
                if not minimize or objective is None:
                    return AbductiveSolution(delta, (k, combo))
                found.append(((k,) + tuple(objective(delta)) + (combo,), delta))
        if found:
            found.sort(key=lambda x: x[0])
            return AbductiveSolution(found[0][1], found[0][0])
    return None


def abduce_all_minimal(task: AbductiveTask, cap: int = ABDUCTION_CAP) -> List[AbductiveSolution]:
    """Every subset-minimal explanation, ordered by cardinality then candidate order."""
    cands = _instances(task)
    checker = _Checker(task, cands, cap)
    sols: List[Tuple[int, ...]] = []
    explored = 0
    for k in range(len(cands) + 1):
        for combo in itertools.combinations(range(len(cands)), k):
            s = set(combo)
            if any(set(prev) <= s for prev in sols):
                continue
            explored += 1
            if explored > cap:
                raise ResourceLimit(f"abduction explored more than {cap} candidate sets", best=len(sols))
            if checker.check(combo):
                sols.append(combo)
    return [AbductiveSolution(tuple(cands[i] for i in combo), (len(combo), combo)) for combo in sols]
