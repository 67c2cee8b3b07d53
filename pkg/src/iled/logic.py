"""Terms, literals, clauses, substitutions and theta-subsumption.

All values are immutable and hashable. Terms are built from three node
kinds: :class:`Var`, :class:`Const` and :class:`Fn` (a compound, which also
serves as the representation of atoms; a propositional atom is an ``Fn``
with no arguments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

__all__ = [
    "Var", "Const", "Fn", "Term", "Literal", "Clause", "Program", "Substitution",
    "FALSE", "term_vars", "clause_vars", "substitute", "substitute_literal",
    "substitute_clause", "unify", "match", "theta_subsumes_clause",
    "theta_subsumption", "theta_subsumes_program", "variable_depth",
    "is_ground", "constants_of", "rename_apart", "canonical_key",
    "is_variant", "clause_length", "evaluate_arithmetic",
]


class Var:
    __slots__ = ("name", "_hash")

    def __init__(self, name: str):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash(("V", name)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return isinstance(other, Var) and other.name == self.name

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Var({self.name!r})"

    def __str__(self):
        return self.name

    def __reduce__(self):
        return (Var, (self.name,))


class Const:
    """A constant. ``value`` is a symbol (str) or an integer."""

    __slots__ = ("value", "_hash")

    def __init__(self, value: Union[str, int]):
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_hash", hash(("C", value)))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        return isinstance(other, Const) and other.value == self.value and type(other.value) is type(self.value)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Const({self.value!r})"

    def __str__(self):
        return str(self.value)

    def __reduce__(self):
        return (Const, (self.value,))


class Fn:
    """A compound term ``name(args...)``; also used for atoms."""

    __slots__ = ("name", "args", "_hash", "_ground")

    def __init__(self, name: str, args: Sequence["Term"] = ()):
        args = tuple(args)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "_hash", hash(("F", name, args)))
        object.__setattr__(self, "_ground", all(
            (isinstance(a, Const) or (isinstance(a, Fn) and a._ground)) for a in args))

    def __setattr__(self, key, value):
        raise AttributeError("terms are immutable")

    def __eq__(self, other):
        if self is other:
            return True
        return (isinstance(other, Fn) and self._hash == other._hash
                and self.name == other.name and self.args == other.args)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Fn({self.name!r}, {list(self.args)!r})"

    def __str__(self):
        from .syntax import format_term
        return format_term(self)

    def __reduce__(self):
        return (Fn, (self.name, self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> Tuple[str, int]:
        return (self.name, len(self.args))

    @property
    def ground(self) -> bool:
        return self._ground


Term = Union[Var, Const, Fn]
Substitution = Dict[Var, Term]

FALSE = Fn("false")


@dataclass(frozen=True)
class Literal:
    atom: Fn
    negated: bool = False

    def __str__(self):
        from .syntax import format_literal
        return format_literal(self)

    def complement(self) -> "Literal":
        return Literal(self.atom, not self.negated)


@dataclass(frozen=True)
class Clause:
    head: Fn
    body: Tuple[Literal, ...] = ()

    def __post_init__(self):
        if not isinstance(self.body, tuple):
            object.__setattr__(self, "body", tuple(self.body))

    def __str__(self):
        from .syntax import format_clause
        return format_clause(self)

    @property
    def is_fact(self) -> bool:
        return not self.body

    @property
    def is_constraint(self) -> bool:
        return self.head == FALSE


@dataclass(frozen=True)
class Program:
    clauses: Tuple[Clause, ...] = ()

    def __post_init__(self):
        if not isinstance(self.clauses, tuple):
            object.__setattr__(self, "clauses", tuple(self.clauses))

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def __add__(self, other: Iterable[Clause]) -> "Program":
        return Program(self.clauses + tuple(other))

    def __str__(self):
        from .syntax import format_program
        return format_program(self)


# ---------------------------------------------------------------------------
# variables and substitution

def term_vars(t: Term, out: Optional[List[Var]] = None) -> List[Var]:
    """Variables of ``t`` in order of first appearance."""
    if out is None:
        out = []
    if isinstance(t, Var):
        if t not in out:
            out.append(t)
    elif isinstance(t, Fn) and not t._ground:
        for a in t.args:
            term_vars(a, out)
    return out


def clause_vars(c: Clause) -> List[Var]:
    out: List[Var] = []
    term_vars(c.head, out)
    for lit in c.body:
        term_vars(lit.atom, out)
    return out


def is_ground(t: Term) -> bool:
    return isinstance(t, Const) or (isinstance(t, Fn) and t._ground)


def constants_of(t: Term, out: Optional[set] = None) -> set:
    if out is None:
        out = set()
    if isinstance(t, Const):
        out.add(t)
    elif isinstance(t, Fn):
        for a in t.args:
            constants_of(a, out)
    return out


def _walk(t: Term, theta: Mapping[Var, Term]) -> Term:
    while isinstance(t, Var) and t in theta:
        t = theta[t]
    return t


def substitute(t: Term, theta: Mapping[Var, Term]) -> Term:
    """Apply ``theta`` simultaneously (one step, so ``{X: Y, Y: X}`` swaps)."""
    if not theta:
        return t
    if isinstance(t, Var):
        return theta.get(t, t)
    if isinstance(t, Fn) and not t._ground:
        return Fn(t.name, [substitute(a, theta) for a in t.args])
    return t


def _resolve(t: Term, theta: Mapping[Var, Term]) -> Term:
    """Apply a triangular substitution, following bindings transitively."""
    if isinstance(t, Var):
        s = _walk(t, theta)
        return s if s is t or isinstance(s, (Const, Var)) else _resolve(s, theta)
    if isinstance(t, Fn) and not t._ground:
        return Fn(t.name, [_resolve(a, theta) for a in t.args])
    return t


def substitute_literal(lit: Literal, theta: Mapping[Var, Term]) -> Literal:
    return Literal(substitute(lit.atom, theta), lit.negated)


def substitute_clause(c: Clause, theta: Mapping[Var, Term]) -> Clause:
    return Clause(substitute(c.head, theta), tuple(substitute_literal(l, theta) for l in c.body))


def evaluate_arithmetic(t: Term) -> Term:
    """Evaluate ground ``+``/``-`` subterms over integers."""
    if isinstance(t, Fn):
        if t.name in ("+", "-") and len(t.args) == 2:
            a, b = evaluate_arithmetic(t.args[0]), evaluate_arithmetic(t.args[1])
            if isinstance(a, Const) and isinstance(b, Const) and isinstance(a.value, int) and isinstance(b.value, int):
                return Const(a.value + b.value if t.name == "+" else a.value - b.value)
            return Fn(t.name, (a, b))
        if t._ground and not any(isinstance(a, Fn) for a in t.args):
            return t
        return Fn(t.name, [evaluate_arithmetic(a) for a in t.args])
    return t


def _occurs(v: Var, t: Term, theta: Mapping[Var, Term]) -> bool:
    t = _walk(t, theta)
    if t == v:
        return True
    if isinstance(t, Fn):
        return any(_occurs(v, a, theta) for a in t.args)
    return False


def unify(a: Term, b: Term, theta: Optional[Substitution] = None) -> Optional[Substitution]:
    """Most general unifier of ``a`` and ``b`` (with occurs check), or None.

    The returned substitution is idempotent.
    """
    theta = dict(theta) if theta else {}
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, theta), _walk(y, theta)
        if x == y:
            continue
        if isinstance(x, Var):
            if _occurs(x, y, theta):
                return None
            theta[x] = y
        elif isinstance(y, Var):
            if _occurs(y, x, theta):
                return None
            theta[y] = x
        elif isinstance(x, Fn) and isinstance(y, Fn):
            if x.name != y.name or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
        else:
            return None
    return {v: _resolve(t, theta) for v, t in theta.items()}


def match(pattern: Term, target: Term, theta: Optional[Substitution] = None) -> Optional[Substitution]:
    """One-way matching: find theta extending ``theta`` with pattern.theta == target.

    Variables of ``target`` are treated as rigid symbols.
    """
    theta = dict(theta) if theta else {}
    return theta if _match_into(pattern, target, theta) else None


def _match_into(p: Term, t: Term, theta: Dict[Var, Term]) -> bool:
    if isinstance(p, Var):
        bound = theta.get(p)
        if bound is None:
            theta[p] = t
            return True
        return bound == t
    if isinstance(p, Const):
        return p == t
    if not isinstance(t, Fn) or p.name != t.name or len(p.args) != len(t.args):
        return False
    if p._ground:
        return p == t
    for pa, ta in zip(p.args, t.args):
        if not _match_into(pa, ta, theta):
            return False
    return True


# ---------------------------------------------------------------------------
# theta-subsumption

def theta_subsumption(c: Clause, d: Clause) -> Optional[Substitution]:
    """A substitution theta with head(c)theta = head(d) and body(c)theta a subset of body(d)."""
    theta = match(c.head, d.head)
    if theta is None:
        return None
    pending = list(c.body)
    targets = list(set(d.body))
    by_key: Dict[Tuple[bool, str, int], List[Literal]] = {}
    for lit in targets:
        by_key.setdefault((lit.negated, lit.atom.name, len(lit.atom.args)), []).append(lit)
    return _subsume_search(pending, by_key, theta)


def _subsume_search(pending: List[Literal], by_key, theta: Substitution) -> Optional[Substitution]:
    if not pending:
        return theta
    # first-fail: the literal with the fewest compatible targets goes next
    best_i, best_cands = -1, None
    for i, lit in enumerate(pending):
        cands = []
        for tgt in by_key.get((lit.negated, lit.atom.name, len(lit.atom.args)), ()):
            th = match(lit.atom, tgt.atom, theta)
            if th is not None:
                cands.append(th)
        if best_cands is None or len(cands) < len(best_cands):
            best_i, best_cands = i, cands
            if not cands:
                return None
    rest = pending[:best_i] + pending[best_i + 1:]
    for th in best_cands:
        res = _subsume_search(rest, by_key, th)
        if res is not None:
            return res
    return None


def theta_subsumes_clause(c: Clause, d: Clause) -> bool:
    """True iff c theta-subsumes d (c is at least as general as d)."""
    return theta_subsumption(c, d) is not None


def theta_subsumes_program(p1: Iterable[Clause], p2: Iterable[Clause]) -> bool:
    """True iff every clause of p1 theta-subsumes some clause of p2."""
    p2 = list(p2)
    return all(any(theta_subsumes_clause(c, d) for d in p2) for c in p1)


def is_variant(c: Clause, d: Clause) -> bool:
    return (len(set(c.body)) == len(set(d.body))
            and theta_subsumes_clause(c, d) and theta_subsumes_clause(d, c))


# ---------------------------------------------------------------------------
# variable depth

def variable_depth(c: Clause) -> Dict[Var, float]:
    """Depth of every variable of ``c``; ``math.inf`` when unreachable from the head."""
    head_vars = term_vars(c.head)
    depth: Dict[Var, float] = {v: 0 for v in head_vars}
    body_sets = [term_vars(l.atom) for l in c.body]
    frontier = list(head_vars)
    level = 0
    while frontier:
        level += 1
        nxt = []
        for v in frontier:
            for vs in body_sets:
                if v in vs:
                    for w in vs:
                        if w not in depth:
                            depth[w] = level
                            nxt.append(w)
        frontier = nxt
    for v in clause_vars(c):
        depth.setdefault(v, math.inf)
    return depth


# ---------------------------------------------------------------------------
# renaming and canonical forms

def rename_apart(c: Clause, suffix: str) -> Clause:
    theta = {v: Var(v.name + suffix) for v in clause_vars(c)}
    return substitute_clause(c, theta)


def clause_length(c: Clause) -> int:
    """Literal count: head plus body."""
    return 1 + len(c.body)


def canonical_key(c: Clause) -> str:
    """A string identifying ``c`` up to variable renaming and body order.

    Head variables are numbered by first appearance; body literals are
    sorted on a renaming-independent skeleton before the remaining
    variables are numbered. Exact for clauses whose variables all occur in
    the head.
    """
    from .syntax import format_literal, format_term
    theta: Dict[Var, Term] = {}
    for i, v in enumerate(term_vars(c.head)):
        theta[v] = Var(f"V{i}")
    n = len(theta)

    def skeleton(lit: Literal) -> str:
        masked = {v: (theta[v] if v in theta else Var("_")) for v in term_vars(lit.atom)}
        return format_literal(substitute_literal(lit, masked))

    body = sorted(set(c.body), key=skeleton)
    for lit in body:
        for v in term_vars(lit.atom):
            if v not in theta:
                theta[v] = Var(f"V{n}")
                n += 1
    head = format_term(substitute(c.head, theta))
    lits = sorted(format_literal(substitute_literal(l, theta)) for l in body)
    return head + " :- " + ", ".join(lits)
