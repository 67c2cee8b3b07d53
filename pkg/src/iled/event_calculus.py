"""The simplified discrete Event Calculus, example windows and coverage.

Recognition steps forward through a window's time points. The first point
is seeded from the annotation and each later point follows the two axioms::

    holdsAt(F,T+1) :- initiatedAt(F,T).
    holdsAt(F,T+1) :- holdsAt(F,T), not terminatedAt(F,T).

Negative examples come from a closed world scoped to the inertial fluent
instances the window mentions. Under that reading a hypothesis covers a
window exactly when every *coverage item* is met. Items are defined per
scoped fluent ``f`` and transition ``t -> t+1``, where ``ann(t)`` says
whether ``f`` is annotated at ``t``:

* ``I+``: ``not ann(t)`` and ``ann(t+1)``. Some initiation is needed.
* ``T+``: ``ann(t)`` and ``not ann(t+1)``. Some termination is needed.
* ``I-``: ``not ann(t+1)``. Initiation is forbidden.
* ``P``:  ``ann(t)`` and ``ann(t+1)``. A termination must be matched by an
  initiation.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Set, Tuple

from .errors import DataError, UnsafeClauseError
from .logic import Clause, Const, Fn, Literal, Program, Term, Var, evaluate_arithmetic, match, substitute, term_vars
from .syntax import format_term, parse_program

__all__ = [
    "SDEC", "SDEC_SCOPED", "INIT", "TERM", "HOLDS", "HAPPENS", "BackgroundTheory", "Window", "WindowIndex",
    "CoverageReport", "ClauseStatus", "Items", "index_window", "items", "recognize", "covers",
    "covers_window", "classify_clause", "ground_program", "clause_positive_footprint", "fires", "time_of",
]

INIT, TERM, HOLDS, HAPPENS = "initiatedAt", "terminatedAt", "holdsAt", "happensAt"

SDEC = parse_program("""
holdsAt(F,T+1) :- initiatedAt(F,T).
holdsAt(F,T+1) :- holdsAt(F,T), not terminatedAt(F,T).
""")

# The same axioms for ground solving: inertia applies only to the scoped
# inertial fluents, so narrative holdsAt facts of static fluents stay put.
SDEC_SCOPED = parse_program("""
holdsAt(F,T+1) :- initiatedAt(F,T), scope(F).
holdsAt(F,T+1) :- holdsAt(F,T), scope(F), not terminatedAt(F,T).
""")

FluentTime = Tuple[Fn, int]


def time_of(atom: Fn) -> int:
    """The time stamp of a ``happensAt``/``holdsAt``-style atom (its last argument)."""
    if len(atom.args) != 2 or not isinstance(atom.args[1], Const) or not isinstance(atom.args[1].value, int):
        raise DataError(f"expected an atom with an integer time stamp: {format_term(atom)}")
    return atom.args[1].value


@dataclass(frozen=True)
class BackgroundTheory:
    """The axioms plus user rules for statically defined fluents.

    ``inertial_fluents`` holds ``(name, arity)`` signatures of fluent
    terms. When empty, every fluent that appears in an annotation is taken
    to be inertial.
    """

    user_rules: Program = Program(())
    inertial_fluents: FrozenSet[Tuple[str, int]] = frozenset()

    def __post_init__(self):
        if not isinstance(self.user_rules, Program):
            object.__setattr__(self, "user_rules", Program(tuple(self.user_rules)))
        object.__setattr__(self, "inertial_fluents", frozenset(self.inertial_fluents))
        for c in self.user_rules:
            if c.head.name in (INIT, TERM) or (c.head.name == HOLDS and self._inertial_head(c.head)):
                raise DataError(f"user rules may only define statically defined fluents: {c}")

    def _inertial_head(self, head: Fn) -> bool:
        f = head.args[0] if head.args else None
        return isinstance(f, Fn) and f.signature in self.inertial_fluents

    @property
    def sdec(self) -> Program:
        return SDEC

    @property
    def program(self) -> Program:
        return SDEC + self.user_rules


@dataclass(frozen=True)
class Window:
    """A batch of consecutive time points ``start..end`` (inclusive).

    ``narrative`` and ``annotation`` hold the positive facts. The explicit
    ``not`` lines of a window file are kept in ``negative_narrative`` and
    ``negative_annotation``: they are implied by the closed world anyway,
    but they mark which fluent instances the window talks about.
    """

    id: int
    start: int
    end: int
    narrative: FrozenSet[Fn] = frozenset()
    annotation: FrozenSet[Fn] = frozenset()
    negative_narrative: FrozenSet[Fn] = frozenset()
    negative_annotation: FrozenSet[Fn] = frozenset()
    _cache: dict = field(default_factory=dict, compare=False, repr=False, hash=False)

    def __post_init__(self):
        for name in ("narrative", "annotation", "negative_narrative", "negative_annotation"):
            object.__setattr__(self, name, frozenset(getattr(self, name)))
        if self.end - self.start < 1:
            raise DataError(f"window {self.id}: needs at least two time points, got {self.start}..{self.end}")
        for name in ("narrative", "annotation", "negative_narrative", "negative_annotation"):
            for a in getattr(self, name):
                if not a.ground:
                    raise DataError(f"window {self.id}: non-ground fact {format_term(a)}")
                t = time_of(a)
                if not self.start <= t <= self.end:
                    raise DataError(f"window {self.id}: time stamp {t} of {format_term(a)} "
                                    f"outside {self.start}..{self.end}")
        for a in self.annotation | self.negative_annotation:
            if a.name != HOLDS or not isinstance(a.args[0], Fn):
                raise DataError(f"window {self.id}: annotation must be holdsAt(fluent,time): {format_term(a)}")
        clash = self.annotation & self.negative_annotation
        if clash:
            raise DataError(f"window {self.id}: contradictory annotation for "
                            f"{format_term(min(clash, key=format_term))}")
        clash = self.narrative & self.negative_narrative
        if clash:
            raise DataError(f"window {self.id}: contradictory narrative for "
                            f"{format_term(min(clash, key=format_term))}")

    @property
    def times(self) -> range:
        return range(self.start, self.end + 1)

    def __len__(self):
        return self.end - self.start + 1


@dataclass(frozen=True)
class Items:
    """Coverage items of a window, as ``(fluent, t)`` transition starts."""

    i_plus: FrozenSet[FluentTime]
    t_plus: FrozenSet[FluentTime]
    i_minus: FrozenSet[FluentTime]
    p: FrozenSet[FluentTime]


@dataclass(frozen=True)
class CoverageReport:
    covered_positives: FrozenSet[FluentTime]
    uncovered_positives: FrozenSet[FluentTime]
    covered_negatives: FrozenSet[FluentTime]

    @property
    def ok(self) -> bool:
        return not self.uncovered_positives and not self.covered_negatives


@dataclass(frozen=True)
class ClauseStatus:
    status: str  # "preservable" or "revisable"
    witnesses: FrozenSet[FluentTime] = frozenset()

    @property
    def revisable(self) -> bool:
        return self.status == "revisable"


def _key(atom: Fn):
    inner = atom.args[0] if atom.args else None
    if isinstance(inner, Fn):
        return (atom.name, len(atom.args), inner.name, len(inner.args))
    return (atom.name, len(atom.args), None, None)


def _is_time_position(atom: Fn, i: int) -> bool:
    return atom.name in (HOLDS, HAPPENS, INIT, TERM) and len(atom.args) == 2 and i == 1


class WindowIndex:
    """Per-window lookup structures shared by recognition and induction.

    Scoped heads ``(f, t)`` for ``t`` in ``start..end-1`` are numbered in
    (time, fluent serialization) order, so sets of heads are Python ints
    used as bitmasks.
    """

    def __init__(self, w: Window, b: BackgroundTheory):
        self.window = w
        self.background = b
        facts = set(w.narrative)
        if len(b.user_rules):
            facts |= _static_closure(b.user_rules, w)
        self.facts: FrozenSet[Fn] = frozenset(facts)
        self.by_key: Dict[tuple, List[Fn]] = defaultdict(list)
        self.by_sig: Dict[tuple, List[Fn]] = defaultdict(list)
        for a in sorted(self.facts, key=format_term):
            self.by_key[_key(a)].append(a)
            self.by_sig[a.signature].append(a)

        if b.inertial_fluents:
            self.inertial = set(b.inertial_fluents)
        else:
            self.inertial = {a.args[0].signature for a in w.annotation | w.negative_annotation}
        for a in w.annotation:
            if a.args[0].signature not in self.inertial:
                raise DataError(f"window {w.id}: annotated fluent {format_term(a.args[0])} is not inertial")
        for a in facts:
            if a.name == HOLDS and isinstance(a.args[0], Fn) and a.args[0].signature in self.inertial:
                raise DataError(f"window {w.id}: inertial fluent {format_term(a)} given as narrative")
        mentioned = {a.args[0] for a in w.annotation | w.negative_annotation}
        mentioned |= {a.args[0] for a in w.negative_narrative
                      if a.name == HOLDS and isinstance(a.args[0], Fn) and a.args[0].signature in self.inertial}
        self.scope: List[Fn] = sorted(mentioned, key=format_term)
        self.ann: Dict[Fn, FrozenSet[int]] = {f: frozenset() for f in self.scope}
        by_f: Dict[Fn, Set[int]] = defaultdict(set)
        for a in w.annotation:
            by_f[a.args[0]].add(time_of(a))
        for f, ts in by_f.items():
            self.ann[f] = frozenset(ts)

        self.heads: List[FluentTime] = [(f, t) for t in range(w.start, w.end) for f in self.scope]
        self.head_index: Dict[FluentTime, int] = {h: i for i, h in enumerate(self.heads)}
        self.all_mask = (1 << len(self.heads)) - 1
        i_plus = t_plus = i_minus = p = 0
        for i, (f, t) in enumerate(self.heads):
            a0, a1 = t in self.ann[f], (t + 1) in self.ann[f]
            bit = 1 << i
            if not a1:
                i_minus |= bit
                if a0:
                    t_plus |= bit
            elif a0:
                p |= bit
            else:
                i_plus |= bit
        self.i_plus, self.t_plus, self.i_minus, self.p = i_plus, t_plus, i_minus, p

        consts: Set[Term] = set()
        for a in itertools.chain(w.narrative, w.negative_narrative, w.annotation, w.negative_annotation):
            _inner_constants(a.args[0], consts)
        self.entities: List[Term] = sorted(consts, key=lambda c: (isinstance(c.value, int), str(c.value)))
        self.time_consts: List[Const] = [Const(t) for t in w.times]
        self._fire_cache: Dict[Clause, int] = {}

    # -- masks --------------------------------------------------------------
    def heads_of(self, mask: int) -> List[FluentTime]:
        out = []
        i = 0
        while mask:
            if mask & 1:
                out.append(self.heads[i])
            mask >>= 1
            i += 1
        return out

    def mask_of(self, pairs: Iterable[FluentTime]) -> int:
        m = 0
        for h in pairs:
            i = self.head_index.get(h)
            if i is not None:
                m |= 1 << i
        return m

    # -- literal evaluation ------------------------------------------------------
    def holds(self, atom: Fn) -> bool:
        """Truth of a ground narrative atom (closed world)."""
        return atom in self.facts

    def solutions(self, lits: Sequence[Literal], theta: Mapping[Var, Term], negative_domains: bool = False) -> Iterator[Dict[Var, Term]]:
        """Substitutions extending ``theta`` that make every literal true.

        Positive literals are joined against the facts. A variable that only
        occurs in negative literals is an error unless ``negative_domains``
        is set, in which case it ranges over the window's times (in time
        positions) or its entity constants.
        """
        pos = [l for l in lits if not l.negated]
        neg = [l for l in lits if l.negated]
        pos.sort(key=lambda l: 0 if substitute(l.atom, theta).ground else 1)
        yield from self._join(pos, neg, 0, dict(theta), negative_domains)

    def _join(self, pos, neg, i, theta, negative_domains):
        if i == len(pos):
            yield from self._negatives(neg, theta, negative_domains)
            return
        atom = substitute(pos[i].atom, theta)
        if atom.ground:
            if evaluate_arithmetic(atom) in self.facts:
                yield from self._join(pos, neg, i + 1, theta, negative_domains)
            return
        inner = atom.args[0] if atom.args else None
        pool = self.by_sig.get(atom.signature, ()) if isinstance(inner, Var) else self.by_key.get(_key(atom), ())
        for fact in pool:
            th = match(atom, fact, theta)
            if th is not None:
                yield from self._join(pos, neg, i + 1, th, negative_domains)

    def _negatives(self, neg, theta, negative_domains):
        free: List[Var] = []
        timeish: Set[Var] = set()
        for l in neg:
            atom = substitute(l.atom, theta)
            for v in term_vars(atom):
                if v not in free:
                    free.append(v)
            for j, a in enumerate(atom.args):
                if isinstance(a, Var) and _is_time_position(atom, j):
                    timeish.add(a)
        if free and not negative_domains:
            raise UnsafeClauseError(f"variable {free[0]} occurs only under negation")
        doms = [self.time_consts if v in timeish else self.entities for v in free]
        for combo in itertools.product(*doms):
            th = dict(theta)
            th.update(zip(free, combo))
            if all(evaluate_arithmetic(substitute(l.atom, th)) not in self.facts for l in neg):
                yield th

    def body_true(self, body: Sequence[Literal], theta: Mapping[Var, Term]) -> bool:
        for _ in self.solutions(body, theta):
            return True
        return False

    def count_matches(self, body: Sequence[Literal]) -> int:
        """Number of substitutions for the body's variables that satisfy it here."""
        n = 0
        for _ in self.solutions(body, {}, negative_domains=True):
            n += 1
        return n

    # -- firing -------------------------------------------------------------
    def fire(self, c: Clause) -> int:
        """Mask of scoped heads ``(f, t)`` at which ``c`` initiates or terminates ``f``."""
        m = self._fire_cache.get(c)
        if m is not None:
            return m
        m = 0
        if c.head.name in (INIT, TERM) and len(c.head.args) == 2:
            for i, (f, t) in enumerate(self.heads):
                theta = match(c.head, Fn(c.head.name, (f, Const(t))))
                if theta is None:
                    theta = _match_time_arith(c.head, f, t)
                    if theta is None:
                        continue
                if self.body_true(c.body, theta):
                    m |= 1 << i
        self._fire_cache[c] = m
        return m

    def fire_program(self, h: Iterable[Clause]) -> Tuple[int, int]:
        init = term = 0
        for c in h:
            if c.head.name == INIT:
                init |= self.fire(c)
            elif c.head.name == TERM:
                term |= self.fire(c)
        return init, term

    def masks_ok(self, init: int, term: int, strict: bool = False) -> bool:
        return not self.violations(init, term, strict)

    def violations(self, init: int, term: int, strict: bool = False) -> int:
        """Mask of items broken by the given firings.

        With ``strict``, a termination where the fluent persists is a
        violation even when an initiation restores the fluent.
        """
        return ((self.i_plus & ~init) | (self.i_minus & init)
                | (self.t_plus & ~term) | (self.p & term & (~0 if strict else ~init)))


def _match_time_arith(head: Fn, f: Fn, t: int):
    th = match(head.args[0], f)
    if th is None:
        return None
    tt = head.args[1]
    if isinstance(tt, Fn) and tt.name in ("+", "-") and isinstance(tt.args[0], Var) and isinstance(tt.args[1], Const):
        val = t - tt.args[1].value if tt.name == "+" else t + tt.args[1].value
        return match(tt.args[0], Const(val), th)
    return None


def _inner_constants(t: Term, out: Set[Term]):
    if isinstance(t, Const):
        out.add(t)
    elif isinstance(t, Fn):
        for a in t.args:
            _inner_constants(a, out)


def _static_closure(rules: Program, w: Window) -> Set[Fn]:
    from .solver import ground, stable_models
    facts = [Clause(a) for a in sorted(w.narrative, key=format_term)]
    times = list(w.times)

    def vt(c):
        out = {}
        for l in (Literal(c.head),) + c.body:
            for j, a in enumerate(l.atom.args):
                if isinstance(a, Var) and _is_time_position(l.atom, j):
                    out[a] = "time"
        return out
    gp = ground(list(rules) + facts, {"time": times}, var_types=vt)
    models = stable_models(gp)
    if len(models) != 1:
        raise DataError(f"window {w.id}: user rules must have exactly one model, got {len(models)}")
    return {a for a in models[0].atoms(gp) if a.args and _time_in(a, w)}


def _time_in(a: Fn, w: Window) -> bool:
    t = a.args[-1]
    return isinstance(t, Const) and isinstance(t.value, int) and w.start <= t.value <= w.end


def index_window(w: Window, b: Optional[BackgroundTheory] = None) -> WindowIndex:
    """The (cached) :class:`WindowIndex` of ``w`` under ``b``."""
    b = b or BackgroundTheory()
    idx = w._cache.get(b)
    if idx is None:
        idx = w._cache[b] = WindowIndex(w, b)
    return idx


def items(w: Window, b: Optional[BackgroundTheory] = None) -> Items:
    idx = index_window(w, b)
    return Items(*(frozenset(idx.heads_of(m)) for m in (idx.i_plus, idx.t_plus, idx.i_minus, idx.p)))


def fires(c: Clause, w: Window, b: Optional[BackgroundTheory] = None) -> FrozenSet[FluentTime]:
    """The scoped ``(fluent, t)`` pairs at which ``c`` fires in ``w``."""
    idx = index_window(w, b)
    return frozenset(idx.heads_of(idx.fire(c)))


# ---------------------------------------------------------------------------
# recognition and coverage

def _temporal(h: Sequence[Clause], idx: WindowIndex) -> bool:
    for c in h:
        if c.head.name not in (INIT, TERM) or len(c.head.args) != 2:
            return False
        for l in c.body:
            if l.atom.name in (INIT, TERM):
                return False
            if l.atom.name == HOLDS and l.atom.args and isinstance(l.atom.args[0], Fn) \
                    and l.atom.args[0].signature in idx.inertial:
                return False
    return True


def recognize(h: Iterable[Clause], b: Optional[BackgroundTheory], w: Window, engine: str = "auto") -> FrozenSet[Fn]:
    """Ground ``holdsAt`` atoms of the scoped inertial fluents over ``w``'s time points.

    ``engine`` is ``"temporal"`` (forward stepping), ``"solver"`` (ground
    the whole program and take its stable model) or ``"auto"``, which
    steps forward whenever hypothesis bodies do not mention inertial
    fluents.
    """
    h = list(h)
    idx = index_window(w, b)
    if engine == "solver" or (engine == "auto" and not _temporal(h, idx)):
        return _recognize_solver(h, idx)
    init, term = idx.fire_program(h)
    out = set()
    n = len(idx.scope)
    for k, f in enumerate(idx.scope):
        state = w.start in idx.ann[f]
        if state:
            out.add(Fn(HOLDS, (f, Const(w.start))))
        for t in range(w.start, w.end):
            bit = 1 << ((t - w.start) * n + k)
            state = bool(init & bit) or (state and not term & bit)
            if state:
                out.add(Fn(HOLDS, (f, Const(t + 1))))
    return frozenset(out)


def ground_program(h: Iterable[Clause], b: Optional[BackgroundTheory], w: Window):
    """The ground program whose stable model gives the recognition of ``w``."""
    return _ground_window(list(h), index_window(w, b))


def _recognize_solver(h: Sequence[Clause], idx: WindowIndex) -> FrozenSet[Fn]:
    from .solver import stable_models
    w = idx.window
    gp = _ground_window(h, idx)
    models = stable_models(gp)
    if len(models) != 1:
        raise DataError(f"window {w.id}: hypothesis has {len(models)} stable models (expected one)")
    scope = set(idx.scope)
    return frozenset(a for a in models[0].atoms(gp)
                     if a.name == HOLDS and a.args[0] in scope and _time_in(a, w))


def _ground_window(h: Sequence[Clause], idx: WindowIndex):
    from .solver import ground
    w = idx.window
    trans = list(range(w.start, w.end))
    seeds = [Clause(Fn(HOLDS, (f, Const(w.start)))) for f in idx.scope if w.start in idx.ann[f]]
    facts = [Clause(a) for a in sorted(idx.facts, key=format_term)]
    scoped = [Clause(Fn("scope", (f,))) for f in idx.scope]

    # the axioms step within the window; hypothesis heads range over scoped fluents
    hyp = []
    for c in h:
        if c.head.name in (INIT, TERM) and isinstance(c.head.args[0], (Var, Fn)):
            hyp.append(Clause(c.head, c.body + (Literal(Fn("scope", (c.head.args[0],))),)))
        else:
            hyp.append(c)

    def vt(c):
        out = {}
        for l in (Literal(c.head),) + c.body:
            for j, a in enumerate(l.atom.args):
                if isinstance(a, Var) and _is_time_position(l.atom, j):
                    out[a] = "time"
        return out
    return ground(list(SDEC_SCOPED) + hyp + seeds + facts + scoped, {"time": trans}, var_types=vt)


def covers(h: Iterable[Clause], b: Optional[BackgroundTheory], w: Window, engine: str = "auto") -> CoverageReport:
    idx = index_window(w, b)
    derived = {(a.args[0], a.args[1].value) for a in recognize(h, b, w, engine)}
    positives = {(a.args[0], time_of(a)) for a in w.annotation}
    negatives = {(f, t) for f in idx.scope for t in w.times} - positives
    return CoverageReport(frozenset(positives & derived), frozenset(positives - derived),
                          frozenset(negatives & derived))


def covers_window(h: Iterable[Clause], b: Optional[BackgroundTheory], w: Window, strict: bool = False) -> bool:
    """Fast coverage test through the item view (equivalent to ``covers(...).ok``).

    ``strict`` also rejects terminations at time points where the annotation
    says the fluent persists (it only applies to hypotheses whose bodies do
    not mention inertial fluents).
    """
    h = list(h)
    idx = index_window(w, b)
    if not _temporal(h, idx):
        return covers(h, b, w).ok
    return idx.masks_ok(*idx.fire_program(h), strict=strict)


def _shift(pairs: Iterable[FluentTime]) -> FrozenSet[FluentTime]:
    return frozenset((f, t + 1) for f, t in pairs)


def classify_clause(c: Clause, h: Iterable[Clause], b: Optional[BackgroundTheory], w: Window) -> ClauseStatus:
    """Revisable when ``c`` initiates into a negative, or terminates a positive
    that no initiation in ``h`` restores. Witnesses are ``(fluent, t+1)``."""
    idx = index_window(w, b)
    fired = idx.fire(c)
    if c.head.name == INIT:
        bad = fired & idx.i_minus
    elif c.head.name == TERM:
        init, _ = idx.fire_program(d for d in h if d != c)
        bad = fired & idx.p & ~init
    else:
        bad = 0
    if bad:
        return ClauseStatus("revisable", _shift(idx.heads_of(bad)))
    return ClauseStatus("preservable")


def footprint_mask(c: Clause, idx: WindowIndex, h: Iterable[Clause] = ()) -> int:
    fired = idx.fire(c)
    if c.head.name == INIT:
        _, term = idx.fire_program(h)
        return fired & (idx.i_plus | (idx.p & term))
    if c.head.name == TERM:
        return fired & idx.t_plus
    return 0


def clause_positive_footprint(c: Clause, b: Optional[BackgroundTheory], w: Window,
                              h: Iterable[Clause] = ()) -> FrozenSet[FluentTime]:
    """Examples whose correct classification relies on ``c``, as ``(fluent, t+1)``.

    For an initiation clause: the positives it initiates, plus positives
    that persist only because it re-initiates a fluent some termination in
    ``h`` ends. For a termination clause: the negatives it enforces.
    """
    idx = index_window(w, b)
    return _shift(idx.heads_of(footprint_mask(c, idx, h)))
