"""Hypothesis revision: the syntactic transformations and the search over them.

Two routes solve the same abductive task. :func:`transformed_task` builds
the ``use``/``try``/``exception`` program and hands it to the general
solver, which only scales to tiny windows. :func:`revise` instead compiles
every clause a ``use`` choice can produce into a bitmask of the scoped
heads it fires on, and runs a branch and bound over those masks.

Both minimise the same objective, compared in order:

1. the number of abduced ``use`` atoms;
2. the number of new clauses, so that on a tie specializing an existing
   clause wins over adding one;
3. the literal count of the clauses the choice produces;
4. the number of body substitutions those clauses satisfy in the window
   (fewer means more specific);
5. the sorted ``use`` index tuples, lexicographically.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import NoSolution, ResourceLimit
from .event_calculus import (HOLDS, INIT, SDEC_SCOPED, TERM, BackgroundTheory, Window, WindowIndex, _temporal,
                             covers_window, index_window)
from .kernel import KernelSet
from .logic import (FALSE, Clause, Const, Fn, Literal, Program, Var, canonical_key, clause_length, evaluate_arithmetic,
                    match, substitute, substitute_literal, term_vars, theta_subsumes_clause, theta_subsumption)
from .solver import AbductiveTask, abduce
from .syntax import format_clause

__all__ = [
    "TransformedProgram", "RevisionOutcome", "generalization_transform", "refinement_transform",
    "revise", "reduce_refined", "learn_batch", "transformed_task", "revise_generic", "NODE_CAP",
]

log = logging.getLogger(__name__)

NODE_CAP = 2 ** 20
MAX_CHOICE_LITERALS = 20


@dataclass(frozen=True)
class TransformedProgram:
    clauses: Program
    gen_index: Mapping[Tuple[int, int], Literal] = field(default_factory=dict)
    ref_index: Mapping[Tuple[int, int, int], Literal] = field(default_factory=dict)

    def __str__(self):
        return str(self.clauses)


@dataclass(frozen=True)
class RevisionOutcome:
    """Retained clauses, refinements keyed by parent, and new clauses.

    ``new_sources`` gives, per new clause, the 1-based index of the Kernel
    clause it was drawn from. ``delta`` lists the abduced ``use`` atoms.
    """

    retained: Tuple = ()
    refined: Mapping = field(default_factory=dict)
    new_clauses: Tuple[Clause, ...] = ()
    new_sources: Tuple[int, ...] = ()
    delta: Tuple[Fn, ...] = ()

    @property
    def clauses(self) -> List[Clause]:
        """The revised hypothesis as plain clauses (retained, refined, new)."""
        out = [a.clause for a in self.retained]
        for specs in self.refined.values():
            out.extend(specs)
        out.extend(self.new_clauses)
        return out

    @property
    def changed(self) -> bool:
        return bool(self.refined or self.new_clauses)


# ---------------------------------------------------------------------------
# transformations

def _v(name: str, vs: Sequence[Var]) -> Fn:
    return Fn(name, tuple(vs))


def _use(*ix: int) -> Fn:
    return Fn("use", tuple(Const(i) for i in ix))


def generalization_transform(kv: KernelSet) -> TransformedProgram:
    """Make every Kernel literal optional behind ``use(i,j)``."""
    out: List[Clause] = []
    index: Dict[Tuple[int, int], Literal] = {}
    for i, c in enumerate(kv.variabilized, 1):
        body = [Literal(_use(i, 0))]
        defs = []
        for j, lit in enumerate(c.body, 1):
            index[(i, j)] = lit
            t = Fn("try", (Const(i), Const(j), _v("v", term_vars(lit.atom))))
            body.append(Literal(t))
            defs.append(Clause(t, (Literal(_use(i, j)), lit)))
            defs.append(Clause(t, (Literal(_use(i, j), True),)))
        out.append(Clause(c.head, tuple(body)))
        out.extend(defs)
    return TransformedProgram(Program(tuple(out)), index, {})


def _copies(ac) -> List[Tuple[int, Clause, Clause, List[Tuple[int, Literal]]]]:
    """Per support clause: (j, the support clause, the parent mapped into it, extra literals)."""
    out = []
    for j, g in enumerate(ac.supp.clauses, 1):
        theta = theta_subsumption(ac.clause, g)
        if theta is None:
            raise ValueError(f"support clause does not extend its owner: {format_clause(g)}")
        base = Clause(substitute(ac.clause.head, theta),
                      tuple(substitute_literal(l, theta) for l in ac.clause.body))
        have = set(base.body)
        extras = [(k, l) for k, l in enumerate(g.body, 1) if l not in have]
        out.append((j, g, base, extras))
    return out


def refinement_transform(h: Sequence) -> TransformedProgram:
    """Guard each clause per support clause with an ``exception`` it may abduce its way into."""
    out: List[Clause] = []
    index: Dict[Tuple[int, int, int], Literal] = {}
    for i, ac in enumerate(h, 1):
        if not ac.supp.clauses:
            log.warning("clause %d has an empty support set and cannot be refined", i)
            out.append(ac.clause)
            continue
        for j, g, base, extras in _copies(ac):
            exc = Fn("exception", (Const(i), Const(j), _v("vars", term_vars(base.head))))
            out.append(Clause(base.head, base.body + (Literal(exc, True),)))
            for k, lit in extras:
                index[(i, j, k)] = lit
                out.append(Clause(exc, (Literal(_use(i, j, k)), lit.complement())))
    return TransformedProgram(Program(tuple(out)), {}, index)


# ---------------------------------------------------------------------------
# compiled options

class _Option:
    __slots__ = ("oid", "group", "kind", "head", "body", "fire", "card", "fresh", "lits", "uses", "_matches", "_idx")

    def __init__(self, group, kind, head, body, fire, card, uses, view, fresh=0):
        self.oid = -1
        self.group = group
        self.kind = kind
        self.head = head
        self.body = body
        self.fire = fire
        self.card = card
        self.fresh = fresh
        self.lits = 1 + len(body)
        self.uses = uses
        self._matches = None
        self._idx = view

    @property
    def matches(self) -> int:
        if self._matches is None:
            self._matches = self._idx.count_matches(self.body)
        return self._matches

    def key(self):
        return (self.card, self.fresh, self.lits, self.matches, self.uses)

    @property
    def clause(self) -> Clause:
        return Clause(self.head, self.body)


class _View:
    """One or more windows seen as a single head space.

    Each window's scoped heads occupy their own bit range, so firing and
    item masks of several windows are concatenated.
    """

    def __init__(self, idxs: Sequence[WindowIndex]):
        self.parts: List[Tuple[WindowIndex, int]] = []
        off = 0
        self.i_plus = self.t_plus = self.i_minus = self.p = 0
        for idx in idxs:
            self.parts.append((idx, off))
            self.i_plus |= idx.i_plus << off
            self.t_plus |= idx.t_plus << off
            self.i_minus |= idx.i_minus << off
            self.p |= idx.p << off
            off += len(idx.heads)
        self.label = ", ".join(str(idx.window.id) for idx in idxs)
        self._fire: Dict[Clause, int] = {}

    def fire(self, c: Clause) -> int:
        m = self._fire.get(c)
        if m is None:
            m = 0
            for idx, off in self.parts:
                m |= idx.fire(c) << off
            self._fire[c] = m
        return m

    def count_matches(self, body: Sequence[Literal]) -> int:
        return sum(idx.count_matches(body) for idx, _ in self.parts)

    def literal_table(self, head: Fn, lits: Sequence[Literal]) -> Optional[Dict[int, int]]:
        """Map truth-vector -> mask of heads, or None if bodies need joins."""
        hv = set(term_vars(head))
        if any(v not in hv for l in lits for v in term_vars(l.atom)):
            return None
        table: Dict[int, int] = {}
        for idx, off in self.parts:
            for i, (f, t) in enumerate(idx.heads):
                theta = match(head, Fn(head.name, (f, Const(t))))
                if theta is None:
                    continue
                vec = 0
                for b, l in enumerate(lits):
                    a = evaluate_arithmetic(substitute(l.atom, theta))
                    if (a in idx.facts) != l.negated:
                        vec |= 1 << b
                table[vec] = table.get(vec, 0) | (1 << (i + off))
        return table


class _Firing:
    """Firing masks of ``head <- base + chosen extras`` for every extras mask."""

    def __init__(self, view: _View, head: Fn, base: Sequence[Literal], extras: Sequence[Literal]):
        self.view, self.head, self.base, self.extras = view, head, tuple(base), tuple(extras)
        nb = len(self.base)
        self.base_mask = (1 << nb) - 1
        self.nb = nb
        self.table = view.literal_table(head, self.base + self.extras)

    def body(self, mask: int) -> Tuple[Literal, ...]:
        return self.base + tuple(l for b, l in enumerate(self.extras) if mask >> b & 1)

    def fire(self, mask: int) -> int:
        if self.table is None:
            return self.view.fire(Clause(self.head, self.body(mask)))
        need = self.base_mask | (mask << self.nb)
        out = 0
        for vec, heads in self.table.items():
            if vec & need == need:
                out |= heads
        return out


def _masks_by_size(n: int):
    if n > MAX_CHOICE_LITERALS:
        raise ResourceLimit(f"a clause with {n} optional literals exceeds the search limit")
    return sorted(range(1, 1 << n), key=lambda m: (bin(m).count("1"), m))


def _enumerate(firing: _Firing, kind: str, view: _View, make, strict: bool = False) -> List[_Option]:
    """Options over nonempty extras masks. Initiation options must avoid ``I-``
    (and, when ``strict``, termination options must avoid ``P``); such
    options are kept only when minimal."""
    out = []
    safe: List[int] = []
    forbidden = view.i_minus if kind == INIT else (view.p if strict else 0)
    for m in _masks_by_size(len(firing.extras)):
        if forbidden:
            if any(s & m == s for s in safe):
                continue
            f = firing.fire(m)
            if f & forbidden:
                continue
            safe.append(m)
        else:
            f = firing.fire(m)
        out.append(make(m, f))
    return out


def _dominance(opts: List[_Option], view: _View) -> List[_Option]:
    def cover(o):
        if o.kind == INIT:
            return o.fire & (view.i_plus | view.p), 0
        return o.fire & view.t_plus, o.fire & view.p

    def dominates(a, b, full):
        ga, ba = cover(a)
        gb, bb = cover(b)
        if ga & gb != gb or ba & ~bb:
            return False
        if full:
            return a.key() <= b.key()
        return (a.card, a.lits) < (b.card, b.lits)

    for full in (False, True):
        opts = sorted(opts, key=(lambda o: o.key()) if full else (lambda o: (o.card, o.lits, o.uses)))
        kept: List[_Option] = []
        for o in opts:
            if not any(dominates(k, o, full) for k in kept):
                kept.append(o)
        opts = kept
    return opts


# ---------------------------------------------------------------------------
# the search

@dataclass
class _Refinable:
    index: int           # 1-based position in h
    ac: object
    kind: str
    retain_fire: int
    copies: List[int]    # copy group ids
    forced: bool


class _Problem:
    def __init__(self, view: _View, h: Sequence, kv: KernelSet, strict: bool = False):
        self.view = view
        self.options: List[_Option] = []
        self.group_opts: List[List[_Option]] = []
        self.group_owner: List[Optional[int]] = []  # refinable index for copy groups
        self.refinables: List[_Refinable] = []
        self.fixed_init = 0
        self.fixed_term = 0
        self.fixed: List[int] = []
        self.copy_meta: Dict[int, Tuple[int, Clause, List[Tuple[int, Literal]]]] = {}
        self.new_meta: Dict[int, Tuple[int, Clause]] = {}

        for i, ac in enumerate(h, 1):
            c = ac.clause
            fire = view.fire(c)
            kind = c.head.name
            if kind not in (INIT, TERM):
                self.fixed.append(i - 1)
                continue
            if kind == INIT:
                unsafe = bool(fire & view.i_minus)
            else:
                unsafe = strict and bool(fire & view.p)
            if not ac.supp.clauses or ((kind == INIT or strict) and not unsafe):
                if unsafe:
                    raise NoSolution(f"window {view.label}: clause {i} covers negatives and has no support set")
                self.fixed.append(i - 1)
                if kind == INIT:
                    self.fixed_init |= fire
                else:
                    self.fixed_term |= fire
                continue
            copies = _copies(ac)
            if any(not extras for _, _, _, extras in copies):
                # a support clause equal to its owner: the owner cannot be specialized
                if unsafe:
                    raise NoSolution(f"window {view.label}: clause {i} covers negatives and cannot be specialized")
                self.fixed.append(i - 1)
                if kind == INIT:
                    self.fixed_init |= fire
                else:
                    self.fixed_term |= fire
                continue
            r = _Refinable(i, ac, kind, fire, [], kind == INIT or strict)
            for j, g, base, extras in copies:
                gid = self._new_group(len(self.refinables))
                firing = _Firing(view, base.head, base.body, [l for _, l in extras])

                def make(m, f, gid=gid, firing=firing, extras=extras, i=i, j=j, kind=kind):
                    ks = tuple((3, i, j, extras[b][0]) for b in range(len(extras)) if m >> b & 1)
                    return _Option(gid, kind, firing.head, firing.body(m), f, len(ks), ks, view)
                self._set_opts(gid, _dominance(_enumerate(firing, kind, view, make, strict), view))
                self.copy_meta[gid] = (j, base, extras)
                r.copies.append(gid)
            if r.forced and any(not self.group_opts[g] for g in r.copies):
                raise NoSolution(f"window {view.label}: clause {i} cannot be specialized to avoid the negatives")
            self.refinables.append(r)

        seen: Dict[str, int] = {}
        for i, c in enumerate(kv.variabilized, 1):
            key = canonical_key(c)
            if key in seen or c.head.name not in (INIT, TERM) or not c.body:
                continue
            seen[key] = i
            gid = self._new_group(None)
            firing = _Firing(view, c.head, (), c.body)
            kind = c.head.name

            def make(m, f, gid=gid, firing=firing, i=i, kind=kind):
                js = tuple((2, i, j + 1) for j in range(len(firing.extras)) if m >> j & 1)
                return _Option(gid, kind, firing.head, firing.body(m), f, 1 + len(js), ((2, i, 0),) + js, view, fresh=1)
            opts = _enumerate(firing, kind, view, make, strict)
            if kind == INIT:
                useful = view.i_plus if strict else view.i_plus | view.p
            else:
                useful = view.t_plus
            opts = _dominance([o for o in opts if o.fire & useful], view)
            self._set_opts(gid, opts)
            self.new_meta[gid] = (i, c)

        self.init_at: Dict[int, List[_Option]] = {}
        self.term_at: Dict[int, List[_Option]] = {}
        for gid, opts in enumerate(self.group_opts):
            if self.group_owner[gid] is not None:
                continue
            for o in opts:
                target = self.init_at if o.kind == INIT else self.term_at
                f = o.fire
                while f:
                    low = f & -f
                    target.setdefault(low, []).append(o)
                    f ^= low
        for d in (self.init_at, self.term_at):
            for k in d:
                d[k].sort(key=lambda o: o.key())

    def _new_group(self, owner) -> int:
        self.group_opts.append([])
        self.group_owner.append(owner)
        return len(self.group_opts) - 1

    def _set_opts(self, gid: int, opts: List[_Option]):
        opts.sort(key=lambda o: o.key())
        for o in opts:
            o.oid = len(self.options)
            self.options.append(o)
        self.group_opts[gid] = opts


class _Search:
    def __init__(self, prob: _Problem, node_cap: int):
        self.p = prob
        self.view = prob.view
        self.node_cap = node_cap
        self.nodes = 0
        self.best = None
        self.best_key = None

    def run(self):
        queue = []
        refined = frozenset(k for k, r in enumerate(self.p.refinables) if r.forced)
        for k in sorted(refined):
            queue += [(g, 0) for g in self.p.refinables[k].copies]
        self._node({}, refined, tuple(queue), frozenset(), (0, 0, 0, 0))
        return self.best

    def _masks(self, chosen, refined):
        init, term = self.p.fixed_init, self.p.fixed_term
        for o in chosen.values():
            if o.kind == INIT:
                init |= o.fire
            else:
                term |= o.fire
        for k, r in enumerate(self.p.refinables):
            if k not in refined:
                if r.kind == INIT:
                    init |= r.retain_fire
                else:
                    term |= r.retain_fire
        return init, term

    @staticmethod
    def _add(a, o):
        return (a[0] + o.card, a[1] + o.fresh, a[2] + o.lits, a[3] + o.matches)

    def _pruned(self, lb) -> bool:
        return self.best_key is not None and lb > self.best_key[:4]

    def _node(self, chosen, refined, queue, excluded, cost):
        self.nodes += 1
        if self.nodes > self.node_cap:
            raise ResourceLimit(f"revision search exceeded {self.node_cap} nodes",
                                best=None if self.best is None else self.best_key[0])
        if queue:
            lb = cost
            for g, avoid in queue:
                cands = [o for o in self.p.group_opts[g] if not o.fire & avoid]
                if not cands:
                    return
                lb = (lb[0] + min(o.card for o in cands), lb[1], lb[2] + min(o.lits for o in cands),
                      lb[3] + min(o.matches for o in cands))
            if self._pruned(lb):
                return
            g, avoid = queue[0]
            for o in self.p.group_opts[g]:
                if o.fire & avoid:
                    continue
                ch = dict(chosen)
                ch[g] = o
                self._node(ch, refined, queue[1:], excluded, self._add(cost, o))
            return

        view = self.view
        init, term = self._masks(chosen, refined)
        v_ip = view.i_plus & ~init
        v_tp = view.t_plus & ~term
        v_p = view.p & term & ~init
        if not (v_ip | v_tp | v_p):
            uses = tuple(sorted(u for o in chosen.values() for u in o.uses))
            key = cost + (uses,)
            if self.best_key is None or key < self.best_key:
                self.best_key = key
                self.best = (dict(chosen), refined)
            return

        def free(o):
            return o.group not in chosen and o.oid not in excluded

        best_item = None
        item_lb = [0, 0, 0, 0]
        for bitset, at, is_p in ((v_ip, self.p.init_at, False), (v_tp, self.p.term_at, False),
                                 (v_p, self.p.init_at, True)):
            f = bitset
            while f:
                bit = f & -f
                f ^= bit
                opts = [o for o in at.get(bit, ()) if free(o)]
                refine = None
                if is_p:
                    refine = self._refine_set(chosen, refined, bit)
                n = len(opts) + (1 if refine else 0)
                if n == 0:
                    return
                if not refine:
                    item_lb[0] = max(item_lb[0], min(o.card for o in opts))
                    item_lb[1] = max(item_lb[1], min(o.fresh for o in opts))
                    item_lb[2] = max(item_lb[2], min(o.lits for o in opts))
                    item_lb[3] = max(item_lb[3], min(o.matches for o in opts))
                if best_item is None or n < best_item[0]:
                    best_item = (n, bit, opts, refine)
        lb = tuple(c + m for c, m in zip(cost, item_lb))
        if self._pruned(lb):
            return
        _, bit, opts, refine = best_item
        ex = set(excluded)
        for o in opts:
            ch = dict(chosen)
            ch[o.group] = o
            self._node(ch, refined, (), frozenset(ex), self._add(cost, o))
            ex.add(o.oid)
        if refine:
            q = tuple((g, bit) for k in refine for g in self.p.refinables[k].copies)
            self._node(chosen, refined | frozenset(refine), q, frozenset(ex), cost)

    def _refine_set(self, chosen, refined, bit) -> Optional[List[int]]:
        """Retained termination clauses to specialize so that nothing terminates at ``bit``."""
        if self.p.fixed_term & bit:
            return None
        if any(o.kind == TERM and o.fire & bit for o in chosen.values()):
            return None
        out = []
        for k, r in enumerate(self.p.refinables):
            if r.kind == TERM and k not in refined and r.retain_fire & bit:
                out.append(k)
        return out or None


def _delta_atoms(uses: Iterable[Tuple[int, ...]]) -> Tuple[Fn, ...]:
    return tuple(_use(*u[1:]) for u in sorted(uses))


def revise(b: Optional[BackgroundTheory], h: Sequence, w: Window, kv: Optional[KernelSet] = None,
           reduce: bool = True, node_cap: int = NODE_CAP, strict: bool = True) -> RevisionOutcome:
    """Revise ``h`` (annotated clauses) so that it covers ``w``.

    With an empty ``kv`` only refinements are possible (re-check mode).
    With ``strict`` (the default) the time points where a fluent persists
    count as negative examples for termination clauses, so an initiation is
    never used to undo a termination.
    """
    kv = kv or KernelSet()
    idx = index_window(w, b)
    plain = [a.clause for a in h]
    if covers_window(plain, b, w, strict):
        return RevisionOutcome(tuple(h), {}, (), (), ())
    if not _temporal(plain + list(kv.variabilized), idx):
        return revise_generic(b, h, w, kv, reduce=reduce, strict=strict)
    prob = _Problem(_View([idx]), h, kv, strict)
    found = _Search(prob, node_cap).run()
    if found is None:
        raise NoSolution(f"window {w.id}: no revision of the hypothesis covers the window")
    chosen, refined = found
    outcome = _assemble(prob, h, chosen, refined)
    if not covers_window(outcome.clauses, b, w, strict):
        raise RuntimeError(f"window {w.id}: internal error, revision does not cover the window")
    if reduce and outcome.refined:
        outcome = reduce_refined(outcome, b, w, strict)
    return outcome


def learn_batch(b: Optional[BackgroundTheory], windows: Sequence[Window], kv: KernelSet,
                node_cap: int = NODE_CAP, strict: bool = True) -> RevisionOutcome:
    """New clauses from ``kv`` covering every window at once (no prior hypothesis)."""
    idxs = [index_window(w, b) for w in windows]
    if all(idx.masks_ok(0, 0) for idx in idxs):
        return RevisionOutcome()
    if not all(_temporal(list(kv.variabilized), idx) for idx in idxs):
        raise NoSolution("batch learning supports temporal clause bodies only")
    prob = _Problem(_View(idxs), [], kv, strict)
    found = _Search(prob, node_cap).run()
    if found is None:
        raise NoSolution("no hypothesis drawn from the Kernel Set covers every window")
    outcome = _assemble(prob, [], *found)
    for w in windows:
        if not covers_window(outcome.clauses, b, w, strict):
            raise RuntimeError(f"window {w.id}: internal error, batch hypothesis does not cover the window")
    return outcome


def _assemble(prob: _Problem, h: Sequence, chosen, refined) -> RevisionOutcome:
    refined_ix = {prob.refinables[k].index for k in refined}
    retained = tuple(a for i, a in enumerate(h, 1) if i not in refined_ix)
    specs: Dict = {}
    for k in sorted(refined):
        r = prob.refinables[k]
        out = []
        for g in r.copies:
            c = chosen[g].clause
            if c not in out:
                out.append(c)
        specs[r.ac] = tuple(out)
    new, sources = [], []
    for gid in sorted(g for g in chosen if prob.group_owner[g] is None):
        new.append(chosen[gid].clause)
        sources.append(prob.new_meta[gid][0])
    uses = [u for o in chosen.values() for u in o.uses]
    return RevisionOutcome(retained, specs, tuple(new), tuple(sources), _delta_atoms(uses))


# ---------------------------------------------------------------------------
# reduction of refinements

def reduce_refined(outcome: RevisionOutcome, b: Optional[BackgroundTheory], w: Window,
                   strict: bool = True) -> RevisionOutcome:
    """Replace each refinement by a smaller set of specializations that still
    subsumes the parent's support set and keeps the window covered.

    Candidates are the minimal specializations drawn from any support
    clause that stay consistent in the window. A greedy cover then picks
    the candidate covering most support clauses (ties: shorter, then
    lexicographic) until every support clause is covered.
    """
    idx = index_window(w, b)
    view = _View([idx])
    result = dict(outcome.refined)
    for parent, specs in outcome.refined.items():
        others = [a.clause for a in outcome.retained] + list(outcome.new_clauses)
        for p2, s2 in result.items():
            if p2 is not parent:
                others.extend(s2)
        init_o, _ = idx.fire_program(others)
        cands: Dict[str, Clause] = {}
        for j, g, base, extras in _copies(parent):
            firing = _Firing(view, base.head, base.body, [l for _, l in extras])
            found: List[int] = []
            for m in _masks_by_size(len(extras)):
                if any(s & m == s for s in found):
                    continue
                f = firing.fire(m)
                if parent.clause.head.name == INIT:
                    bad = f & idx.i_minus
                else:
                    bad = f & idx.p & (~0 if strict else ~init_o)
                if bad:
                    continue
                found.append(m)
                c = Clause(base.head, firing.body(m))
                cands.setdefault(canonical_key(c), c)
        supp = list(parent.supp.clauses)
        covers_of = {k: frozenset(n for n, d in enumerate(supp) if theta_subsumes_clause(c, d))
                     for k, c in cands.items()}
        todo = set(range(len(supp)))
        chosen: List[Clause] = []
        while todo:
            best = min(cands, key=lambda k: (-len(covers_of[k] & todo), clause_length(cands[k]), k))
            if not covers_of[best] & todo:
                break
            chosen.append(cands[best])
            todo -= covers_of[best]
        if todo:
            continue
        old_cost = (len(specs), sum(clause_length(c) for c in specs))
        new_cost = (len(chosen), sum(clause_length(c) for c in chosen))
        if new_cost >= old_cost:
            continue
        trial = dict(result)
        trial[parent] = tuple(chosen)
        clauses = [a.clause for a in outcome.retained] + [c for s in trial.values() for c in s] + list(outcome.new_clauses)
        if covers_window(clauses, b, w, strict):
            result = trial
    return RevisionOutcome(outcome.retained, result, outcome.new_clauses, outcome.new_sources, outcome.delta)


# ---------------------------------------------------------------------------
# the general route

def transformed_task(b: Optional[BackgroundTheory], h: Sequence, w: Window, kv: KernelSet,
                     strict: bool = False) -> AbductiveTask:
    """The abductive task over ``SDEC + U(Kv) + U(H)`` with ``use`` abducibles.

    ``strict`` adds a constraint forbidding terminations where the fluent
    persists (see :func:`revise`).
    """
    b = b or BackgroundTheory()
    idx = index_window(w, b)
    gen = generalization_transform(kv)
    ref = refinement_transform(h)
    program: List[Clause] = list(SDEC_SCOPED) + list(b.user_rules)
    program += [Clause(Fn("scope", (f,))) for f in idx.scope]
    program += [Clause(a) for a in sorted(idx.facts, key=str)]
    program += [Clause(Fn(HOLDS, (f, Const(w.start)))) for f in idx.scope if w.start in idx.ann[f]]
    program += list(gen.clauses) + list(ref.clauses)
    # a new clause needs at least one body literal
    for i, c in enumerate(kv.variabilized, 1):
        some = Fn("some_use", (Const(i),))
        program += [Clause(some, (Literal(_use(i, j)),)) for j in range(1, len(c.body) + 1)]
        program.append(Clause(FALSE, (Literal(_use(i, 0)), Literal(some, True))))
    if strict:
        persists = sorted(idx.heads_of(idx.p), key=lambda ft: (ft[1], str(ft[0])))
        program += [Clause(Fn("persists", (f, Const(t)))) for f, t in persists]
        fv, tv = Var("F"), Var("T")
        program.append(Clause(FALSE, (Literal(Fn(TERM, (fv, tv))), Literal(Fn("persists", (fv, tv))))))
    abducibles = [_use(i, 0) for i in range(1, len(kv.variabilized) + 1)]
    abducibles += [_use(i, j) for (i, j) in sorted(gen.gen_index)]
    abducibles += [_use(*k) for k in sorted(ref.ref_index)]
    goals = [Literal(Fn(HOLDS, (f, Const(t))), t not in idx.ann[f])
             for f in idx.scope for t in range(w.start + 1, w.end + 1)]
    names = {v.name for c in list(gen.clauses) + list(ref.clauses) for v in _clause_vars(c)}
    var_types = {n: ("time" if n.startswith("T") else "entity") for n in names}
    domains = {"time": tuple(range(w.start, w.end)), "entity": tuple(idx.entities)}
    return AbductiveTask(Program(tuple(program)), tuple(abducibles), tuple(goals), domains, var_types)


def _clause_vars(c: Clause):
    out = term_vars(c.head)
    for l in c.body:
        term_vars(l.atom, out)
    return out


def _clauses_from_delta(delta: Iterable[Fn], h: Sequence, kv: KernelSet, dedup: bool = True):
    ix = [tuple(a.value for a in u.args) for u in delta]
    new, sources = [], []
    for i, c in enumerate(kv.variabilized, 1):
        if (i, 0) in ix:
            js = sorted(j for (a, j, *rest) in [t + (None,) for t in ix if len(t) == 2] if a == i and j)
            new.append(Clause(c.head, tuple(c.body[j - 1] for j in js)))
            sources.append(i)
    refined: Dict = {}
    retained = []
    for i, ac in enumerate(h, 1):
        mine = [t for t in ix if len(t) == 3 and t[0] == i]
        if not mine:
            retained.append(ac)
            continue
        specs = []
        for j, g, base, extras in _copies(ac):
            ks = {t[2] for t in mine if t[1] == j}
            c = Clause(base.head, base.body + tuple(l for k, l in extras if k in ks))
            if not dedup or c not in specs:
                specs.append(c)
        refined[ac] = tuple(specs)
    return tuple(retained), refined, tuple(new), tuple(sources)


def revise_generic(b: Optional[BackgroundTheory], h: Sequence, w: Window, kv: Optional[KernelSet] = None,
                   reduce: bool = False, cap: int = 2 ** 20, strict: bool = True) -> RevisionOutcome:
    """:func:`revise` through the general solver (small windows only)."""
    kv = kv or KernelSet()
    idx = index_window(w, b)
    task = transformed_task(b, h, w, kv, strict)

    def objective(delta):
        retained, refined, new, _ = _clauses_from_delta(delta, h, kv, dedup=False)
        clauses = list(new) + [c for s in refined.values() for c in s]
        lits = sum(clause_length(c) for c in clauses)
        matches = sum(idx.count_matches(c.body) for c in clauses)
        uses = tuple(sorted(((2,) if len(u.args) == 2 else (3,)) + tuple(a.value for a in u.args) for u in delta))
        return (len(new), lits, matches, uses)

    sol = abduce(task, cap=cap, objective=objective)
    if sol is None:
        raise NoSolution(f"window {w.id}: no revision of the hypothesis covers the window")
    delta = sorted(sol.delta, key=lambda u: tuple(a.value for a in u.args))
    retained, refined, new, sources = _clauses_from_delta(delta, h, kv)
    outcome = RevisionOutcome(retained, refined, new, sources, tuple(delta))
    if reduce and refined:
        outcome = reduce_refined(outcome, b, w, strict)
    return outcome
