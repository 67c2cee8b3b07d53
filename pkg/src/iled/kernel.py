"""Kernel Sets: abduce head atoms, saturate them, variabilize.

For the event calculus the head abduction has a closed form. Every ``I+``
item needs an initiation at that point and every ``T+`` item a termination,
and together these cover the window without touching any other item. So
``{initiatedAt(f,t) | I+} + {terminatedAt(f,t) | T+}`` is the unique
minimal explanation. :func:`abduce_heads_generic` finds the same set with
the general solver.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Optional, Set, Tuple

from .errors import NoSolution
from .event_calculus import (HOLDS, INIT, SDEC_SCOPED, TERM, BackgroundTheory, Window, WindowIndex, index_window)
from .logic import Clause, Const, Fn, Literal, Program, Term, Var, match
from .modes import LanguageConfig, ModeDeclaration, Placemarker, schema_bindings, variabilize
from .solver import AbductiveSolution, AbductiveTask, abduce
from .syntax import format_literal, format_term

__all__ = ["KernelSet", "abduce_heads", "abduce_heads_generic", "saturate", "saturate_atom", "build_kernel"]


@dataclass(frozen=True)
class KernelSet:
    """Ground Kernel clauses and their variabilizations, index-aligned."""

    ground_clauses: Tuple[Clause, ...] = ()
    variabilized: Tuple[Clause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ground_clauses", tuple(self.ground_clauses))
        object.__setattr__(self, "variabilized", tuple(self.variabilized))
        if len(self.ground_clauses) != len(self.variabilized):
            raise ValueError("ground and variabilized Kernel clauses must align")

    @property
    def origin(self) -> Dict[Clause, Clause]:
        """Variabilized clause to (first) ground origin."""
        out: Dict[Clause, Clause] = {}
        for v, g in zip(self.variabilized, self.ground_clauses):
            out.setdefault(v, g)
        return out

    def __len__(self):
        return len(self.variabilized)

    def __bool__(self):
        return bool(self.variabilized)

    def __iter__(self):
        return iter(self.variabilized)


def _head_modes_for(atom: Fn, cfg: LanguageConfig) -> Optional[ModeDeclaration]:
    for m in cfg.head_modes:
        pairs = schema_bindings(m.schema, atom)
        if pairs is not None and all(pm.kind != "#" or t.ground for pm, t in pairs):
            return m
    return None


def _head_order(cfg: LanguageConfig):
    order = {id(m): i for i, m in enumerate(cfg.head_modes)}

    def key(atom: Fn):
        m = _head_modes_for(atom, cfg)
        t = atom.args[1].value if len(atom.args) == 2 and isinstance(atom.args[1], Const) else 0
        return (order.get(id(m), len(order)), t, format_term(atom))
    return key


def abduce_heads(b: Optional[BackgroundTheory], w: Window, cfg: LanguageConfig) -> AbductiveSolution:
    """The minimal set of modeh instances explaining ``w``'s annotation."""
    idx = index_window(w, b)
    delta = [Fn(INIT, (f, Const(t))) for f, t in idx.heads_of(idx.i_plus)]
    delta += [Fn(TERM, (f, Const(t))) for f, t in idx.heads_of(idx.t_plus)]
    for a in delta:
        if _head_modes_for(a, cfg) is None:
            raise NoSolution(f"window {w.id}: {format_term(a)} is needed but matches no modeh declaration")
    delta.sort(key=_head_order(cfg))
    return AbductiveSolution(tuple(delta), (len(delta), tuple(format_term(a) for a in delta)))


def abduce_heads_generic(b: Optional[BackgroundTheory], w: Window, cfg: LanguageConfig,
                         cap: int = 2 ** 20) -> AbductiveSolution:
    """:func:`abduce_heads` through the general abductive solver (small windows only)."""
    b = b or BackgroundTheory()
    idx = index_window(w, b)
    trans = tuple(range(w.start, w.end))
    background = list(SDEC_SCOPED) + list(b.user_rules)
    background += [Clause(Fn("scope", (f,))) for f in idx.scope]
    background += [Clause(a) for a in sorted(idx.facts, key=format_term)]
    background += [Clause(Fn(HOLDS, (f, Const(w.start)))) for f in idx.scope if w.start in idx.ann[f]]
    abducibles = []
    for f in idx.scope:
        for name in (INIT, TERM):
            pat = Fn(name, (f, Var("T")))
            if _head_modes_for(Fn(name, (f, Const(w.start))), cfg) is not None:
                abducibles.append(pat)
    goals = []
    for f in idx.scope:
        for t in range(w.start + 1, w.end + 1):
            goals.append(Literal(Fn(HOLDS, (f, Const(t))), t not in idx.ann[f]))
    task = AbductiveTask(Program(tuple(background)), tuple(abducibles), tuple(goals),
                         {"time": trans}, {"T": "time"})
    sol = abduce(task, cap=cap)
    if sol is None:
        raise NoSolution(f"window {w.id}: no explanation in terms of modeh atoms")
    delta = sorted(sol.delta, key=_head_order(cfg))
    return AbductiveSolution(tuple(delta), (len(delta), tuple(format_term(a) for a in delta)))


# ---------------------------------------------------------------------------
# saturation

def _pattern(schema: Term, counter: List[int]) -> Term:
    if isinstance(schema, Placemarker):
        counter[0] += 1
        return Var(f"_P{counter[0]}")
    if isinstance(schema, Fn):
        return Fn(schema.name, [_pattern(a, counter) for a in schema.args])
    return schema


def _strip_time(atom: Fn) -> Tuple:
    """A time-abstracted key of a narrative atom."""
    if len(atom.args) == 2 and atom.name in (HOLDS, "happensAt"):
        return (atom.name, atom.args[0])
    return (atom.name, atom.args)


def saturate_atom(e: Fn, idx: WindowIndex, cfg: LanguageConfig) -> Clause:
    """The most specific ground clause with head ``e`` that is true in the window.

    Positive body schemas contribute every true instance whose input
    positions are bound by the head (or by outputs of earlier layers, up to
    the depth bound). A negative schema ``not q`` contributes when ``q`` is
    false and ``q``, up to its time stamp, is mentioned in the window.
    """
    hm = _head_modes_for(e, cfg)
    if hm is None:
        raise NoSolution(f"{format_term(e)} matches no modeh declaration")
    known: Set[Tuple[Term, str]] = set()
    for pm, t in schema_bindings(hm.schema, e):
        if pm.kind != "#":
            known.add((t, pm.type))
    mentioned = {_strip_time(a) for a in idx.window.narrative | idx.window.negative_narrative}
    mentioned_atoms = sorted(idx.window.narrative | idx.window.negative_narrative, key=format_term)
    body: Dict[Literal, int] = {}
    modes = cfg.body_modes
    for _layer in range(max(1, cfg.depth_bound)):
        new_known: Set[Tuple[Term, str]] = set()
        for mi, bm in enumerate(modes):
            pat = _pattern(bm.schema, [0])
            if not bm.negated:
                for fact in _candidates(idx, pat):
                    pairs = schema_bindings(bm.schema, fact)
                    if pairs is None or not _inputs_known(pairs, known):
                        continue
                    lit = Literal(fact, False)
                    if lit not in body:
                        body[lit] = mi
                    for pm, t in pairs:
                        if pm.kind == "-":
                            new_known.add((t, pm.type))
            else:
                for m in mentioned_atoms:
                    pairs = schema_bindings(bm.schema, m)
                    if pairs is None:
                        continue
                    for q in _rebind_time(bm.schema, pairs, known):
                        if q in idx.facts or _strip_time(q) not in mentioned:
                            continue
                        lit = Literal(q, True)
                        if lit not in body:
                            body[lit] = mi
        if not new_known - known:
            break
        known |= new_known
    lits = sorted(body, key=lambda l: (body[l], format_literal(l)))
    return Clause(e, tuple(lits))


def _candidates(idx: WindowIndex, pat: Fn):
    from .event_calculus import _key
    inner = pat.args[0] if pat.args else None
    pool = idx.by_sig.get(pat.signature, ()) if isinstance(inner, Var) else idx.by_key.get(_key(pat), ())
    return [f for f in pool if match(pat, f) is not None]


def _inputs_known(pairs, known) -> bool:
    for pm, t in pairs:
        if pm.kind == "+" and (t, pm.type) not in known:
            return False
    return True


def _rebind_time(schema: Fn, pairs, known) -> List[Fn]:
    """Instances of a negative schema built from a mentioned atom.

    Input positions of the time type are rebound to every known time;
    other input positions must already be known.
    """
    from .modes import TIME_TYPE
    slots = []
    for pm, t in pairs:
        if pm.kind == "+" and pm.type == TIME_TYPE:
            slots.append(sorted((k for k, ty in known if ty == TIME_TYPE), key=lambda c: (str(type(c)), str(c))))
        elif pm.kind == "+":
            if (t, pm.type) not in known:
                return []
            slots.append([t])
        else:
            slots.append([t])
    out = []
    for combo in itertools.product(*slots):
        out.append(_fill(schema, iter(combo)))
    return out


def _fill(schema: Term, values) -> Term:
    if isinstance(schema, Placemarker):
        return next(values)
    if isinstance(schema, Fn):
        return Fn(schema.name, [_fill(a, values) for a in schema.args])
    return schema


def saturate(delta: AbductiveSolution, b: Optional[BackgroundTheory], w: Window, cfg: LanguageConfig) -> List[Clause]:
    idx = index_window(w, b)
    out, seen = [], set()
    for e in delta.delta:
        c = saturate_atom(e, idx, cfg)
        if c not in seen:
            seen.add(c)
            out.append(c)
    return out


def build_kernel(b: Optional[BackgroundTheory], w: Window, cfg: LanguageConfig,
                 delta: Optional[AbductiveSolution] = None) -> KernelSet:
    """abduce_heads, then saturate, then variabilize each clause."""
    if delta is None:
        delta = abduce_heads(b, w, cfg)
    ground = saturate(delta, b, w, cfg)
    return KernelSet(tuple(ground), tuple(variabilize(g, cfg) for g in ground))
