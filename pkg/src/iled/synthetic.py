"""Random event streams annotated by known rules.

Persons wander on a square grid. At every time point each person emits one
low-level event and every pair closer than the distance threshold gets a
``close`` fact. The annotation is whatever the truth rules recognize, so a
learner that recovers the rules scores perfectly on fresh streams.

>>> from iled import datasets
>>> from iled.synthetic import generate_synthetic, split_windows
>>> truth = datasets.load_program("fighting", "truth.lp")
>>> w = generate_synthetic(truth, None, 20, seed=1)
>>> [(x.start, x.end) for x in split_windows(w, 10)]
[(0, 9), (10, 19)]
"""

from __future__ import annotations

import itertools
import math
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .errors import DataError
from .event_calculus import HAPPENS, HOLDS, BackgroundTheory, Window, recognize, time_of
from .logic import Const, Fn, Program

__all__ = ["GeneratorConfig", "generate_synthetic", "split_windows", "slice_window", "merge_windows"]

EVENTS = ("walking", "running", "active", "inactive", "abrupt")


@dataclass(frozen=True)
class GeneratorConfig:
    persons: int = 4
    events: Tuple[str, ...] = EVENTS
    event_probability: float = 1.0
    threshold: int = 23
    arena: int = 60
    step: int = 8
    fluent: str = "fighting"


def _person(i: int) -> Const:
    return Const(f"id{i + 1}")


def generate_synthetic(truth: Program, b: Optional[BackgroundTheory], n_examples: int, seed: int,
                       config: GeneratorConfig = GeneratorConfig(), start: int = 0) -> Window:
    """A single window of ``n_examples`` time points, annotated by ``truth``.

    The narrative lists the emitted events, the ``close`` facts, and explicit
    ``not`` lines for pairs that are not close and persons that are not
    inactive. The annotation states the target fluent, positively or
    negatively, for every ordered pair ``(a, b)`` with ``a < b``.
    """
    if n_examples < 2:
        raise DataError("a stream needs at least two time points")
    if not 2 <= config.persons <= 26:
        raise DataError("between 2 and 26 persons are supported")
    rng = random.Random(seed)
    people = [_person(i) for i in range(config.persons)]
    pairs = list(itertools.combinations(range(config.persons), 2))
    pos = [(rng.randint(0, config.arena), rng.randint(0, config.arena)) for _ in people]
    narrative, negative = set(), set()
    dist = Const(config.threshold)
    for t in range(start, start + n_examples):
        tc = Const(t)
        for i, p in enumerate(people):
            ev = rng.choice(config.events) if rng.random() < config.event_probability else None
            if ev is not None:
                narrative.add(Fn(HAPPENS, (Fn(ev, (p,)), tc)))
            if ev != "inactive" and "inactive" in config.events:
                negative.add(Fn(HAPPENS, (Fn("inactive", (p,)), tc)))
        for i, j in pairs:
            (x1, y1), (x2, y2) = pos[i], pos[j]
            atom = Fn(HOLDS, (Fn("close", (people[i], people[j], dist)), tc))
            if math.hypot(x1 - x2, y1 - y2) <= config.threshold:
                narrative.add(atom)
            else:
                negative.add(atom)
        pos = [(_clamp(x + rng.randint(-config.step, config.step), config.arena),
                _clamp(y + rng.randint(-config.step, config.step), config.arena)) for x, y in pos]

    end = start + n_examples - 1
    fluents = [Fn(config.fluent, (people[i], people[j])) for i, j in pairs]
    every = frozenset(Fn(HOLDS, (f, Const(t))) for f in fluents for t in range(start, end + 1))
    b = b or BackgroundTheory(inertial_fluents=frozenset({(config.fluent, 2)}))
    # nothing holds at the first time point; the rules decide the rest
    blank = Window(0, start, end, frozenset(narrative), frozenset(), frozenset(negative), every)
    positives = recognize(truth, b, blank)
    return Window(0, start, end, frozenset(narrative), positives, frozenset(negative), every - positives)


def _clamp(v: int, hi: int) -> int:
    return max(0, min(hi, v))


def split_windows(w: Window, size: int, first_id: int = 1) -> List[Window]:
    """Disjoint windows of ``size`` time points; a short tail joins the last window."""
    if size < 2:
        raise DataError("window size must be at least 2")
    bounds = []
    t = w.start
    while t <= w.end:
        bounds.append([t, min(t + size - 1, w.end)])
        t += size
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] < 1:
        tail = bounds.pop()
        bounds[-1][1] = tail[1]
    # bucket atoms by time once instead of scanning the stream per window
    fields = ("narrative", "annotation", "negative_narrative", "negative_annotation")
    by_time = {f: defaultdict(list) for f in fields}
    for f in fields:
        for a in getattr(w, f):
            by_time[f][time_of(a)].append(a)

    def cut(f, s, e):
        return frozenset(itertools.chain.from_iterable(by_time[f].get(t, ()) for t in range(s, e + 1)))
    return [Window(first_id + k, s, e, *(cut(f, s, e) for f in fields)) for k, (s, e) in enumerate(bounds)]


def slice_window(w: Window, start: int, end: int, wid: Optional[int] = None) -> Window:
    """The part of ``w`` between ``start`` and ``end`` (inclusive)."""
    def cut(atoms):
        return frozenset(a for a in atoms if start <= time_of(a) <= end)
    return Window(w.id if wid is None else wid, start, end, cut(w.narrative), cut(w.annotation),
                  cut(w.negative_narrative), cut(w.negative_annotation))


def merge_windows(ws: Sequence[Window], wid: Optional[int] = None) -> Window:
    """One window spanning contiguous windows."""
    ws = sorted(ws, key=lambda w: w.start)
    for a, b in zip(ws, ws[1:]):
        if b.start != a.end + 1:
            raise DataError(f"windows {a.id} and {b.id} are not contiguous")

    def union(attr):
        return frozenset(itertools.chain.from_iterable(getattr(w, attr) for w in ws))
    return Window(ws[0].id if wid is None else wid, ws[0].start, ws[-1].end, union("narrative"),
                  union("annotation"), union("negative_narrative"), union("negative_annotation"))
