"""Scoring hypotheses on annotated windows.

Decisions are made on the transitions each window contains: for every
scoped fluent instance ``f`` and time ``t`` in ``(start, end]`` the
hypothesis either derives ``holdsAt(f,t)`` or not (the state at ``start`` is
given). With ``unit="timepoint"`` a time point counts as positive when any
scoped fluent instance holds there.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Iterable, Optional

from .event_calculus import BackgroundTheory, Window, index_window, recognize
from .logic import Clause, clause_length

__all__ = ["Metrics", "evaluate", "UNITS"]

UNITS = ("pair", "timepoint")


@dataclass
class Metrics:
    precision: float
    recall: float
    tp: int = 0
    fp: int = 0
    fn: int = 0
    hypothesis_size: int = 0
    revisions: int = 0
    training_time: float = 0.0
    window_reads: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def _ratio(a: int, b: int) -> float:
    # no decisions of that kind means nothing was wrong
    return a / b if b else 1.0


def evaluate(h: Iterable[Clause], test: Iterable[Window], b: Optional[BackgroundTheory] = None,
             unit: str = "pair") -> Metrics:
    """Precision and recall of ``h`` over the test windows."""
    if unit not in UNITS:
        raise ValueError(f"unit must be one of {UNITS}")
    h = list(h)
    tp = fp = fn = 0
    for w in test:
        idx = index_window(w, b)
        derived = {(a.args[0], a.args[1].value) for a in recognize(h, b, w)}
        truth = {(a.args[0], a.args[1].value) for a in w.annotation}
        if unit == "pair":
            for f in idx.scope:
                for t in range(w.start + 1, w.end + 1):
                    d, g = (f, t) in derived, (f, t) in truth
                    tp += d and g
                    fp += d and not g
                    fn += g and not d
        else:
            for t in range(w.start + 1, w.end + 1):
                d = any((f, t) in derived for f in idx.scope)
                g = any((f, t) in truth for f in idx.scope)
                tp += d and g
                fp += d and not g
                fn += g and not d
    return Metrics(_ratio(tp, tp + fp), _ratio(tp, tp + fn), tp, fp, fn,
                   sum(clause_length(c) for c in h))
