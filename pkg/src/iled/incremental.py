"""Incremental learning: support sets, the revision loop and the historical re-check.

Each hypothesis clause carries a support set, a list of most-specific
clauses it subsumes. Support sets are what make refinement safe without
revisiting old data. A clause is only ever specialized towards its support
clauses, and the support set keeps covering every example the clause is
responsible for.

:func:`iled_step` processes one window:

1. if the hypothesis covers it, only support sets are updated;
2. otherwise a Kernel Set is built and :func:`~iled.induction.revise` adds
   new clauses and/or refines existing ones;
3. when new clauses appeared, the stored windows are checked once, oldest
   first, and refined wherever the new clauses overreach.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import ModeError
from .event_calculus import (INIT, TERM, BackgroundTheory, Window, covers_window, footprint_mask, index_window)
from .induction import NODE_CAP, RevisionOutcome, revise
from .kernel import KernelSet, build_kernel, saturate_atom
from .logic import Clause, Const, Fn, canonical_key, clause_length, substitute_literal, theta_subsumes_clause
from .modes import LanguageConfig, variabilize
from .store import HistoricalMemory

__all__ = [
    "SupportSet", "AnnotatedClause", "Hypothesis", "StepReport", "Learner",
    "init_support_new", "init_support_refined", "update_support", "update_support_retained",
    "iled_step", "single_pass_recheck", "audit", "FRESH_PREDICATES",
]

log = logging.getLogger(__name__)

FRESH_PREDICATES = frozenset({"use", "try", "exception", "some_use"})


@dataclass(frozen=True)
class SupportSet:
    clauses: Tuple[Clause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)


@dataclass(frozen=True)
class AnnotatedClause:
    """A hypothesis clause with its support set, id and parent id (lineage)."""

    clause: Clause
    supp: SupportSet = SupportSet()
    id: int = 0
    parent: Optional[int] = None

    def with_supp(self, supp: SupportSet) -> "AnnotatedClause":
        return AnnotatedClause(self.clause, supp, self.id, self.parent)


@dataclass(frozen=True)
class Hypothesis:
    clauses: Tuple[AnnotatedClause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))

    @property
    def program(self) -> Tuple[Clause, ...]:
        return tuple(a.clause for a in self.clauses)

    @property
    def literal_count(self) -> int:
        return sum(clause_length(a.clause) for a in self.clauses)

    def __len__(self):
        return len(self.clauses)

    def __iter__(self):
        return iter(self.clauses)

    def __str__(self):
        from .syntax import format_program
        return format_program(self.program)


# ---------------------------------------------------------------------------
# support sets

def _dedup(clauses: Iterable[Clause]) -> Tuple[Clause, ...]:
    out, seen = [], set()
    for c in clauses:
        k = canonical_key(c)
        if k not in seen:
            seen.add(k)
            out.append(c)
    return tuple(out)


def init_support_new(c: Clause, kv: KernelSet) -> SupportSet:
    """The Kernel clauses ``c`` subsumes."""
    members = _dedup(d for d in kv.variabilized if theta_subsumes_clause(c, d))
    if not members:
        raise ValueError(f"new clause subsumes no Kernel clause: {c}")
    return SupportSet(members)


def init_support_refined(c: Clause, parent: AnnotatedClause) -> SupportSet:
    """The parent's support clauses that the specialization ``c`` still subsumes."""
    members = tuple(d for d in parent.supp.clauses if theta_subsumes_clause(c, d))
    if not members:
        raise ValueError(f"refinement subsumes none of its parent's support clauses: {c}")
    return SupportSet(members)


def _support_clause_for(c: Clause, e: Fn, idx, cfg: LanguageConfig) -> Optional[Clause]:
    """A variabilized saturation of ``e`` that ``c`` subsumes."""
    ground = saturate_atom(e, idx, cfg)
    try:
        kv = variabilize(ground, cfg)
    except ModeError:
        return None
    if theta_subsumes_clause(c, kv):
        return kv
    # saturation can miss literals of c (the mention rule for negations);
    # add c's own body instance at e
    from .logic import match
    theta = match(c.head, e)
    for sol in idx.solutions(c.body, theta or {}, negative_domains=True):
        extra = [substitute_literal(l, sol) for l in c.body]
        body = ground.body + tuple(l for l in extra if l not in ground.body)
        try:
            kv = variabilize(Clause(ground.head, body), cfg)
        except ModeError:
            return None
        if theta_subsumes_clause(c, kv):
            return kv
        break
    return None


def update_support(ac: AnnotatedClause, w: Window, b: Optional[BackgroundTheory], cfg: LanguageConfig,
                   h: Sequence[Clause] = ()) -> SupportSet:
    """Extend ``ac``'s support set until it fires on the clause's footprint in ``w``.

    For each footprint head no support clause fires on, the head is
    saturated and variabilized and the result is added.
    """
    c = ac.clause
    if c.head.name not in (INIT, TERM):
        return ac.supp
    idx = index_window(w, b)
    fp = footprint_mask(c, idx, h)
    if not fp:
        return ac.supp
    members = list(ac.supp.clauses)
    fired = 0
    for d in members:
        fired |= idx.fire(d)
    missing = fp & ~fired
    if not missing:
        return ac.supp
    keys = {canonical_key(d) for d in members}
    for f, t in idx.heads_of(missing):
        bit = 1 << idx.head_index[(f, t)]
        if fired & bit:
            continue
        d = _support_clause_for(c, Fn(c.head.name, (f, Const(t))), idx, cfg)
        if d is None:
            log.warning("window %s: no support clause for %s at (%s, %s)", w.id, c, f, t)
            continue
        fired |= idx.fire(d)
        k = canonical_key(d)
        if k not in keys:
            keys.add(k)
            members.append(d)
    return SupportSet(tuple(members))


update_support_retained = update_support


def _update_all(clauses: List[AnnotatedClause], w: Window, b, cfg) -> List[AnnotatedClause]:
    plain = [a.clause for a in clauses]
    out = []
    for a in clauses:
        s = update_support(a, w, b, cfg, plain)
        out.append(a if s is a.supp else a.with_supp(s))
    return out


# ---------------------------------------------------------------------------
# the loop

@dataclass
class StepReport:
    step: int
    window: int
    covered: bool
    new: int = 0
    refined: int = 0
    recheck_revisions: int = 0
    window_reads: int = 0
    max_reads_per_window: int = 0
    clauses: int = 0
    literals: int = 0
    seconds: float = field(default=0.0, compare=False)

    @property
    def revisions(self) -> int:
        """Revisions this step made: one for the new window plus the re-check ones."""
        return (0 if self.covered else 1) + self.recheck_revisions

    def record(self) -> Dict:
        """The deterministic part, for ``run.jsonl``."""
        d = dict(self.__dict__)
        d.pop("seconds")
        return d


def _apply(clauses: List[AnnotatedClause], outcome: RevisionOutcome, kv: KernelSet,
           next_id: int) -> Tuple[List[AnnotatedClause], int]:
    """Reassemble the hypothesis: children replace their parent in place, new clauses go last."""
    out: List[AnnotatedClause] = []
    refined = {id(p): specs for p, specs in outcome.refined.items()}
    for a in clauses:
        specs = refined.get(id(a))
        if specs is None:
            out.append(a)
            continue
        for c in specs:
            out.append(AnnotatedClause(c, init_support_refined(c, a), next_id, a.id))
            next_id += 1
    for c in outcome.new_clauses:
        out.append(AnnotatedClause(c, init_support_new(c, kv), next_id, None))
        next_id += 1
    return out, next_id


def single_pass_recheck(clauses: List[AnnotatedClause], mem: HistoricalMemory, b, cfg: LanguageConfig,
                        jobs: int = 1, next_id: Optional[int] = None,
                        node_cap: int = NODE_CAP, strict: bool = True,
                        trace=None) -> Tuple[List[AnnotatedClause], int, int]:
    """Check every stored window once, oldest first, refining where coverage fails.

    Coverage checks of a batch of windows may run concurrently; revisions
    are applied one window at a time in arrival order. Returns the
    clauses, the number of revisions and the next free clause id.
    """
    if next_id is None:
        next_id = max((a.id for a in clauses), default=0) + 1
    revisions = 0
    batch = max(1, jobs) * 2
    it = iter(mem)
    pool = ThreadPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        while True:
            chunk: List[Window] = []
            for w in it:
                chunk.append(w)
                if len(chunk) >= batch:
                    break
            if not chunk:
                break
            plain = [a.clause for a in clauses]
            if pool is not None:
                verdicts = list(pool.map(lambda w: covers_window(plain, b, w, strict), chunk))
            else:
                verdicts = [None] * len(chunk)
            stale = pool is None
            for w, ok in zip(chunk, verdicts):
                if stale:
                    ok = covers_window([a.clause for a in clauses], b, w, strict)
                if not ok:
                    if trace is not None:
                        trace.revision(w, clauses, KernelSet())
                    outcome = revise(b, clauses, w, KernelSet(), node_cap=node_cap, strict=strict)
                    clauses, next_id = _apply(clauses, outcome, KernelSet(), next_id)
                    revisions += 1
                    stale = True
                clauses = _update_all(clauses, w, b, cfg)
    finally:
        if pool is not None:
            pool.shutdown()
    return clauses, revisions, next_id


def iled_step(h: Hypothesis, w: Window, mem: HistoricalMemory, b: Optional[BackgroundTheory],
              cfg: LanguageConfig, jobs: int = 1, step: int = 0,
              node_cap: int = NODE_CAP, strict: bool = True, trace=None) -> Tuple[Hypothesis, StepReport]:
    """Revise ``h`` so that it covers ``w`` and every stored window, then store ``w``.

    ``strict`` is passed on to :func:`~iled.induction.revise`. ``trace``, if
    given, is told about every Kernel Set (``trace.kernel(w, kv)``), every
    revision (``trace.revision(w, clauses, kv)``) and the finished step
    (``trace.step(w, hypothesis)``).
    """
    t0 = time.perf_counter()
    rev = mem.begin_revision()
    clauses = list(h.clauses)
    next_id = max((a.id for a in clauses), default=0) + 1
    report = StepReport(step, w.id, covers_window([a.clause for a in clauses], b, w, strict))
    if not report.covered:
        kv = build_kernel(b, w, cfg)
        if trace is not None:
            trace.kernel(w, kv)
            trace.revision(w, clauses, kv)
        outcome = revise(b, clauses, w, kv, node_cap=node_cap, strict=strict)
        clauses, next_id = _apply(clauses, outcome, kv, next_id)
        report.new = len(outcome.new_clauses)
        report.refined = len(outcome.refined)
    clauses = _update_all(clauses, w, b, cfg)
    if report.new:
        clauses, report.recheck_revisions, next_id = single_pass_recheck(
            clauses, mem, b, cfg, jobs, next_id, node_cap, strict, trace)
    mem.append(w)
    reads = mem.reads(rev)
    report.window_reads = sum(reads.values())
    report.max_reads_per_window = max(reads.values(), default=0)
    out = Hypothesis(tuple(clauses))
    report.clauses = len(out)
    report.literals = out.literal_count
    report.seconds = time.perf_counter() - t0
    if trace is not None:
        trace.step(w, out)
    return out, report


class Learner:
    """Drives :func:`iled_step` over a stream and records the run.

    With ``out_dir`` set, each step writes ``hypothesis.<n>.lp`` and appends
    a line to ``run.jsonl`` (deterministic) and to ``timing.jsonl``.
    """

    def __init__(self, b: Optional[BackgroundTheory], cfg: LanguageConfig,
                 store: Optional[HistoricalMemory] = None, out_dir: Optional[Path] = None,
                 jobs: int = 1, node_cap: int = NODE_CAP,
                 on_step: Optional[Callable[[Hypothesis, StepReport], None]] = None, strict: bool = True,
                 trace=None):
        self.b = b or BackgroundTheory()
        self.cfg = cfg
        self.mem = store if store is not None else HistoricalMemory()
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.jobs = jobs
        self.node_cap = node_cap
        self.on_step = on_step
        self.strict = strict
        self.trace = trace
        self.hypothesis = Hypothesis()
        self.reports: List[StepReport] = []
        self.lineage: Dict[int, Clause] = {}
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)
            for name in ("run.jsonl", "timing.jsonl"):
                (self.out_dir / name).write_text("")

    def step(self, w: Window) -> StepReport:
        n = len(self.reports) + 1
        self.hypothesis, rep = iled_step(self.hypothesis, w, self.mem, self.b, self.cfg,
                                         self.jobs, n, self.node_cap, self.strict, self.trace)
        for a in self.hypothesis.clauses:
            self.lineage.setdefault(a.id, a.clause)
        self.reports.append(rep)
        if self.out_dir is not None:
            from .io import write_hypothesis
            write_hypothesis(self.hypothesis, self.out_dir / f"hypothesis.{n}.lp",
                             header=f"after step {n} (window {w.id})")
            with open(self.out_dir / "run.jsonl", "a") as f:
                f.write(json.dumps(rep.record(), sort_keys=True) + "\n")
            with open(self.out_dir / "timing.jsonl", "a") as f:
                f.write(json.dumps({"step": n, "seconds": round(rep.seconds, 6)}) + "\n")
        if self.on_step is not None:
            self.on_step(self.hypothesis, rep)
        return rep

    def learn(self, windows: Iterable[Window]) -> Hypothesis:
        for w in windows:
            self.step(w)
        return self.hypothesis


# ---------------------------------------------------------------------------
# audits (tests and --audit runs)

def audit(h: Hypothesis, windows: Iterable[Window], b: Optional[BackgroundTheory],
          lineage: Optional[Dict[int, Clause]] = None) -> List[str]:
    """Check the learning invariants against every given window; returns problems found.

    * the hypothesis covers every window;
    * every support clause is subsumed by its owner;
    * on every window, the support set fires on the owner's footprint;
    * refinements only add body literals to their parent;
    * no auxiliary predicate leaks into the hypothesis.
    """
    problems: List[str] = []
    plain = list(h.program)
    for a in h.clauses:
        for d in a.supp.clauses:
            if not theta_subsumes_clause(a.clause, d):
                problems.append(f"clause {a.id}: support clause not subsumed: {d}")
        for lit in a.clause.body:
            if lit.atom.name in FRESH_PREDICATES:
                problems.append(f"clause {a.id}: auxiliary predicate {lit.atom.name}")
        if lineage is not None and a.parent is not None and a.parent in lineage:
            if not theta_subsumes_clause(lineage[a.parent], a.clause):
                problems.append(f"clause {a.id}: body does not extend parent {a.parent}")
    for w in windows:
        if not covers_window(plain, b, w):
            problems.append(f"window {w.id}: not covered")
        idx = index_window(w, b)
        for a in h.clauses:
            fp = footprint_mask(a.clause, idx, plain)
            fired = 0
            for d in a.supp.clauses:
                fired |= idx.fire(d)
            if fp & ~fired:
                problems.append(f"window {w.id}: support set of clause {a.id} misses "
                                f"{len(idx.heads_of(fp & ~fired))} footprint example(s)")
    return problems

