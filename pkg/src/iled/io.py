"""Window streams, mode and background files, hypothesis snapshots.

A window file holds one or more windows::

    window 1 1 3.
    happensAt(abrupt(id1),1).
    not holdsAt(close(id1,id2,23),1).
    %% annotation
    holdsAt(fighting(id1,id2),1).
    not holdsAt(fighting(id3,id4),1).

Negative lines are optional. They are implied by the closed world, but
they mark the fluent instances a window talks about.

Hypothesis snapshots are programs in the clause grammar with support
clauses in structured comments::

    %@clause 2 parent 1
    initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T).
    %@supp initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), happensAt(abrupt(Y),T).
"""

from __future__ import annotations

import os
import re
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

from .errors import DataError, ParseError
from .event_calculus import HOLDS, BackgroundTheory, Window, time_of
from .logic import Const, Fn, Program
from .modes import LanguageConfig
from .syntax import format_clause, format_term, parse_clause, parse_modes, parse_program, parse_statements

__all__ = [
    "parse_stream", "serialize_window", "serialize_stream", "load_stream", "write_stream",
    "load_modes", "load_background", "parse_background", "serialize_hypothesis", "parse_hypothesis",
    "write_hypothesis", "read_hypothesis", "STREAM_SUFFIXES",
]

STREAM_SUFFIXES = (".lp", ".win", ".txt")

_HEADER = re.compile(r"^\s*window\s+(-?\d+)\s+(-?\d+)\s+(-?\d+)\s*\.\s*(%.*)?$")
_ANNOTATION = re.compile(r"^\s*%%\s*annotation\s*$")


def _fact_sort_key(a: Fn):
    try:
        t = time_of(a)
    except DataError:
        t = 0
    return (t, format_term(a))


def parse_stream(text: str, source: Optional[str] = None) -> List[Window]:
    """Parse the windows of a stream text, in file order."""
    lines = text.split("\n")
    blocks: List[Tuple[int, Tuple[int, int, int], List[Tuple[int, str]], List[Tuple[int, str]]]] = []
    current = None
    for n, line in enumerate(lines, 1):
        m = _HEADER.match(line)
        if m:
            current = (n, (int(m.group(1)), int(m.group(2)), int(m.group(3))), [], [])
            blocks.append(current)
            current = [current, False]
            continue
        if _ANNOTATION.match(line):
            if current is None:
                raise ParseError("annotation marker before any window header", n, 1, source)
            if current[1]:
                raise ParseError("duplicate annotation marker", n, 1, source)
            current[1] = True
            continue
        if current is None:
            if line.split("%", 1)[0].strip():
                raise ParseError("expected a window header 'window <id> <start> <end>.'", n, 1, source)
            continue
        block, in_ann = current
        (block[3] if in_ann else block[2]).append((n, line))

    windows = []
    seen_ids = set()
    for line0, (wid, start, end), narr, ann in blocks:
        if wid in seen_ids:
            raise DataError(f"duplicate window id {wid} (line {line0})")
        seen_ids.add(wid)
        pos_n, neg_n = _parse_facts(narr, source)
        pos_a, neg_a = _parse_facts(ann, source)
        for a in pos_a | neg_a:
            if a.name != HOLDS:
                raise DataError(f"window {wid}: annotation line is not a holdsAt atom: {format_term(a)}")
        windows.append(Window(wid, start, end, pos_n, pos_a, neg_n, neg_a))
    return windows


def _parse_facts(lines: Sequence[Tuple[int, str]], source):
    pos, neg = set(), set()
    if not lines:
        return frozenset(), frozenset()
    text = "\n".join(l for _, l in lines)
    for line, head, body in parse_statements(text, lines[0][0], source):
        if body:
            raise ParseError("window files hold facts only", line, 1, source)
        if not head.atom.ground:
            raise ParseError(f"non-ground fact {format_term(head.atom)}", line, 1, source)
        (neg if head.negated else pos).add(head.atom)
    return frozenset(pos), frozenset(neg)


def serialize_window(w: Window) -> str:
    out = [f"window {w.id} {w.start} {w.end}."]
    out += [format_term(a) + "." for a in sorted(w.narrative, key=_fact_sort_key)]
    out += ["not " + format_term(a) + "." for a in sorted(w.negative_narrative, key=_fact_sort_key)]
    out.append("%% annotation")
    lines = [(_fact_sort_key(a), format_term(a) + ".") for a in w.annotation]
    lines += [(_fact_sort_key(a), "not " + format_term(a) + ".") for a in w.negative_annotation]
    out += [l for _, l in sorted(lines)]
    return "\n".join(out) + "\n"


def serialize_stream(ws: Iterable[Window]) -> str:
    return "".join(serialize_window(w) for w in ws)


def load_stream(path: Union[str, os.PathLike]) -> List[Window]:
    """Windows from a file, or from every stream file of a directory (sorted by name)."""
    p = Path(path)
    if p.is_dir():
        # mode, background and hypothesis files may sit next to the stream
        files = sorted(f for f in p.iterdir() if f.suffix in STREAM_SUFFIXES and f.is_file()
                       and _is_stream_text(f.read_text()))
    elif p.is_file():
        files = [p]
    else:
        raise DataError(f"no such data file or directory: {p}")
    windows: List[Window] = []
    for f in files:
        windows.extend(parse_stream(f.read_text(), str(f)))
    ids = [w.id for w in windows]
    if len(set(ids)) != len(ids):
        raise DataError(f"duplicate window ids in {p}")
    return windows


def _is_stream_text(text: str) -> bool:
    for line in text.splitlines():
        s = line.strip()
        if s and not s.startswith("%"):
            return bool(_HEADER.match(s))
    return False


def write_stream(ws: Iterable[Window], path: Union[str, os.PathLike]) -> None:
    Path(path).write_text(serialize_stream(ws))


def load_modes(path: Union[str, os.PathLike], depth_bound: int = 1) -> LanguageConfig:
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such mode file: {p}")
    return LanguageConfig(tuple(parse_modes(p.read_text(), str(p))), depth_bound)


def parse_background(text: str, source: Optional[str] = None) -> BackgroundTheory:
    """User rules for statically defined fluents; ``inertial(name,arity).`` facts
    declare inertial fluent signatures."""
    rules, inertial = [], set()
    for c in parse_program(text, source):
        if c.head.name == "inertial" and not c.body:
            if len(c.head.args) != 2 or not all(isinstance(a, Const) for a in c.head.args) \
                    or not isinstance(c.head.args[1].value, int):
                raise DataError(f"expected inertial(name,arity): {c}")
            inertial.add((str(c.head.args[0].value), c.head.args[1].value))
        else:
            rules.append(c)
    return BackgroundTheory(Program(tuple(rules)), frozenset(inertial))


def load_background(path: Optional[Union[str, os.PathLike]]) -> BackgroundTheory:
    if path is None:
        return BackgroundTheory()
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such background file: {p}")
    return parse_background(p.read_text(), str(p))


# ---------------------------------------------------------------------------
# hypothesis snapshots

def serialize_hypothesis(h, header: Optional[str] = None) -> str:
    """Text of a hypothesis; clauses carry ids, lineage and support sets when known."""
    from .incremental import AnnotatedClause
    out = []
    if header:
        out += ["% " + line for line in header.splitlines()]
    clauses = getattr(h, "clauses", h)
    for c in clauses:
        if isinstance(c, AnnotatedClause):
            parent = "-" if c.parent is None else str(c.parent)
            out.append(f"%@clause {c.id} parent {parent}")
            out.append(format_clause(c.clause))
            out += ["%@supp " + format_clause(d) for d in c.supp.clauses]
        else:
            out.append(format_clause(c))
    return "\n".join(out) + "\n"


_CLAUSE_TAG = re.compile(r"^%@clause\s+(\d+)\s+parent\s+(-|\d+)\s*$")


def parse_hypothesis(text: str, source: Optional[str] = None):
    """Inverse of :func:`serialize_hypothesis` (returns a ``Hypothesis``)."""
    from .incremental import AnnotatedClause, Hypothesis, SupportSet
    entries = []  # [id, parent, clause_text_lines, supp]
    pending_tag = None
    for n, line in enumerate(text.split("\n"), 1):
        s = line.strip()
        m = _CLAUSE_TAG.match(s)
        if m:
            pending_tag = (int(m.group(1)), None if m.group(2) == "-" else int(m.group(2)))
            continue
        if s.startswith("%@supp "):
            if not entries:
                raise ParseError("support clause before any hypothesis clause", n, 1, source)
            entries[-1][3].append(parse_clause(s[len("%@supp "):]))
            continue
        if not s or s.startswith("%"):
            continue
        c = parse_clause(s)
        if pending_tag is None:
            pending_tag = (len(entries) + 1, None)
        entries.append([pending_tag[0], pending_tag[1], c, []])
        pending_tag = None
    acs = [AnnotatedClause(c, SupportSet(tuple(supp)), cid, parent) for cid, parent, c, supp in entries]
    return Hypothesis(tuple(acs))


def write_hypothesis(h, path: Union[str, os.PathLike], header: Optional[str] = None) -> None:
    Path(path).write_text(serialize_hypothesis(h, header))


def read_hypothesis(path: Union[str, os.PathLike]):
    p = Path(path)
    if not p.is_file():
        raise DataError(f"no such hypothesis file: {p}")
    return parse_hypothesis(p.read_text(), str(p))
