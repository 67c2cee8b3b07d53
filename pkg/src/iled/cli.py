"""The ``iled`` command.

Subcommands::

    iled learn     --data D [--modes M] [--background B] [--window G] [--out DIR]
    iled xhail     --data D [--modes M] [--background B] [--out DIR]
    iled evaluate  --hypothesis H --data D [--background B] [--unit pair|timepoint]
    iled generate  --out DIR [--seed S] [--examples N] [--test-examples N] [--window G]
    iled inspect   PATH [--data D] [--background B]

When ``--data`` is a directory holding ``modes.lp`` or ``background.lp``
those files are used unless given explicitly.

Exit codes: 0 success, 1 usage, 2 data error, 3 no solution, 4 resource cap.
"""

from __future__ import annotations

import argparse
import json
import logging
import re
import sys
import time
from pathlib import Path
from typing import List, Optional, Sequence

from . import datasets
from .errors import DataError, IledError
from .event_calculus import BackgroundTheory, Window, covers, ground_program
from .incremental import Hypothesis, Learner, audit
from .induction import NODE_CAP, generalization_transform, learn_batch, refinement_transform
from .io import (_is_stream_text, load_background, load_modes, load_stream, read_hypothesis,
                 write_hypothesis, write_stream)
from .kernel import KernelSet, build_kernel
from .metrics import UNITS, evaluate
from .store import HistoricalMemory
from .syntax import format_clause, format_program, parse_program
from .synthetic import GeneratorConfig, generate_synthetic, merge_windows, slice_window, split_windows

__all__ = ["main", "build_parser"]

log = logging.getLogger("iled")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="iled", description="Incremental learning of Event Calculus definitions.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log progress (repeat for more)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def task_args(s, window=True):
        s.add_argument("--data", required=True, help="stream file or directory of stream files")
        s.add_argument("--modes", help="mode declarations (default: DATA/modes.lp)")
        s.add_argument("--background", help="background theory (default: DATA/background.lp)")
        s.add_argument("--depth", type=int, default=1, help="variable depth bound (default 1)")
        if window:
            s.add_argument("--window", type=int, help="re-split the stream into windows of G time points")
        s.add_argument("--out", help="output directory")
        s.add_argument("--dump-kernel", metavar="DIR", help="write each Kernel Set here")
        s.add_argument("--dump-transformed", metavar="DIR", help="write each transformed program here")
        s.add_argument("--dump-ground", metavar="DIR", help="write ground recognition programs here")
        s.add_argument("--metrics", metavar="FILE", help="write line-delimited metric records")
        s.add_argument("--node-cap", type=int, default=NODE_CAP, help="search node limit")
        s.add_argument("--lenient", action="store_true",
                       help="let terminations fire where the fluent persists if an initiation restores it")

    s = sub.add_parser("learn", help="learn incrementally, one window at a time")
    task_args(s)
    s.add_argument("--jobs", type=int, default=1, help="threads for the historical re-check")
    s.add_argument("--test", metavar="DATA", help="score the final hypothesis on these windows")
    s.add_argument("--audit", action="store_true", help="check every learning invariant after each step")
    s.set_defaults(func=cmd_learn)

    s = sub.add_parser("xhail", help="learn from all windows at once (batch baseline)")
    task_args(s, window=False)
    s.set_defaults(func=cmd_xhail)

    s = sub.add_parser("evaluate", help="precision and recall of a hypothesis")
    s.add_argument("--hypothesis", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--background")
    s.add_argument("--unit", choices=UNITS, default="pair")
    s.add_argument("--metrics", metavar="FILE")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("generate", help="write a synthetic annotated stream")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--examples", type=int, default=500, help="training time points")
    s.add_argument("--test-examples", type=int, default=200, help="held-out time points")
    s.add_argument("--window", type=int, default=10)
    s.add_argument("--persons", type=int, default=4)
    s.add_argument("--truth", help="rules that annotate the stream (default: the bundled fighting rules)")
    s.add_argument("--modes", help="copied to OUT/modes.lp (default: the bundled fighting modes)")
    s.add_argument("--background", help="copied to OUT/background.lp")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("inspect", help="show a hypothesis with its support sets, or summarize a stream")
    s.add_argument("path", help="hypothesis file, run directory or stream file")
    s.add_argument("--data", help="also report coverage on these windows")
    s.add_argument("--background")
    s.set_defaults(func=cmd_inspect)
    return p


# ---------------------------------------------------------------------------
# shared helpers

def _beside(data: str, explicit: Optional[str], name: str) -> Optional[Path]:
    if explicit:
        return Path(explicit)
    d = Path(data)
    if d.is_dir() and (d / name).is_file():
        return d / name
    return None


def _load_task(args):
    modes = _beside(args.data, args.modes, "modes.lp")
    if modes is None:
        raise _Usage("--modes is required (no modes.lp next to the data)")
    if args.depth < 0:
        raise _Usage("--depth must be non-negative")
    cfg = load_modes(modes, args.depth)
    b = load_background(_beside(args.data, args.background, "background.lp"))
    windows = load_stream(args.data)
    if not windows:
        raise DataError(f"no windows in {args.data}")
    if getattr(args, "window", None) is not None:
        if args.window < 2:
            raise _Usage("--window must be at least 2")
        windows = split_windows(merge_windows(windows), args.window, windows[0].id)
    return cfg, b, windows


class _Usage(Exception):
    pass


class _Dumps:
    """Writes the debug dumps requested on the command line."""

    def __init__(self, b: BackgroundTheory, kernel=None, transformed=None, ground=None):
        self.b = b
        self.dirs = {}
        for key, d in (("kernel", kernel), ("transformed", transformed), ("ground", ground)):
            if d:
                Path(d).mkdir(parents=True, exist_ok=True)
                self.dirs[key] = Path(d)
        self.count = {}

    def _name(self, key: str, w: Window) -> Path:
        n = self.count[(key, w.id)] = self.count.get((key, w.id), 0) + 1
        suffix = "" if n == 1 else f".{n}"
        return self.dirs[key] / f"{key}.w{w.id}{suffix}.lp"

    def kernel(self, w: Window, kv: KernelSet):
        if "kernel" not in self.dirs:
            return
        text = ["% ground Kernel Set"] + [format_clause(c) for c in kv.ground_clauses]
        text += ["", "% variabilized Kernel Set"] + [format_clause(c) for c in kv.variabilized]
        self._name("kernel", w).write_text("\n".join(text) + "\n")

    def revision(self, w: Window, clauses, kv: KernelSet):
        if "transformed" not in self.dirs:
            return
        gen = generalization_transform(kv)
        ref = refinement_transform(clauses)
        text = ["% generalization of the Kernel Set", format_program(gen.clauses).rstrip("\n"), "",
                "% refinement of the running hypothesis", format_program(ref.clauses).rstrip("\n")]
        self._name("transformed", w).write_text("\n".join(text) + "\n")

    def step(self, w: Window, h):
        if "ground" not in self.dirs:
            return
        program = h.program if isinstance(h, Hypothesis) else list(h)
        self._name("ground", w).write_text(ground_program(program, self.b, w).dump())


def _write_jsonl(path: Optional[str], records: Sequence[dict]):
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as f:
            for r in records:
                f.write(json.dumps(r, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommands

def cmd_learn(args) -> int:
    cfg, b, windows = _load_task(args)
    if args.jobs < 1:
        raise _Usage("--jobs must be at least 1")
    out = Path(args.out) if args.out else None
    store = HistoricalMemory(out / "store") if out else None
    if store is not None and len(store):
        raise DataError(f"{out / 'store'} already holds windows; use a fresh --out directory")
    dumps = _Dumps(b, args.dump_kernel, args.dump_transformed, args.dump_ground)
    learner = Learner(b, cfg, store, out, args.jobs, args.node_cap, strict=not args.lenient, trace=dumps)
    t0 = time.perf_counter()
    for w in windows:
        rep = learner.step(w)
        log.info("step %d (window %d): %s, %d clauses", rep.step, w.id,
                 "covered" if rep.covered else f"{rep.new} new, {rep.refined} refined", rep.clauses)
        if args.audit:
            problems = audit(learner.hypothesis, windows[:rep.step], b, learner.lineage)
            if problems:
                raise DataError("audit failed after step %d: %s" % (rep.step, "; ".join(problems)))
    seconds = time.perf_counter() - t0
    h = learner.hypothesis
    summary = {
        "summary": True,
        "steps": len(learner.reports),
        "revisions": sum(r.revisions for r in learner.reports),
        "hypothesis_size": h.literal_count,
        "clauses": len(h),
        "window_reads": sum(r.window_reads for r in learner.reports),
    }
    if args.test:
        m = evaluate(h.program, load_stream(args.test), b)
        summary.update(precision=m.precision, recall=m.recall, tp=m.tp, fp=m.fp, fn=m.fn)
    _write_jsonl(args.metrics, [r.record() for r in learner.reports] + [summary])
    if out:
        write_hypothesis(h, out / "hypothesis.lp")
    log.info("learned %d clauses in %.2f s", len(h), seconds)
    sys.stdout.write(format_program(h.program))
    return 0


def cmd_xhail(args) -> int:
    cfg, b, windows = _load_task(args)
    dumps = _Dumps(b, args.dump_kernel, args.dump_transformed, args.dump_ground)
    ground, var = [], []
    for w in windows:
        kv = build_kernel(b, w, cfg)
        dumps.kernel(w, kv)
        dumps.revision(w, [], kv)
        ground += kv.ground_clauses
        var += kv.variabilized
    t0 = time.perf_counter()
    outcome = learn_batch(b, windows, KernelSet(ground, var), args.node_cap, strict=not args.lenient)
    seconds = time.perf_counter() - t0
    h = list(outcome.new_clauses)
    for w in windows:
        dumps.step(w, h)
    text = format_program(h)
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / "hypothesis.lp").write_text(text)
    _write_jsonl(args.metrics, [{"summary": True, "steps": 1, "revisions": 1 if h else 0,
                                 "hypothesis_size": sum(1 + len(c.body) for c in h), "clauses": len(h),
                                 "window_reads": 0}])
    log.info("batch hypothesis with %d clauses in %.2f s", len(h), seconds)
    sys.stdout.write(text)
    return 0


def cmd_evaluate(args) -> int:
    h = read_hypothesis(args.hypothesis)
    b = load_background(_beside(args.data, args.background, "background.lp"))
    windows = load_stream(args.data)
    if not windows:
        raise DataError(f"no windows in {args.data}")
    m = evaluate(h.program, windows, b, args.unit)
    record = dict(m.as_dict(), unit=args.unit)
    for k in ("revisions", "training_time", "window_reads"):
        record.pop(k)
    _write_jsonl(args.metrics, [record])
    print(json.dumps(record, sort_keys=True))
    return 0


def cmd_generate(args) -> int:
    if args.examples < 2 or args.test_examples < 0 or args.window < 2:
        raise _Usage("need --examples >= 2, --test-examples >= 0 and --window >= 2")
    src = datasets.path("fighting")
    truth_file = Path(args.truth) if args.truth else src / "truth.lp"
    modes_file = Path(args.modes) if args.modes else src / "modes.lp"
    bg_file = Path(args.background) if args.background else src / "background.lp"
    for f in (truth_file, modes_file, bg_file):
        if not f.is_file():
            raise DataError(f"no such file: {f}")
    truth = parse_program(truth_file.read_text(), str(truth_file))
    b = load_background(bg_file)
    held_out = args.test_examples if args.test_examples >= 2 else 0
    stream = generate_synthetic(truth, b, args.examples + held_out, args.seed, GeneratorConfig(persons=args.persons))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train = split_windows(slice_window(stream, 0, args.examples - 1), args.window)
    if held_out:
        test = slice_window(stream, args.examples, stream.end)
        write_stream(split_windows(test, args.window, len(train) + 1), out / "test.lp")
    write_stream(train, out / "train.lp")
    (out / "truth.lp").write_text(truth_file.read_text())
    (out / "modes.lp").write_text(modes_file.read_text())
    (out / "background.lp").write_text(bg_file.read_text())
    print(f"wrote {len(train)} training windows to {out}")
    return 0


def cmd_inspect(args) -> int:
    p = Path(args.path)
    if p.is_dir():
        snaps = sorted(p.glob("hypothesis.*.lp"), key=lambda f: int(re.findall(r"\d+", f.name)[-1]))
        if (p / "hypothesis.lp").is_file():
            p = p / "hypothesis.lp"
        elif snaps:
            p = snaps[-1]
        else:
            raise DataError(f"no hypothesis in {args.path}")
    if not p.is_file():
        raise DataError(f"no such file: {p}")
    text = p.read_text()
    if _is_stream_text(text):
        for w in load_stream(p):
            print(f"window {w.id}: times {w.start}..{w.end}, {len(w.narrative)} narrative facts, "
                  f"{len(w.annotation)} positives, {len(w.negative_annotation)} explicit negatives")
        return 0
    h = read_hypothesis(p)
    for a in h.clauses:
        parent = "" if a.parent is None else f" (refines {a.parent})"
        print(f"clause {a.id}{parent}: {format_clause(a.clause)}")
        for d in a.supp.clauses:
            print(f"    support: {format_clause(d)}")
    if args.data:
        b = load_background(_beside(args.data, args.background, "background.lp"))
        for w in load_stream(args.data):
            r = covers(h.program, b, w)
            state = "covered" if r.ok else (f"{len(r.uncovered_positives)} missed, "
                                             f"{len(r.covered_negatives)} wrong")
            print(f"window {w.id}: {state}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # usage errors and --help
        return e.code if isinstance(e.code, int) else 1
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except _Usage as e:
        parser.print_usage(sys.stderr)
        print(f"iled: error: {e}", file=sys.stderr)
        return 1
    except IledError as e:
        print(f"iled: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
