"""Acceptance checks, one test per criterion.

Criteria 6 to 10 share one learning run per window size over the same
seeded 500-point stream; the held-out set is the next 200 points of that
stream.
"""

import time
import warnings

import pytest

from conftest import clauses, keys

from iled import Learner, audit, covers, datasets, evaluate, fires, load_stream
from iled.cli import main
from iled.event_calculus import clause_positive_footprint
from iled.induction import reduce_refined, revise
from iled.kernel import abduce_heads, build_kernel
from iled.logic import theta_subsumes_clause
from iled.synthetic import merge_windows, split_windows
from iled.syntax import format_term, parse_atom

SEED = 0
WINDOWS = (10, 50)


def _elapsed(f):
    t0 = time.perf_counter()
    f()
    return time.perf_counter() - t0


# ---------------------------------------------------------------------------
# worked examples


def test_c01_table3_golden():
    def check():
        ds = datasets.load("table3")
        w = ds.windows[0]
        assert sorted(map(format_term, abduce_heads(ds.background, w, ds.language).delta)) == [
            "initiatedAt(fighting(id3,id4),2)", "terminatedAt(fighting(id1,id2),1)"]
        kv = build_kernel(ds.background, w, ds.language)
        assert keys(kv.variabilized) == keys(clauses(
            "initiatedAt(fighting(X,Y),T) :- happensAt(abrupt(X),T), happensAt(abrupt(Y),T), "
            "holdsAt(close(X,Y,23),T).",
            "terminatedAt(fighting(X,Y),T) :- happensAt(abrupt(X),T), happensAt(walking(Y),T), "
            "not holdsAt(close(X,Y,23),T).",
        ))
        assert len(kv.ground_clauses) == 2
        out = revise(ds.background, [], w, kv)
        assert keys(out.clauses) == keys(clauses(
            "initiatedAt(fighting(X,Y),T) :- holdsAt(close(X,Y,23),T).",
            "terminatedAt(fighting(X,Y),T) :- happensAt(walking(Y),T).",
        ))
    assert _elapsed(check) < 5


def test_c02_table5_golden():
    def check():
        ds = datasets.load("table5")
        w = ds.windows[0]
        out = revise(ds.background, ds.hypothesis.clauses, w, None, reduce=False)
        assert sorted(map(format_term, out.delta)) == ["use(1,1,2)", "use(1,1,3)", "use(1,2,2)"]
        (specs,) = out.refined.values()
        assert keys(specs) == keys(datasets.load_program("table5", "expected.lp"))
        assert keys(reduce_refined(out, ds.background, w).clauses) == keys(out.clauses)
    assert _elapsed(check) < 5


def test_c03_example5_golden():
    def check():
        ds = datasets.load("example5")
        k1, k2 = clauses(
            "initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), happensAt(abrupt(Y),T), "
            "holdsAt(close(X,Y,23),T).",
            "initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), happensAt(kicking(Y),T), "
            "holdsAt(close(X,Y,23),T).",
        )
        learner = Learner(ds.background, ds.language)
        w1, w2, w3 = ds.windows
        learner.step(w1)
        (c,) = learner.hypothesis.clauses
        assert keys(c.supp.clauses) == keys([k1])
        learner.step(w2)
        (c,) = learner.hypothesis.clauses
        assert keys(c.supp.clauses) == keys([k1, k2])
        learner.step(w3)
        (c1,) = learner.hypothesis.clauses
        assert keys([c1.clause]) == keys(clauses(
            "initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), holdsAt(close(X,Y,23),T)."))
    assert _elapsed(check) < 5


def test_c04_example1_regression():
    w = datasets.load("example1").windows[0]
    r1 = covers(datasets.load_program("example1", "h1.lp"), None, w)
    r2 = covers(datasets.load_program("example1", "h2.lp"), None, w)
    assert (parse_atom("fighting(id1,id2)"), 3) in r1.uncovered_positives
    assert not r2.uncovered_positives and not r2.covered_negatives


def test_c05_oracle_suites():
    import test_oracles as o
    t = _elapsed(lambda: (o.test_theta_subsumption_oracle(), o.test_stable_models_oracle(),
                          o.test_abduction_oracle()))
    assert t < 120


# ---------------------------------------------------------------------------
# the soak runs


@pytest.fixture(scope="module")
def stream(tmp_path_factory):
    out = tmp_path_factory.mktemp("stream")
    assert main(["generate", "--out", str(out), "--seed", str(SEED), "--examples", "500",
                 "--test-examples", "200", "--window", "10"]) == 0
    ds = datasets.load("fighting")
    return out, ds, load_stream(out / "train.lp"), load_stream(out / "test.lp")


def _support_problems(h, windows, b):
    """Support-set violations, clause by clause on every stored window.

    Every support clause must be subsumed by its clause, and the support set
    must fire wherever the clause is needed and nowhere the clause does not.
    """
    problems = []
    plain = list(h.program)
    for a in h.clauses:
        for d in a.supp.clauses:
            if not theta_subsumes_clause(a.clause, d):
                problems.append(f"subsumption: clause {a.id}")
        for w in windows:
            own = fires(a.clause, w, b)
            supp = frozenset().union(*(fires(d, w, b) for d in a.supp.clauses))
            shifted = frozenset((f, t - 1) for f, t in clause_positive_footprint(a.clause, b, w, plain))
            # the support set covers what the clause is needed for, and never more than the clause
            if not supp <= own or not shifted <= supp:
                problems.append(f"coverage: clause {a.id} window {w.id}")
    return problems


@pytest.fixture(scope="module")
def soaks(stream):
    _, ds, train, test = stream
    out = {}
    for g in WINDOWS:
        ws = split_windows(merge_windows(train), g)
        learner = Learner(ds.background, ds.language)
        audits, supports, reads = [], [], []
        t0 = time.perf_counter()
        for k, w in enumerate(ws):
            rep = learner.step(w)
            reads.append(rep.max_reads_per_window)
            audits += audit(learner.hypothesis, ws[:k + 1], ds.background, learner.lineage)
            supports += _support_problems(learner.hypothesis, ws[:k + 1], ds.background)
        out[g] = dict(seconds=time.perf_counter() - t0, audits=audits, supports=supports, reads=reads,
                      revisions=sum(r.revisions for r in learner.reports),
                      metrics=evaluate(learner.hypothesis.program, split_windows(merge_windows(test), g),
                                       ds.background))
    return out


def test_c06_soundness_and_single_pass(soaks):
    for g, r in soaks.items():
        assert r["audits"] == [], g
        assert max(r["reads"]) <= 1, g
        assert r["seconds"] < 600, g


def test_c07_convergence(soaks, stream):
    assert sum(len(w) for w in stream[3]) == 200
    for g, r in soaks.items():
        assert (r["metrics"].precision, r["metrics"].recall) == (1.0, 1.0), g


def test_c08_support_set_invariants(soaks):
    for g, r in soaks.items():
        assert r["supports"] == [], g


def test_c09_determinism(stream, tmp_path):
    data, *_ = stream
    for g in WINDOWS:
        runs = []
        for k, jobs in enumerate((1, 1, 2)):
            out = tmp_path / f"g{g}.{k}"
            assert main(["learn", "--data", str(data / "train.lp"), "--modes", str(data / "modes.lp"),
                         "--background", str(data / "background.lp"), "--window", str(g),
                         "--jobs", str(jobs), "--out", str(out), "--metrics", str(out / "metrics.jsonl"),
                         "--test", str(data / "test.lp")]) == 0
            files = sorted(out.glob("hypothesis*.lp")) + [out / "run.jsonl", out / "metrics.jsonl"]
            runs.append({f.name: f.read_bytes() for f in files})
        assert len(runs[0]) > 3
        assert runs[0] == runs[1] == runs[2], g


def test_c10_revision_trend(soaks):
    r10, r50 = soaks[10]["revisions"], soaks[50]["revisions"]
    print(f"revisions: G=10 -> {r10}, G=50 -> {r50}")
    if r10 < r50:
        warnings.warn(f"fewer revisions with G=10 ({r10}) than with G=50 ({r50})")
