import pytest

from conftest import clauses, keys

from iled import (AnnotatedClause, DataError, HistoricalMemory, Hypothesis, Learner, SupportSet, audit,
                  covers_window, datasets, iled_step, single_pass_recheck)
from iled.incremental import init_support_new, init_support_refined, update_support_retained
from iled.io import parse_hypothesis, serialize_hypothesis
from iled.kernel import build_kernel
from iled.logic import theta_subsumes_clause
from iled.synthetic import GeneratorConfig, generate_synthetic, split_windows


def _stream(fighting, n, seed, size, persons=3):
    ds, truth = fighting
    w = generate_synthetic(truth, ds.background, n, seed, GeneratorConfig(persons=persons, arena=30))
    return split_windows(w, size)


def test_covered_window_leaves_hypothesis_alone(fighting):
    ds, truth = fighting
    h = Hypothesis(tuple(AnnotatedClause(c, SupportSet((c,)), i) for i, c in enumerate(truth, 1)))
    mem = HistoricalMemory()
    ws = _stream(fighting, 20, 0, 5)
    for w in ws[:2]:
        mem.append(w)
    h2, rep = iled_step(h, ws[2], mem, ds.background, ds.language)
    assert rep.covered and rep.revisions == 0 and rep.window_reads == 0
    assert list(h2.program) == list(h.program)


def test_single_pass_refines_at_the_failing_window(fighting):
    ds, truth = fighting
    truth = list(truth)
    (general,) = clauses("initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T).")
    ws = _stream(fighting, 25, 7, 5, persons=2)
    h = [AnnotatedClause(general, SupportSet((truth[0],)), 1)]
    h += [AnnotatedClause(c, SupportSet((c,)), i) for i, c in enumerate(truth[1:], 2)]
    assert [covers_window([a.clause for a in h], ds.background, w, True) for w in ws] == \
        [True, True, False, True, True]
    mem = HistoricalMemory()
    for w in ws:
        mem.append(w)
    rev = mem.begin_revision()
    out, revisions, _ = single_pass_recheck(h, mem, ds.background, ds.language)
    assert revisions == 1
    assert sorted(mem.reads(rev).values()) == [1] * 5
    assert all(covers_window([a.clause for a in out], ds.background, w, True) for w in ws)
    (child,) = [a for a in out if a.parent == 1]
    assert theta_subsumes_clause(general, child.clause)
    assert keys(child.supp.clauses) == keys([truth[0]])


def test_support_set_operations(fighting):
    ds = datasets.load("example5")
    w1, w2, _ = ds.windows
    kv = build_kernel(ds.background, w1, ds.language)
    (c,) = clauses("initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T).")
    supp = init_support_new(c, kv)
    assert keys(supp.clauses) == keys(kv.variabilized)
    a = AnnotatedClause(c, supp, 1)
    # same window again: footprint already covered
    assert update_support_retained(a, w1, ds.background, ds.language) == supp
    grown = update_support_retained(a, w2, ds.background, ds.language)
    assert len(grown) == 2 and all(theta_subsumes_clause(c, d) for d in grown)
    assert init_support_refined(c, a.with_supp(grown)) == grown
    (narrow,) = clauses("initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), happensAt(kicking(Y),T).")
    assert len(init_support_refined(narrow, a.with_supp(grown))) == 1
    with pytest.raises(ValueError):
        init_support_new(clauses("initiatedAt(fighting(X,Y),T) :- happensAt(running(X),T).")[0], kv)


def test_learning_run_invariants(fighting):
    ds, _ = fighting
    ws = _stream(fighting, 60, 2, 6)
    learner = Learner(ds.background, ds.language)
    for k, w in enumerate(ws):
        rep = learner.step(w)
        assert rep.max_reads_per_window <= 1
        assert audit(learner.hypothesis, ws[:k + 1], ds.background, learner.lineage) == []


def test_jobs_do_not_change_the_result(fighting):
    ds, _ = fighting
    ws = _stream(fighting, 60, 5, 6)
    runs = []
    for jobs in (1, 3):
        learner = Learner(ds.background, ds.language, jobs=jobs)
        learner.learn(ws)
        runs.append((serialize_hypothesis(learner.hypothesis), [r.record() for r in learner.reports]))
    assert runs[0] == runs[1]


def test_lenient_mode_runs(fighting):
    ds = datasets.load("example5")
    h = Learner(ds.background, ds.language, strict=False).learn(ds.windows)
    assert all(covers_window(h.program, ds.background, w) for w in ds.windows)


def test_hypothesis_snapshot_round_trip(fighting, tmp_path):
    ds, _ = fighting
    learner = Learner(ds.background, ds.language, out_dir=tmp_path)
    learner.learn(_stream(fighting, 30, 1, 10))
    text = serialize_hypothesis(learner.hypothesis)
    back = parse_hypothesis(text)
    assert back == learner.hypothesis
    assert serialize_hypothesis(back) == text
    assert (tmp_path / "hypothesis.3.lp").read_text().endswith(text)
    assert len((tmp_path / "run.jsonl").read_text().splitlines()) == 3


def test_store_reopen_and_order(tmp_path, fighting):
    ws = _stream(fighting, 30, 3, 5)
    mem = HistoricalMemory(tmp_path / "mem")
    for w in ws:
        mem.append(w)
    with pytest.raises(DataError):
        mem.append(ws[0])
    again = HistoricalMemory(tmp_path / "mem")
    assert again.ids == [w.id for w in ws]
    assert list(again) == ws
    assert set(again.reads().values()) == {1}


def test_store_streams_large_logs(tmp_path):
    import tracemalloc
    from iled import Window
    from iled.syntax import parse_atom
    mem = HistoricalMemory(tmp_path / "big")
    for k in range(10_000):
        t = 2 * k
        mem.append(Window(k + 1, t, t + 1, frozenset({parse_atom(f"happensAt(walking(id1),{t})")}),
                          frozenset({parse_atom(f"holdsAt(f(id1),{t + 1})")})))
    again = HistoricalMemory(tmp_path / "big")
    tracemalloc.start()
    n = 0
    for w in again:
        n += 1
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    assert n == 10_000
    # only the read counter grows; keeping every parsed window costs ~25 MB
    assert peak < 2_500_000
