"""The worked examples shipped in ``iled.datasets``."""

from conftest import clauses, keys

from iled import Learner, audit, covers, datasets
from iled.induction import generalization_transform, refinement_transform, reduce_refined, revise, revise_generic
from iled.kernel import abduce_heads, abduce_heads_generic, build_kernel
from iled.syntax import format_term, parse_atom


def test_table3_abduction_and_kernel():
    ds = datasets.load("table3")
    w = ds.windows[0]
    delta = abduce_heads(ds.background, w, ds.language)
    assert sorted(map(format_term, delta.delta)) == [
        "initiatedAt(fighting(id3,id4),2)", "terminatedAt(fighting(id1,id2),1)"]
    assert sorted(map(format_term, abduce_heads_generic(ds.background, w, ds.language).delta)) == \
        sorted(map(format_term, delta.delta))
    k = build_kernel(ds.background, w, ds.language)
    assert keys(k.ground_clauses) == keys(clauses(
        "initiatedAt(fighting(id3,id4),2) :- happensAt(abrupt(id3),2), happensAt(abrupt(id4),2), "
        "holdsAt(close(id3,id4,23),2).",
        "terminatedAt(fighting(id1,id2),1) :- happensAt(abrupt(id1),1), happensAt(walking(id2),1), "
        "not holdsAt(close(id1,id2,23),1).",
    ))
    assert keys(k.variabilized) == keys(clauses(
        "initiatedAt(fighting(X,Y),T) :- happensAt(abrupt(X),T), happensAt(abrupt(Y),T), holdsAt(close(X,Y,23),T).",
        "terminatedAt(fighting(X,Y),T) :- happensAt(abrupt(X),T), happensAt(walking(Y),T), "
        "not holdsAt(close(X,Y,23),T).",
    ))


def test_table3_generalization_and_solution():
    ds = datasets.load("table3")
    w = ds.windows[0]
    kv = build_kernel(ds.background, w, ds.language)
    prog = generalization_transform(kv)
    assert len(prog.gen_index) == sum(len(c.body) for c in kv.variabilized)
    expected = datasets.load_program("table3", "expected.lp")
    for route in (revise, revise_generic):
        out = route(ds.background, [], w, kv)
        assert keys(out.new_clauses) == keys(expected)
        assert sorted(map(format_term, out.delta)) == ["use(1,0)", "use(1,3)", "use(2,0)", "use(2,2)"]
    assert covers(expected, ds.background, w).ok


def test_table5_refinement():
    ds = datasets.load("table5")
    w = ds.windows[0]
    h = ds.hypothesis.clauses
    prog = refinement_transform(h)
    assert len(prog.ref_index) == 4
    expected = datasets.load_program("table5", "expected.lp")
    for route in (revise, revise_generic):
        out = route(ds.background, h, w, None, reduce=False)
        assert sorted(map(format_term, out.delta)) == ["use(1,1,2)", "use(1,1,3)", "use(1,2,2)"]
        (specs,) = out.refined.values()
        assert keys(specs) == keys(expected)
        assert keys(reduce_refined(out, ds.background, w).clauses) == keys(out.clauses)


def test_example5_walkthrough():
    ds = datasets.load("example5")
    k1, k2 = clauses(
        "initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), happensAt(abrupt(Y),T), holdsAt(close(X,Y,23),T).",
        "initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), happensAt(kicking(Y),T), holdsAt(close(X,Y,23),T).",
    )
    learner = Learner(ds.background, ds.language)
    w1, w2, w3 = ds.windows
    learner.step(w1)
    (c,) = learner.hypothesis.clauses
    assert keys([c.clause]) == keys(clauses("initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T)."))
    assert keys(c.supp.clauses) == keys([k1])
    rep = learner.step(w2)
    assert rep.covered
    (c,) = learner.hypothesis.clauses
    assert keys(c.supp.clauses) == keys([k1, k2])
    rep = learner.step(w3)
    (c1,) = learner.hypothesis.clauses
    assert keys([c1.clause]) == keys(datasets.load_program("example5", "expected.lp"))
    assert c1.parent == c.id
    assert keys(c1.supp.clauses) == keys([k1, k2])
    assert rep.window_reads == 0
    assert audit(learner.hypothesis, ds.windows, ds.background, learner.lineage) == []


def test_example1_nonmonotonic_coverage():
    w = datasets.load("example1").windows[0]
    h1 = datasets.load_program("example1", "h1.lp")
    h2 = datasets.load_program("example1", "h2.lp")
    r1, r2 = covers(h1, None, w), covers(h2, None, w)
    target = (parse_atom("fighting(id1,id2)"), 3)
    assert target in r1.uncovered_positives
    assert r2.ok
