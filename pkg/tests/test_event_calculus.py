import random

import pytest

from conftest import clauses

from iled import BackgroundTheory, Window, classify_clause, covers, covers_window, datasets, fires, items, recognize
from iled.event_calculus import index_window
from iled.logic import Clause
from iled.synthetic import GeneratorConfig, generate_synthetic, split_windows
from iled.syntax import parse_atom, parse_clause, parse_literal

LITERALS = [parse_literal(s) for s in (
    "happensAt(walking(X),T)", "happensAt(running(X),T)", "happensAt(active(X),T)", "happensAt(abrupt(Y),T)",
    "holdsAt(close(X,Y,23),T)", "not holdsAt(close(X,Y,23),T)", "not happensAt(inactive(Y),T)",
)]


def _random_hypothesis(rng):
    out = []
    for head in ("initiatedAt(fighting(X,Y),T)", "terminatedAt(fighting(X,Y),T)"):
        for _ in range(rng.randint(0, 2)):
            body = tuple(rng.sample(LITERALS, rng.randint(1, 3)))
            if all(l.negated for l in body):
                body += (LITERALS[2],)
            out.append(Clause(parse_atom(head), body))
    return out


@pytest.fixture(scope="module")
def windows(fighting):
    ds, truth = fighting
    w = generate_synthetic(truth, ds.background, 24, seed=3, config=GeneratorConfig(persons=3, arena=30))
    return split_windows(w, 6)


def test_engines_agree(fighting, windows):
    ds, _ = fighting
    rng = random.Random(0)
    for _ in range(25):
        h = _random_hypothesis(rng)
        for w in windows:
            assert recognize(h, ds.background, w, "temporal") == recognize(h, ds.background, w, "solver")


def test_fast_coverage_matches_full_check(fighting, windows):
    ds, truth = fighting
    rng = random.Random(1)
    for _ in range(40):
        h = _random_hypothesis(rng)
        for w in windows:
            assert covers_window(h, ds.background, w) == covers(h, ds.background, w).ok
    for w in windows:
        assert covers_window(truth, ds.background, w, strict=True)


def test_inertia_carries_state_across_the_window():
    # the fluent holds at the window start and nothing terminates it
    (w,) = datasets.load("example1").windows
    start_pos = Window(9, 1, 3, w.narrative, frozenset({parse_atom("holdsAt(fighting(id1,id2),1)"),
                                                        parse_atom("holdsAt(fighting(id1,id2),2)"),
                                                        parse_atom("holdsAt(fighting(id1,id2),3)")}))
    assert covers([], None, start_pos).ok
    term = clauses("terminatedAt(fighting(X,Y),T) :- happensAt(walking(X),T).")
    r = covers(term, None, start_pos)
    assert [(str(f), t) for f, t in r.uncovered_positives] == [("fighting(id1,id2)", 3)]


def test_items_of_example1():
    (w,) = datasets.load("example1").windows
    it = items(w)
    assert {(str(f), t) for f, t in it.i_plus} == {("fighting(id1,id2)", 1)}
    assert {(str(f), t) for f, t in it.p} == {("fighting(id1,id2)", 2)}
    assert not it.t_plus and not it.i_minus


def test_classify_clause():
    (w,) = datasets.load("example1").windows
    h1 = list(datasets.load_program("example1", "h1.lp"))
    statuses = {str(c): classify_clause(c, h1, None, w).status for c in h1}
    assert "revisable" in statuses.values()
    h2 = list(datasets.load_program("example1", "h2.lp"))
    assert all(classify_clause(c, h2, None, w).status == "preservable" for c in h2)


def test_fires_reports_scoped_pairs():
    (w,) = datasets.load("example1").windows
    c = parse_clause("initiatedAt(fighting(X,Y),T) :- happensAt(abrupt(X),T), holdsAt(close(X,Y,23),T).")
    assert {(str(f), t) for f, t in fires(c, w)} == {("fighting(id1,id2)", 1)}


def test_window_validation():
    from iled import DataError
    with pytest.raises(DataError):
        Window(1, 3, 3, frozenset(), frozenset())
    with pytest.raises(DataError):
        Window(1, 1, 3, frozenset(), frozenset({parse_atom("holdsAt(fighting(a,b),7)")}))


def test_background_rules_are_used():
    b = BackgroundTheory(inertial_fluents=frozenset({("fighting", 2)}),
                         user_rules=tuple(clauses("holdsAt(near(X,Y),T) :- holdsAt(close(X,Y,23),T).")))
    (w,) = datasets.load("example1").windows
    h = clauses("initiatedAt(fighting(X,Y),T) :- happensAt(abrupt(X),T), holdsAt(near(X,Y),T).")
    assert parse_atom("holdsAt(fighting(id1,id2),2)") in recognize(h, b, w)
    assert index_window(w, b).holds(parse_atom("holdsAt(near(id1,id2),1)"))
