import pytest

from conftest import clauses

from iled import DataError, ParseError, datasets, evaluate, load_stream
from iled.io import load_background, load_modes, parse_stream, serialize_stream
from iled.synthetic import GeneratorConfig, generate_synthetic, merge_windows, slice_window, split_windows

# Scored by hand (decisions are the time points after each window start):
#   window 1: f(a) initiated at 0, holds at 1        -> TP
#   window 2: initiated at 2, annotated false at 3   -> FP
#   window 3: holds at 5 and 6, initiated only at 5  -> FN at 5, TP at 6
FIXTURE = """\
window 1 0 1.
happensAt(go(a),0).
%% annotation
not holdsAt(f(a),0).
holdsAt(f(a),1).

window 2 2 3.
happensAt(go(a),2).
%% annotation
not holdsAt(f(a),2).
not holdsAt(f(a),3).

window 3 4 6.
happensAt(go(a),5).
%% annotation
not holdsAt(f(a),4).
holdsAt(f(a),5).
holdsAt(f(a),6).
"""


def test_hand_scored_fixture():
    ws = parse_stream(FIXTURE)
    h = clauses("initiatedAt(f(X),T) :- happensAt(go(X),T).")
    m = evaluate(h, ws)
    assert (m.tp, m.fp, m.fn) == (2, 1, 1)
    assert m.precision == pytest.approx(2 / 3) and m.recall == pytest.approx(2 / 3)
    assert m.hypothesis_size == 2
    assert evaluate(h, ws, unit="timepoint").precision == pytest.approx(2 / 3)
    assert evaluate([], ws).recall == 0.0
    with pytest.raises(ValueError):
        evaluate(h, ws, unit="second")


def test_stream_round_trip():
    ws = datasets.load("table2").windows
    assert len(ws) == 2
    assert parse_stream(serialize_stream(ws)) == ws
    assert parse_stream(serialize_stream(parse_stream(FIXTURE))) == parse_stream(FIXTURE)


def test_generated_stream_round_trip(fighting):
    ds, truth = fighting
    # 10^4 generated windows of two points each
    w = generate_synthetic(truth, ds.background, 20_000, seed=9, config=GeneratorConfig(persons=2))
    ws = split_windows(w, 2)
    assert len(ws) == 10_000
    assert parse_stream(serialize_stream(ws)) == ws


def test_empty_annotation_and_errors():
    (w,) = parse_stream("window 4 0 2.\nhappensAt(go(a),1).\n%% annotation\n")
    assert not w.annotation
    with pytest.raises(ParseError) as e:
        parse_stream("window 1 0 2.\nhappensAt(go(a)),1).\n")
    assert e.value.line == 2
    with pytest.raises(DataError):
        parse_stream("window 1 0 2.\nhappensAt(go(a),7).\n")
    with pytest.raises(DataError):
        load_stream("/nonexistent/stream.lp")


def test_generator_contract(fighting):
    ds, truth = fighting
    a = generate_synthetic(truth, ds.background, 50, seed=3)
    assert a == generate_synthetic(truth, ds.background, 50, seed=3)
    assert a != generate_synthetic(truth, ds.background, 50, seed=4)
    m = evaluate(truth, split_windows(a, 10), ds.background)
    assert m.precision == m.recall == 1.0
    assert m.tp > 0
    quiet = generate_synthetic(truth, ds.background, 50, seed=3, config=GeneratorConfig(event_probability=0.0))
    assert not quiet.annotation and quiet.negative_annotation


def test_window_slicing(fighting):
    ds, truth = fighting
    w = generate_synthetic(truth, ds.background, 23, seed=1)
    parts = split_windows(w, 5)
    assert [(p.start, p.end) for p in parts] == [(0, 4), (5, 9), (10, 14), (15, 19), (20, 22)]
    assert merge_windows(parts, w.id) == w
    assert slice_window(w, 0, 22) == w
    assert [(p.start, p.end) for p in split_windows(w, 11)] == [(0, 10), (11, 22)]
    with pytest.raises(DataError):
        merge_windows([parts[0], parts[2]])
    with pytest.raises(DataError):
        split_windows(w, 1)


def test_loaders_report_bad_files(tmp_path):
    bad = tmp_path / "modes.lp"
    bad.write_text("modeh(initiatedAt(fighting(+pid,+pid),+time)\n")
    with pytest.raises(ParseError):
        load_modes(bad)
    assert len(load_background(None).user_rules) == 0
