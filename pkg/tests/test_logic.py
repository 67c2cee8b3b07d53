import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import clauses

from iled import ParseError
from iled.logic import (Clause, Const, Fn, Literal, Var, canonical_key, is_variant, match, rename_apart,
                        substitute, substitute_clause, theta_subsumes_clause, unify, variable_depth)
from iled.modes import in_mode_language, variabilize
from iled.syntax import format_clause, format_mode, parse_clause, parse_modes, parse_program, parse_term

names = st.sampled_from(["a", "b", "id1", "close", "walking"])
variables = st.sampled_from(["X", "Y", "T", "Z1"]).map(Var)
constants = st.one_of(names.map(Const), st.integers(0, 99).map(Const))
terms = st.recursive(st.one_of(variables, constants),
                     lambda inner: st.builds(Fn, names, st.lists(inner, min_size=1, max_size=3)), max_leaves=6)
atoms = st.builds(Fn, st.sampled_from(["p", "q", "holdsAt"]), st.lists(terms, min_size=1, max_size=3))
literals = st.builds(Literal, atoms, st.booleans())
clause_st = st.builds(Clause, atoms, st.lists(literals, max_size=4).map(tuple))


@given(clause_st)
@settings(max_examples=200, deadline=None)
def test_clause_round_trip(c):
    assert parse_clause(format_clause(c)) == c


@given(terms)
@settings(max_examples=200, deadline=None)
def test_term_round_trip(t):
    from iled.syntax import format_term
    assert parse_term(format_term(t)) == t


@given(clause_st)
@settings(max_examples=100, deadline=None)
def test_subsumption_is_reflexive_and_renaming_invariant(c):
    assert theta_subsumes_clause(c, c)
    r = rename_apart(c, "_r")
    assert theta_subsumes_clause(c, r) and theta_subsumes_clause(r, c)


@given(clause_st, literals)
@settings(max_examples=100, deadline=None)
def test_adding_a_literal_specializes(c, extra):
    d = Clause(c.head, c.body + (extra,))
    assert theta_subsumes_clause(c, d)


def test_substitution_is_simultaneous():
    x, y = Var("X"), Var("Y")
    t = parse_term("p(X,Y)")
    assert substitute(t, {x: y, y: x}) == parse_term("p(Y,X)")


def test_unify_and_match():
    assert unify(parse_term("p(X,b)"), parse_term("p(a,Y)")) is not None
    assert unify(parse_term("p(X)"), parse_term("p(f(X))")) is None  # occurs check
    assert match(parse_term("p(X,X)"), parse_term("p(a,b)")) is None
    assert match(parse_term("p(X,Y)"), parse_term("p(a,a)")) == {Var("X"): Const("a"), Var("Y"): Const("a")}


def test_subsumption_examples():
    general, specific = clauses(
        "initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T).",
        "initiatedAt(fighting(A,B),T) :- happensAt(active(A),T), holdsAt(close(A,B,23),T).",
    )
    assert theta_subsumes_clause(general, specific)
    assert not theta_subsumes_clause(specific, general)
    # negation is part of the literal
    pos, neg = clauses("h(X) :- p(X).", "h(X) :- not p(X).")
    assert not theta_subsumes_clause(pos, neg)
    # subsume-equivalent but not variants
    a, b = clauses("h(X) :- p(X,Y).", "h(X) :- p(X,Y), p(X,Z).")
    assert theta_subsumes_clause(a, b) and theta_subsumes_clause(b, a)
    assert not is_variant(a, b)


def test_canonical_key_ignores_names_and_order():
    a, b = clauses("h(X,T) :- p(X,T), not q(X,T).", "h(A,S) :- not q(A,S), p(A,S).")
    assert canonical_key(a) == canonical_key(b)


def test_variable_depth():
    (c,) = clauses("h(X) :- p(X,Y), q(Y,Z), r(W).")
    d = variable_depth(c)
    assert (d[Var("X")], d[Var("Y")], d[Var("Z")]) == (0, 1, 2)
    assert d[Var("W")] == math.inf


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse_program("p(a).\nq(b :- r.\n")
    assert e.value.line == 2


def test_arithmetic_and_constraints():
    (c,) = clauses("holdsAt(F,T+1) :- initiatedAt(F,T).")
    assert format_clause(c) == "holdsAt(F,T+1) :- initiatedAt(F,T)."
    (k,) = clauses(":- p(X), not q(X).")
    assert k.is_constraint and format_clause(k) == ":- p(X), not q(X)."
    g = substitute_clause(c, {Var("T"): Const(4), Var("F"): Const("f")})
    from iled.logic import evaluate_arithmetic
    assert evaluate_arithmetic(g.head) == parse_term("holdsAt(f,5)")


MODES = """
modeh(initiatedAt(fighting(+person,+person),+time)).
modeb(happensAt(active(+person),+time)).
modeb(holdsAt(close(+person,+person,#dist),+time)).
modeb(not holdsAt(close(+person,+person,#dist),+time)).
"""


def test_modes_round_trip_and_language():
    ms = parse_modes(MODES)
    assert [format_mode(m) for m in ms] == [l for l in MODES.strip().split("\n")]
    from iled.modes import LanguageConfig
    cfg = LanguageConfig(tuple(ms))
    (ground,) = clauses("initiatedAt(fighting(id1,id2),3) :- happensAt(active(id1),3), "
                        "holdsAt(close(id1,id2,23),3).")
    v = variabilize(ground, cfg)
    (expected,) = clauses("initiatedAt(fighting(X,Y),T) :- happensAt(active(X),T), holdsAt(close(X,Y,23),T).")
    assert canonical_key(v) == canonical_key(expected)
    assert in_mode_language(v, cfg)
    (bad,) = clauses("initiatedAt(fighting(X,Y),T) :- happensAt(active(Z),T).")
    assert not in_mode_language(bad, cfg)
