import pytest

from iled import datasets
from iled.logic import canonical_key
from iled.syntax import parse_clause


def keys(clauses):
    return sorted(canonical_key(c) for c in clauses)


def clauses(*texts):
    return [parse_clause(t) for t in texts]


@pytest.fixture(scope="session")
def fighting():
    ds = datasets.load("fighting")
    truth = datasets.load_program("fighting", "truth.lp")
    return ds, truth
