import pytest

from conftest import keys

from iled import Learner, NoSolution, ResourceLimit, covers_window, datasets
from iled.induction import learn_batch, reduce_refined, revise, revise_generic, transformed_task
from iled.kernel import build_kernel
from iled.logic import theta_subsumes_clause
from iled.synthetic import GeneratorConfig, generate_synthetic, split_windows


def _cases(fighting, strict, n):
    """Pairs (hypothesis learned on a first window, second window it fails on)."""
    ds, truth = fighting
    out = []
    seed = 0
    while len(out) < n:
        w = generate_synthetic(truth, ds.background, 8, seed, GeneratorConfig(persons=2, arena=25))
        w0, w1 = split_windows(w, 4)
        seed += 1
        learner = Learner(ds.background, ds.language, strict=strict)
        learner.step(w0)
        h = list(learner.hypothesis.clauses)
        if not covers_window([a.clause for a in h], ds.background, w1, strict):
            out.append((h, w1))
    return out


@pytest.mark.parametrize("strict", [True, False])
def test_compiled_search_matches_general_solver(fighting, strict):
    ds, _ = fighting
    refinements = 0
    for h, w in _cases(fighting, strict, 30):
        kv = build_kernel(ds.background, w, ds.language)
        fast = revise(ds.background, h, w, kv, reduce=False, strict=strict)
        slow = revise_generic(ds.background, h, w, kv, strict=strict)
        assert keys(fast.clauses) == keys(slow.clauses)
        assert sorted(map(str, fast.delta)) == sorted(map(str, slow.delta))
        refinements += bool(fast.refined)
    assert refinements > 0


def test_revision_specializes_only_by_adding_literals(fighting):
    ds, _ = fighting
    for h, w in _cases(fighting, True, 15):
        out = revise(ds.background, h, w, build_kernel(ds.background, w, ds.language))
        assert covers_window(out.clauses, ds.background, w, strict=True)
        for parent, specs in out.refined.items():
            for s in specs:
                assert theta_subsumes_clause(parent.clause, s)


def test_reduction_keeps_coverage():
    ds = datasets.load("table5")
    w = ds.windows[0]
    out = revise(ds.background, ds.hypothesis.clauses, w, None, reduce=False)
    red = reduce_refined(out, ds.background, w)
    assert covers_window(red.clauses, ds.background, w, strict=True)
    assert sum(map(len, red.refined.values())) <= sum(map(len, out.refined.values()))


def test_no_solution_without_kernel():
    ds = datasets.load("table3")
    with pytest.raises(NoSolution):
        revise(ds.background, [], ds.windows[0], None)


def test_node_cap():
    ds = datasets.load("table3")
    w = ds.windows[0]
    with pytest.raises(ResourceLimit):
        revise(ds.background, [], w, build_kernel(ds.background, w, ds.language), node_cap=1)


def test_batch_learning_covers_all_windows(fighting):
    ds, truth = fighting
    ws = split_windows(generate_synthetic(truth, ds.background, 30, seed=4,
                                          config=GeneratorConfig(persons=3, arena=30)), 10)
    from iled.kernel import KernelSet
    kernels = [build_kernel(ds.background, w, ds.language) for w in ws]
    kv = KernelSet(tuple(c for k in kernels for c in k.ground_clauses),
                   tuple(c for k in kernels for c in k.variabilized))
    out = learn_batch(ds.background, ws, kv)
    assert all(covers_window(out.clauses, ds.background, w, strict=True) for w in ws)


def test_strict_constraint_in_transformed_task():
    ds = datasets.load("example1")
    w = ds.windows[0]
    text = "\n".join(map(str, transformed_task(None, [], w, build_kernel(None, w, datasets.load("table3").language),
                                               strict=True).background))
    assert "persists" in text
