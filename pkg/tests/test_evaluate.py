import numpy as np
import pytest

from hawe.evaluate import (PipelineConfig, bench_runtime, classify, nn_accuracy,
                           run_pipeline, sweep, topk_search)
from hawe.graph import gen_pinwheel, wl_roles


def test_classify_separable_clusters():
    rng = np.random.default_rng(0)
    x = np.vstack([rng.normal(0, 0.3, (40, 6)) + 4, rng.normal(0, 0.3, (40, 6)) - 4])
    y = np.array([0] * 40 + [1] * 40)
    report = classify(x, y, repeats=20, seed=1)
    assert report.mean_accuracy == 1.0
    assert len(report.accuracies) == 20


def test_classify_chance_level_on_noise():
    rng = np.random.default_rng(11)
    x = rng.normal(size=(200, 16))
    y = np.array([0] * 100 + [1] * 100)[rng.permutation(200)]
    report = classify(x, y, repeats=50, seed=5)
    assert abs(report.mean_accuracy - 0.5) < 0.05


def test_classify_three_classes():
    rng = np.random.default_rng(3)
    centers = np.array([[4, 0], [-4, 0], [0, 6]])
    x = np.vstack([rng.normal(0, 0.2, (30, 2)) + c for c in centers])
    y = np.repeat([0, 1, 2], 30)
    report = classify(x, y, repeats=10, seed=2)
    assert report.mean_accuracy == 1.0
    assert report.config["classes"] == 3


def test_classify_ignores_unlabeled_rows():
    rng = np.random.default_rng(4)
    x = np.vstack([rng.normal(0, 0.2, (20, 3)) + 3, rng.normal(0, 0.2, (20, 3)) - 3,
                   rng.normal(0, 5.0, (10, 3))])
    y = np.array([0] * 20 + [1] * 20 + [-1] * 10)
    report = classify(x, y, repeats=5, seed=0)
    assert report.mean_accuracy == 1.0
    assert report.config["rows"] == 40


def test_classify_deterministic_per_seed():
    rng = np.random.default_rng(5)
    x = rng.normal(size=(60, 4))
    y = (rng.random(60) > 0.5).astype(int)
    y[:2] = [0, 1]  # both classes present at least twice
    y[2:4] = [0, 1]
    a = classify(x, y, repeats=8, seed=3)
    b = classify(x, y, repeats=8, seed=3)
    assert a.accuracies == b.accuracies
    c = classify(x, y, repeats=8, seed=4)
    assert a.accuracies != c.accuracies


def test_classify_feature_permutation_invariant():
    rng = np.random.default_rng(6)
    x = rng.normal(size=(80, 8))
    y = (x[:, 0] + 0.3 * rng.normal(size=80) > 0).astype(int)
    perm = rng.permutation(8)
    a = classify(x, y, repeats=10, seed=7)
    b = classify(x[:, perm], y, repeats=10, seed=7)
    assert np.allclose(a.accuracies, b.accuracies, atol=1e-6)


def test_classify_validation():
    x = np.zeros((6, 2))
    with pytest.raises(ValueError):
        classify(x, np.array([0] * 6))  # single class
    with pytest.raises(ValueError):
        classify(x, np.array([0, 0, 0, 0, 0, 1]))  # class with one member
    with pytest.raises(ValueError):
        classify(x, np.array([0, 0, 0, 1, 1, 1]), train_frac=1.5)
    with pytest.raises(ValueError):
        classify(x, np.array([-1] * 6))  # nothing labeled
    with pytest.raises(ValueError):
        classify(x, np.array([0, 0, 0, 1, 1, 1]), repeats=0)


def test_nn_accuracy_hand_case():
    x = np.array([[0.0], [0.1], [5.0], [5.1], [9.0]])
    labels = np.array([0, 0, 1, 1, 1])
    # node 4's nearest is node 3 (same label); all agree
    assert nn_accuracy(x, labels) == 1.0
    labels2 = np.array([0, 1, 0, 1, 1])
    assert nn_accuracy(x, labels2) == pytest.approx(1 / 5)


# ---------------------------------------------------------------------------
# top-k search
# ---------------------------------------------------------------------------

def test_topk_exact_order_and_ties():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 0.0], [0.0, 0.0]])
    ids = ["a", "b", "c", "d", "e"]
    res = topk_search(x, ids, "a", 3)
    assert res.target == "a"
    # duplicate point "e" first at distance 0; the 1.0 tie resolves b then c
    assert res.neighbors == [("e", 0.0), ("b", 1.0), ("c", 1.0)]


def test_topk_validation():
    x = np.zeros((4, 2))
    ids = list("abcd")
    with pytest.raises(KeyError):
        topk_search(x, ids, "zz", 2)
    with pytest.raises(ValueError):
        topk_search(x, ids, "a", 4)
    with pytest.raises(ValueError):
        topk_search(x, ids, "a", 0)


def test_topk_deterministic():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(30, 5))
    ids = [f"n{i}" for i in range(30)]
    a = topk_search(x, ids, "n7", 5)
    b = topk_search(x, ids, "n7", 5)
    assert a.neighbors == b.neighbors


# ---------------------------------------------------------------------------
# sweep + bench
# ---------------------------------------------------------------------------

def _tiny_cfg(**kw):
    base = dict(samples=32, walk_length=3, mode="haw", dim=4, window=2,
                epochs=3, seed=5, repeats=5)
    base.update(kw)
    return PipelineConfig(**base)


def test_sweep_single_value_reproduces_base():
    g = gen_pinwheel(6, 1, heterogeneous=True)
    roles = wl_roles(g).roles
    cfg = _tiny_cfg()
    base = run_pipeline(g, roles, cfg)
    rows = sweep("T", [32], g, roles, cfg)
    assert rows == [(32, base.mean_accuracy)]


def test_sweep_multiple_values():
    g = gen_pinwheel(6, 1, heterogeneous=True)
    roles = wl_roles(g).roles
    rows = sweep("d", [2, 4], g, roles, _tiny_cfg())
    assert [v for v, _ in rows] == [2, 4]
    assert all(0.0 <= acc <= 1.0 for _, acc in rows)


def test_sweep_unknown_param():
    g = gen_pinwheel(6, 1)
    with pytest.raises(ValueError):
        sweep("lr", [1], g, np.zeros(g.num_nodes, dtype=int), _tiny_cfg())
    with pytest.raises(ValueError):
        sweep("T", [], g, np.zeros(g.num_nodes, dtype=int), _tiny_cfg())


def test_bench_runtime_rows():
    cfg = _tiny_cfg(samples=16, epochs=1, walk_length=3)
    rows = bench_runtime([64, 128], "er", cfg, runs=1, p_numerator=6.0, seed=2)
    assert [r["n"] for r in rows] == [64, 128]
    assert all(r["seconds"] > 0 for r in rows)
    assert all(len(r["per_run"]) == 1 for r in rows)
    rows_ba = bench_runtime([64], "ba", cfg, runs=1, seed=2)
    assert rows_ba[0]["edges"] == 63  # tree
    with pytest.raises(ValueError):
        bench_runtime([64], "grid", cfg)
