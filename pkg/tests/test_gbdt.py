import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone
from sklearn.datasets import make_friedman1

from cadcost.gbdt import (GBDTRegressor, GbdtModel, TrainParams, TreeNode, best_split, fit_cart,
                          fit_gbdt, fit_tree, leaf_weight, predict, soft_threshold,
                          split_count_importance)

EXACT = dict(reg_lambda=0.0, gamma=0.0, reg_alpha=0.0, min_child_samples=1)


def walk(node, x):
    """Per-row reference router, independent of the vectorized path."""
    while node.left is not None:
        v = x[node.feature]
        go_left = node.default_left if math.isnan(v) else v <= node.threshold
        node = node.left if go_left else node.right
    return node.weight


def stump(feature, threshold, lw, rw, default_left=True):
    return TreeNode(weight=0.0, n_samples=2, feature=feature, threshold=threshold,
                    default_left=default_left, gain=1.0,
                    left=TreeNode(weight=lw, n_samples=1), right=TreeNode(weight=rw, n_samples=1))


# -- split finding ------------------------------------------------------------

def test_best_split_hand_example():
    X = np.array([[0.0], [1.0]])
    y = np.array([0.0, 10.0])
    g = 5.0 - y
    p = TrainParams(**EXACT)
    s = best_split(X, [0, 1], g, np.ones(2), [0], p)
    assert s.feature == 0 and s.threshold == 0.5 and s.gain == 25.0
    tree = fit_tree(X, [0, 1], g, np.ones(2), TrainParams(max_depth=1, **EXACT))
    assert tree.left.weight == -5.0 and tree.right.weight == 5.0


def test_best_split_none_cases():
    X = np.arange(6.0)[:, None]
    assert best_split(X, range(6), np.zeros(6), np.ones(6), [0], TrainParams(**EXACT)) is None
    g = np.array([1.0, -1.0, 2.0])
    p = TrainParams(reg_lambda=0.0, min_child_samples=2)
    assert best_split(X[:3], range(3), g, np.ones(3), [0], p) is None
    # a single distinct value offers no threshold
    assert best_split(np.ones((4, 1)), range(4), np.array([1.0, -1, 2, -2]), np.ones(4), [0],
                      TrainParams(**EXACT)) is None


def brute_force_split(X, rows, g, h, features, p):
    best = None
    S = lambda G, H: (soft_threshold(G, p.reg_alpha) ** 2 / (H + p.reg_lambda)
                      if H + p.reg_lambda > 0 else 0.0)
    Gt, Ht = sum(g[r] for r in rows), sum(h[r] for r in rows)
    for f in sorted(features):
        present = sorted({X[r, f] for r in rows if not math.isnan(X[r, f])})
        missing = [r for r in rows if math.isnan(X[r, f])]
        cands = [(a + b) / 2 for a, b in zip(present, present[1:])]
        if missing and present:
            cands.append(present[-1])
        for t in cands:
            for default_left in (True, False):
                left = [r for r in rows if (default_left if math.isnan(X[r, f]) else X[r, f] <= t)]
                right = [r for r in rows if r not in set(left)]
                if len(left) < p.min_child_samples or len(right) < p.min_child_samples:
                    continue
                GL, HL = sum(g[r] for r in left), sum(h[r] for r in left)
                gain = 0.5 * (S(GL, HL) + S(Gt - GL, Ht - HL) - S(Gt, Ht)) - p.gamma
                if best is None or gain > best[0] + 1e-12:
                    best = (gain, f, t)
    if best is None or best[0] <= 1e-12 * sum(g[r] ** 2 for r in rows):
        return None
    return best


@pytest.mark.parametrize("seed", range(25))
def test_best_split_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(4, 40)), int(rng.integers(1, 5))
    X = rng.normal(size=(n, d))
    X[rng.uniform(size=X.shape) < 0.15] = np.nan
    g = rng.normal(size=n)
    h = np.ones(n)
    rows = np.sort(rng.choice(n, size=max(2, n - 3), replace=False))
    p = TrainParams(reg_lambda=float(rng.choice([0.0, 1.0])), gamma=float(rng.choice([0.0, 0.1])),
                    reg_alpha=float(rng.choice([0.0, 0.3])), min_child_samples=int(rng.integers(1, 4)))
    got = best_split(X, rows, g, h, range(d), p)
    want = brute_force_split(X, list(rows), g, h, range(d), p)
    if want is None:
        assert got is None
    else:
        assert got.gain == pytest.approx(want[0], rel=1e-9, abs=1e-12)
        assert got.feature == want[1]


def test_missing_values_routed_by_gain():
    x = np.array([1.0, 2.0, 3.0, 4.0, np.nan, np.nan])
    y = np.array([0.0, 0.0, 10.0, 10.0, 10.0, 10.0])
    X = x[:, None]
    s = best_split(X, range(6), y.mean() - y, np.ones(6), [0], TrainParams(**EXACT))
    assert s.threshold == 2.5 and s.default_left is False
    s = best_split(X, range(6), (y.mean() - y) * -1, np.ones(6), [0], TrainParams(**EXACT))
    assert s.default_left is False
    y2 = np.array([0.0, 0.0, 10.0, 10.0, 0.0, 0.0])
    s = best_split(X, range(6), y2.mean() - y2, np.ones(6), [0], TrainParams(**EXACT))
    assert s.threshold == 2.5 and s.default_left is True
    m = fit_gbdt(X, y, params=TrainParams(learning_rate=1.0, n_estimators=1, max_depth=1, **EXACT))
    assert m.predict(np.array([[np.nan], [1.0]])).tolist() == [10.0, 0.0]


def test_no_missing_columns_default_left():
    X = np.array([[0.0], [1.0]])
    s = best_split(X, [0, 1], np.array([5.0, -5.0]), np.ones(2), [0], TrainParams(**EXACT))
    assert s.default_left is True


# -- trees --------------------------------------------------------------------

def test_single_row_leaf():
    t = fit_tree(np.array([[3.0]]), [0], np.array([4.0]), np.ones(1), TrainParams(reg_lambda=1.0))
    assert t.is_leaf and t.weight == -2.0
    assert leaf_weight(4.0, 1.0, TrainParams(reg_lambda=0.0)) == -4.0


def test_stump_recovers_step():
    x = np.linspace(0, 1, 40)
    y = np.where(x <= 0.3, 1.0, 4.0)
    tree = fit_cart(x[:, None], y, max_depth=1, min_child_samples=1)
    assert tree.depth() == 1
    assert x[x <= 0.3].max() < tree.threshold < x[x > 0.3].min()
    assert tree.left.weight == pytest.approx(1.0) and tree.right.weight == pytest.approx(4.0)


def test_unrestricted_tree_fits_exactly():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(100, 3))
    y = rng.normal(size=100) * 10
    p = TrainParams(learning_rate=1.0, n_estimators=1, max_depth=200, num_leaves=1000, **EXACT)
    m = fit_gbdt(X, y, params=p, metric="mse")
    assert np.max(np.abs(m.predict(X) - y)) < 1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5), st.integers(2, 12), st.integers(1, 8),
       st.sampled_from(["depth_wise", "leaf_wise"]))
def test_structural_bounds(seed, max_depth, num_leaves, mcs, growth):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(60, 3))
    y = X[:, 0] ** 2 + rng.normal(size=60)
    p = TrainParams(max_depth=max_depth, num_leaves=num_leaves, min_child_samples=mcs,
                    growth=growth, reg_lambda=0.0)
    tree = fit_tree(X, np.arange(60), y.mean() - y, np.ones(60), p)
    assert tree.depth() <= max_depth
    assert tree.n_leaves() <= num_leaves
    for node in tree.iter_nodes():
        if node.is_leaf:
            assert node.n_samples >= mcs
        else:
            assert node.left is not None and node.right is not None
            assert node.n_samples == node.left.n_samples + node.right.n_samples


def test_leaf_wise_prefers_best_leaf():
    x = np.arange(8.0)
    y = np.array([0, 0, 0, 0, 10, 10, 30, 30.0])
    p = TrainParams(growth="leaf_wise", num_leaves=3, max_depth=5, **EXACT)
    tree = fit_tree(x[:, None], np.arange(8), y.mean() - y, np.ones(8), p)
    assert tree.n_leaves() == 3
    weights = sorted(round(n.weight + y.mean(), 9) for n in tree.iter_nodes() if n.is_leaf)
    assert weights == [0.0, 10.0, 30.0]


def test_colsample_restricts_features():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(50, 6))
    y = X.sum(axis=1)
    p = TrainParams(colsample_bytree=0.34, max_depth=3, **EXACT)
    tree = fit_tree(X, np.arange(50), y.mean() - y, np.ones(50), p, rng=np.random.default_rng(0))
    used = {n.feature for n in tree.iter_nodes() if not n.is_leaf}
    assert len(used) <= 2


# -- boosting -----------------------------------------------------------------

def test_constant_targets():
    X = np.random.default_rng(0).normal(size=(30, 2))
    m = fit_gbdt(X, np.full(30, 7.25), params=TrainParams(n_estimators=5))
    assert np.all(m.predict(X) == 7.25)


def test_fit_errors():
    with pytest.raises(ValueError):
        fit_gbdt(np.zeros((0, 2)), [])
    with pytest.raises(ValueError):
        fit_gbdt(np.zeros((2, 1)), [1.0, np.nan])
    with pytest.raises(ValueError):
        TrainParams(learning_rate=0)
    with pytest.raises(ValueError):
        TrainParams(growth="sideways")
    with pytest.raises(ValueError):
        TrainParams.from_dict({"eta": 0.1})


def test_training_mse_non_increasing():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(300, 5))
    y = np.sin(X[:, 0]) * 3 + X[:, 1] * X[:, 2] + rng.normal(scale=0.3, size=300)
    m = fit_gbdt(X, y, params=TrainParams(n_estimators=200, learning_rate=0.2, max_depth=3),
                 metric="mse")
    curve = [e["train"] for e in m.log]
    assert len(curve) == 200
    assert all(b <= a * (1 + 1e-12) for a, b in zip(curve, curve[1:]))


def early_stopping_case():
    # predictions at x=1 approach 10 geometrically and pass the validation target 8
    X, y = np.array([[0.0], [1.0]]), np.array([0.0, 10.0])
    p = TrainParams(learning_rate=0.1, n_estimators=500, max_depth=1,
                    early_stopping_rounds=20, **EXACT)
    return fit_gbdt(X, y, np.array([[1.0]]), np.array([8.0]), params=p, metric="mae")


def test_early_stopping_exact_round():
    m = early_stopping_case()
    valid = [e["valid"] for e in m.log]
    k = int(np.argmin(valid))
    assert k == 8
    assert all(b > a for a, b in zip(valid[k:], valid[k + 1:]))
    assert m.best_iteration == k
    assert len(m.trees) == k + 20 + 1
    assert len(m.used_trees) == k + 1
    assert m.predict(np.array([[1.0]]))[0] == pytest.approx(10 - 5 * 0.9 ** 9)


def test_early_stopping_disabled():
    X, y = np.array([[0.0], [1.0]]), np.array([0.0, 10.0])
    p = TrainParams(learning_rate=0.1, n_estimators=50, early_stopping_rounds=0, **EXACT)
    m = fit_gbdt(X, y, np.array([[1.0]]), np.array([8.0]), params=p)
    assert len(m.trees) == 50 and m.best_iteration == 49


def test_friedman_beats_mean_predictor():
    X, y = make_friedman1(n_samples=2000, noise=1.0, random_state=0)
    Xtr, Xte, ytr, yte = X[:1600], X[1600:], y[:1600], y[1600:]
    m = fit_gbdt(Xtr, ytr, params=TrainParams(n_estimators=150, max_depth=4), metric="mse")
    model_mae = np.mean(np.abs(m.predict(Xte) - yte))
    baseline = np.mean(np.abs(ytr.mean() - yte))
    assert model_mae <= 0.5 * baseline


def test_large_alpha_collapses_to_base():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(40, 2))
    y = X[:, 0]
    m = fit_gbdt(X, y, params=TrainParams(reg_alpha=1e6, n_estimators=5))
    assert np.all(m.predict(X) == m.base_score)


# -- model behaviour ----------------------------------------------------------

@pytest.fixture(scope="module")
def trained():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(200, 4))
    X[rng.uniform(size=X.shape) < 0.1] = np.nan
    y = np.nan_to_num(X[:, 0]) * 2 + np.nan_to_num(X[:, 1]) ** 2 + rng.normal(scale=0.1, size=200)
    p = TrainParams(n_estimators=30, subsample=0.8, colsample_bytree=0.75, seed=3)
    m = fit_gbdt(X, y, params=p, feature_names=["a", "b", "c", "d"])
    return m, X, y


def test_zero_tree_model_predicts_base():
    m = GbdtModel(base_score=3.5, learning_rate=0.1, schema=["a"])
    assert m.predict(np.zeros((3, 1))).tolist() == [3.5] * 3
    assert predict(m, {"a": 1.0}) == 3.5
    assert split_count_importance(m) == {}


def test_stump_prediction():
    m = GbdtModel(base_score=1.0, learning_rate=0.5, schema=["a"], trees=[stump(0, 0.0, -2.0, 4.0)],
                  best_iteration=0)
    assert predict(m, {"a": -1.0}) == 0.0
    assert predict(m, {"a": 1.0}) == 3.0
    assert predict(m, {}) == 0.0  # absent features are missing and follow default_left


def test_batch_equals_row_walk(trained):
    m, X, _ = trained
    batch = m.predict(X)
    for i in range(0, 200, 7):
        want = m.base_score + m.learning_rate * sum(walk(t, X[i]) for t in m.used_trees)
        assert batch[i] == pytest.approx(want, abs=1e-12)
        row = {f: (None if np.isnan(v) else v) for f, v in zip(m.schema, X[i])}
        assert predict(m, row) == batch[i]


def test_row_order_and_extras_ignored(trained):
    m, X, _ = trained
    row = dict(zip(m.schema, X[5]))
    reordered = dict(reversed(list(row.items())))
    reordered["unrelated"] = 123.0
    assert predict(m, row) == predict(m, reordered)


def test_serialization_bit_exact(tmp_path, trained):
    m, X, _ = trained
    path = tmp_path / "m.json"
    m.save(path)
    back = GbdtModel.load(path)
    assert np.array_equal(back.predict(X), m.predict(X))
    assert back.dumps() == m.dumps()
    d = json.loads(path.read_text())
    d["format"] = "nope"
    with pytest.raises(ValueError):
        GbdtModel.from_dict(d)


def test_deterministic_given_seed(trained):
    m, X, y = trained
    again = fit_gbdt(X, y, params=m.params, feature_names=m.schema)
    assert again.dumps() == m.dumps()
    other = fit_gbdt(X, y, params=TrainParams(**{**m.params.__dict__, "seed": 4}),
                     feature_names=m.schema)
    assert other.dumps() != m.dumps()


def test_predict_shape_check(trained):
    m, _, _ = trained
    with pytest.raises(ValueError):
        m.predict(np.zeros((2, 3)))


# -- split-count importance ---------------------------------------------------

def test_split_count_examples():
    m = GbdtModel(0.0, 0.1, ["f", "g"], trees=[stump(0, 0.0, 1, 2)], best_iteration=0)
    assert split_count_importance(m) == {"f": 1.0}
    m.trees.append(stump(1, 0.0, 1, 2))
    m.best_iteration = 1
    assert split_count_importance(m) == {"f": 0.5, "g": 0.5}


def test_split_count_recount(trained):
    m, _, _ = trained
    counts = {}

    def visit(node):
        if node.left is None:
            return
        counts[m.schema[node.feature]] = counts.get(m.schema[node.feature], 0) + 1
        visit(node.left)
        visit(node.right)

    for t in m.used_trees:
        visit(t)
    total = sum(counts.values())
    imp = split_count_importance(m)
    assert sum(imp.values()) == pytest.approx(1.0, abs=1e-12)
    assert imp == {k: v / total for k, v in counts.items()}


# -- CART ---------------------------------------------------------------------

def test_cart_examples():
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    y = np.array([1.0, 3.0, 10.0, 14.0])
    t = fit_cart(X, y, max_depth=3, min_child_samples=1)
    assert t.left.weight == 2.0 and t.right.weight == 12.0
    t0 = fit_cart(X, y, max_depth=0)
    assert t0.is_leaf and t0.weight == 7.0


@pytest.mark.parametrize("seed", range(10))
def test_cart_root_matches_exhaustive_search(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(20, 200)), 3
    X = rng.normal(size=(n, d))
    y = X[:, int(rng.integers(d))] * 3 + rng.normal(size=n)
    best = None
    for f in range(d):
        vals = np.unique(X[:, f])
        for a, b in zip(vals, vals[1:]):
            t = (a + b) / 2
            left = X[:, f] <= t
            if left.sum() < 5 or (~left).sum() < 5:
                continue
            sse = ((y[left] - y[left].mean()) ** 2).sum() + ((y[~left] - y[~left].mean()) ** 2).sum()
            if best is None or sse < best[0]:
                best = (sse, f, t)
    tree = fit_cart(X, y, max_depth=2, min_child_samples=5)
    assert (tree.feature, tree.threshold) == (best[1], pytest.approx(best[2], abs=1e-12))
    left = X[:, tree.feature] <= tree.threshold
    assert tree.left.weight == pytest.approx(y[left].mean())


# -- estimator ----------------------------------------------------------------

def test_regressor_estimator(trained):
    _, X, y = trained
    est = GBDTRegressor(n_estimators=10, max_depth=3)
    assert clone(est).get_params() == est.get_params()
    est.fit(X, y)
    assert est.predict(X).shape == (200,)
    assert est.feature_importances_.sum() == pytest.approx(1.0)
    assert est.train_params().max_depth == 3
    assert est.score(X, y) > 0.5
