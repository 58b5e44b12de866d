import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cadcost.evaluate import (DEFAULT_SPACE, Choice, Range, SearchSpace, best_cell, cross_val_scores,
                              evaluation_rows, grid_search, kfold, mae, mape, mse, random_search,
                              read_grid_csv, split_dataset, write_eval_csv, write_scatter_csv)
from cadcost.gbdt import GBDTRegressor


def test_metric_examples():
    assert mae([1, 2], [1, 2]) == 0.0
    assert mae([0, 10], [1, 9]) == 1.0
    assert mape([10], [9]) == pytest.approx(10.0)
    assert mape([3, 4], [3, 4]) == 0.0
    assert mse([0, 2], [1, 0]) == 2.5
    # guarded targets are skipped
    assert mape([0.0, 10.0], [5.0, 11.0]) == pytest.approx(10.0)


def test_metric_errors():
    with pytest.raises(ValueError):
        mae([1, 2], [1])
    with pytest.raises(ValueError):
        mae([], [])
    with pytest.raises(ValueError):
        mape([0.0, 1e-12], [1.0, 1.0])


def test_metrics_match_naive_loops():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n = int(rng.integers(1, 50))
        y = rng.uniform(0.5, 50, n)
        p = y + rng.normal(size=n)
        want_mae = sum(abs(a - b) for a, b in zip(y, p)) / n
        want_mape = 100 * sum(abs(a - b) / abs(a) for a, b in zip(y, p)) / n
        assert abs(mae(y, p) - want_mae) <= 1e-12
        assert abs(mape(y, p) - want_mape) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(0.1, 100), st.floats(-100, 100)), min_size=1, max_size=40),
       st.randoms())
def test_metrics_permutation_equivariant(pairs, rnd):
    y, p = map(list, zip(*pairs))
    shuffled = list(pairs)
    rnd.shuffle(shuffled)
    y2, p2 = map(list, zip(*shuffled))
    assert mae(y, p) == pytest.approx(mae(y2, p2), rel=1e-12, abs=1e-12)
    assert mape(y, p) == pytest.approx(mape(y2, p2), rel=1e-12, abs=1e-12)
    assert mae(y, p) >= 0 and mape(y, p) >= 0


# -- partitions ---------------------------------------------------------------

def test_split_sizes_and_determinism():
    tr, va, te = split_dataset(100, seed=1)
    assert (len(tr), len(va), len(te)) == (70, 15, 15)
    tr2, va2, te2 = split_dataset(100, seed=1)
    assert all(np.array_equal(a, b) for a, b in ((tr, tr2), (va, va2), (te, te2)))
    assert not np.array_equal(tr, split_dataset(100, seed=2)[0])


def test_split_errors():
    with pytest.raises(ValueError):
        split_dataset(2)
    with pytest.raises(ValueError):
        split_dataset(10, (0.5, 0.5, 0.5))
    with pytest.raises(ValueError):
        split_dataset(10, (0.0, 0.5, 0.5))


@settings(max_examples=200, deadline=None)
@given(st.integers(3, 5000), st.integers(0, 2**31))
def test_split_is_exact_partition(n, seed):
    parts = split_dataset(n, seed=seed)
    joined = np.concatenate(parts)
    assert joined.size == n and np.array_equal(np.sort(joined), np.arange(n))


def test_kfold_examples():
    folds = kfold(np.arange(10), 5, seed=0)
    assert [len(f) for f in folds] == [2] * 5
    with pytest.raises(ValueError):
        kfold(np.arange(3), 4)
    with pytest.raises(ValueError):
        kfold(np.arange(3), 1)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 500), st.integers(2, 12), st.integers(0, 2**31))
def test_kfold_is_exact_partition(n, k, seed):
    if k > n:
        return
    idx = np.arange(n) * 3 + 7
    folds = kfold(idx, k, seed)
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1
    assert sorted(np.concatenate(folds).tolist()) == idx.tolist()


# -- CV, grid, random search --------------------------------------------------

@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(0)
    X = rng.uniform(size=(120, 3))
    y = 5 + 3 * X[:, 0] + np.sin(6 * X[:, 1]) + rng.normal(scale=0.1, size=120)
    return X, y


def test_cross_val_matches_manual_loop(data):
    X, y = data
    est = GBDTRegressor(n_estimators=10, max_depth=2)
    scores = cross_val_scores(est, X, y, k=4, seed=3)
    folds = kfold(np.arange(len(y)), 4, 3)
    for s, f in zip(scores, folds):
        train = np.setdiff1d(np.arange(len(y)), f)
        m = GBDTRegressor(n_estimators=10, max_depth=2).fit(X[train], y[train])
        assert s == pytest.approx(mae(y[np.sort(f)], m.predict(X[np.sort(f)])), abs=1e-12)


def test_grid_one_by_one(data):
    X, y = data
    res = grid_search(GBDTRegressor(n_estimators=5), X, y, [2], [0.1], k=3)
    assert len(res.cells) == 1 and res.best == res.cells[0]
    with pytest.raises(ValueError):
        grid_search(GBDTRegressor(), X, y, [], [0.1])


def test_grid_csv_and_best(tmp_path, data):
    X, y = data
    res = grid_search(GBDTRegressor(n_estimators=8), X, y, [1, 3, 5], [0.05, 0.1, 0.3, 0.5], k=3)
    assert len(res.cells) == 12
    path = tmp_path / "grid.csv"
    res.to_csv(path)
    rows = list(csv.DictReader(open(path, encoding="utf-8")))
    assert list(rows[0]) == ["max_depth", "learning_rate", "mean_mae"]
    recomputed = min(rows, key=lambda r: (float(r["mean_mae"]), int(r["max_depth"]),
                                          float(r["learning_rate"])))
    assert (int(recomputed["max_depth"]), float(recomputed["learning_rate"])) == res.best[:2]
    depths, lrs, mat = read_grid_csv(path)
    assert depths == [1, 3, 5] and lrs == [0.05, 0.1, 0.3, 0.5]
    assert mat[1, 2] == [c[2] for c in res.cells if c[:2] == (3, 0.3)][0]


def test_best_cell_tie_break():
    assert best_cell([(5, 0.1, 1.0), (3, 0.2, 1.0), (3, 0.1, 1.0)]) == (3, 0.1, 1.0)


def test_search_space_types():
    with pytest.raises(ValueError):
        Range(2, 1)
    with pytest.raises(ValueError):
        Range(0, 1, log=True)
    with pytest.raises(ValueError):
        Choice(())
    rng = np.random.default_rng(0)
    for _ in range(200):
        s = DEFAULT_SPACE.sample(rng)
        assert DEFAULT_SPACE.contains(s)
        assert isinstance(s["max_depth"], int)
    assert not SearchSpace({"a": Range(0, 1)}).contains({"a": 2})


def test_random_search_contract(data):
    X, y = data
    est = GBDTRegressor(n_estimators=5)
    one = random_search(est, X, y, n_trials=1, k=3)
    assert len(one.log) == 1 and one.best_score == one.log[0]["cv_mape"]
    res = random_search(est, X, y, n_trials=4, k=3, seed=5)
    assert len(res.log) == 4
    assert res.best_score <= res.log[0]["cv_mape"]
    assert res.log[0]["params"]["max_depth"] == 6  # trial 0 holds the defaults
    for e in res.log[1:]:
        assert DEFAULT_SPACE.contains(e["params"])
    again = random_search(est, X, y, n_trials=4, k=3, seed=5)
    assert again.log == res.log
    with pytest.raises(ValueError):
        random_search(est, X, y, n_trials=0)


# -- reports ------------------------------------------------------------------

def test_evaluation_rows_and_csv(tmp_path):
    y = [10.0, 20.0, 10.0, 40.0]
    p = [11.0, 18.0, 10.0, 44.0]
    rows = evaluation_rows(y, p, ["a", "b", "a", "b"])
    assert [r.group for r in rows] == ["a", "b", "ALL"]
    assert rows[0].mae == 0.5 and rows[0].mape == pytest.approx(5.0)
    assert rows[2].n == 4 and rows[2].mae == pytest.approx(7 / 4)
    path = tmp_path / "eval.csv"
    write_eval_csv(path, rows)
    back = list(csv.DictReader(open(path, encoding="utf-8")))
    assert list(back[0]) == ["group", "model", "n", "mae", "mape", "split"]
    assert float(back[1]["mae"]) == rows[1].mae
    scatter = tmp_path / "scatter.csv"
    write_scatter_csv(scatter, y, p, ["a", "b", "a", "b"])
    lines = scatter.read_text().splitlines()
    assert lines[0] == "actual,predicted,group" and lines[1] == "10.0,11.0,a"


def test_read_grid_csv_empty(tmp_path):
    p = tmp_path / "g.csv"
    p.write_text("max_depth,learning_rate,mean_mae\n")
    with pytest.raises(ValueError):
        read_grid_csv(p)
