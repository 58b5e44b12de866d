"""Error metrics, dataset partitioning, cross-validation and hyperparameter search."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from sklearn.base import clone

MAPE_GUARD = 1e-9


def _pair(y, y_pred) -> tuple[np.ndarray, np.ndarray]:
    y = np.asarray(y, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    if y.size != y_pred.size:
        raise ValueError(f"length mismatch: {y.size} targets vs {y_pred.size} predictions")
    if y.size == 0:
        raise ValueError("metrics need at least one pair")
    return y, y_pred


def mae(y, y_pred) -> float:
    y, y_pred = _pair(y, y_pred)
    return float(np.mean(np.abs(y - y_pred)))


def mse(y, y_pred) -> float:
    y, y_pred = _pair(y, y_pred)
    return float(np.mean((y - y_pred) ** 2))


def mape(y, y_pred) -> float:
    """Mean absolute percentage error in percent, skipping |y| <= 1e-9."""
    y, y_pred = _pair(y, y_pred)
    keep = np.abs(y) > MAPE_GUARD
    if not keep.any():
        raise ValueError("MAPE undefined: every target is (numerically) zero")
    return float(100.0 * np.mean(np.abs(y[keep] - y_pred[keep]) / np.abs(y[keep])))


METRICS = {"mae": mae, "mape": mape, "mse": mse}


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def split_dataset(n: int, ratios: Sequence[float] = (0.70, 0.15, 0.15),
                  seed: int = 0) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded shuffle of ``range(n)`` cut into train / valid / test.

    Validation and test sizes are the rounded ratios; train takes the rest.
    """
    if n < 3:
        raise ValueError("need at least 3 rows to split into train/valid/test")
    if len(ratios) != 3 or any(r < 0 for r in ratios) or ratios[0] <= 0:
        raise ValueError("ratios must be three non-negative numbers with train > 0")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError("ratios must sum to 1")
    n_valid = _round_half_up(ratios[1] * n)
    n_test = _round_half_up(ratios[2] * n)
    n_train = n - n_valid - n_test
    if n_train < 1:
        raise ValueError("split leaves no training rows")
    perm = np.random.default_rng(seed).permutation(n)
    return perm[:n_train], perm[n_train:n_train + n_valid], perm[n_train + n_valid:]


def kfold(indices, k: int, seed: int = 0) -> list[np.ndarray]:
    indices = np.asarray(indices)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > indices.size:
        raise ValueError(f"cannot make {k} folds from {indices.size} indices")
    perm = indices[np.random.default_rng(seed).permutation(indices.size)]
    return np.array_split(perm, k)


def take(X, idx):
    if isinstance(X, np.ndarray):
        return X[idx]
    return [X[i] for i in idx]


def cross_val_scores(estimator, X, y, k: int = 5, seed: int = 0, metric: str = "mae") -> list[float]:
    """Refit a clone of ``estimator`` per fold; return each held-out fold's score."""
    score = METRICS[metric]
    y = np.asarray(y, dtype=float)
    folds = kfold(np.arange(len(y)), k, seed)
    out = []
    for i, test_idx in enumerate(folds):
        train_idx = np.sort(np.concatenate([f for j, f in enumerate(folds) if j != i]))
        test_idx = np.sort(test_idx)
        est = clone(estimator).fit(take(X, train_idx), y[train_idx])
        out.append(score(y[test_idx], est.predict(take(X, test_idx))))
    return out


def param_key(estimator, name: str) -> str:
    """Resolve ``name`` to the estimator's (possibly nested) parameter key."""
    params = estimator.get_params()
    if name in params:
        return name
    matches = sorted(k for k in params if k.endswith("__" + name))
    if not matches:
        raise KeyError(f"{type(estimator).__name__} has no parameter {name!r}")
    return matches[0]


# ---------------------------------------------------------------------------
# grid search

@dataclass
class GridResult:
    cells: list[tuple[int, float, float]]  # (max_depth, learning_rate, mean CV MAE)
    best: tuple[int, float, float]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["max_depth", "learning_rate", "mean_mae"])
            for depth, lr, m in self.cells:
                w.writerow([depth, repr(float(lr)), repr(float(m))])


def best_cell(cells: Sequence[tuple[int, float, float]]) -> tuple[int, float, float]:
    return min(cells, key=lambda c: (c[2], c[0], c[1]))


def grid_search(estimator, X, y, depth_values: Sequence[int], lr_values: Sequence[float],
                k: int = 5, seed: int = 0) -> GridResult:
    """Mean k-fold CV MAE for every (max_depth, learning_rate) pair.

    The best cell is the lowest MAE, ties going to the shallower depth and
    then the smaller learning rate.
    """
    if not depth_values or not lr_values:
        raise ValueError("depth_values and lr_values must be non-empty")
    dkey = param_key(estimator, "max_depth")
    lkey = param_key(estimator, "learning_rate")
    cells = []
    for depth in depth_values:
        for lr in lr_values:
            est = clone(estimator).set_params(**{dkey: int(depth), lkey: float(lr)})
            scores = cross_val_scores(est, X, y, k=k, seed=seed, metric="mae")
            cells.append((int(depth), float(lr), float(np.mean(scores))))
    return GridResult(cells, best_cell(cells))


# ---------------------------------------------------------------------------
# random search

@dataclass(frozen=True)
class Range:
    lo: float
    hi: float
    log: bool = False
    integer: bool = False

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError(f"empty range [{self.lo}, {self.hi}]")
        if self.log and self.lo <= 0:
            raise ValueError("log-scale range needs lo > 0")

    def sample(self, rng: np.random.Generator):
        if self.integer:
            return int(rng.integers(int(self.lo), int(self.hi) + 1))
        if self.log:
            return float(math.exp(rng.uniform(math.log(self.lo), math.log(self.hi))))
        return float(rng.uniform(self.lo, self.hi))

    def contains(self, v) -> bool:
        return self.lo <= v <= self.hi and (not self.integer or float(v).is_integer())


@dataclass(frozen=True)
class Choice:
    values: tuple

    def __post_init__(self):
        if not self.values:
            raise ValueError("Choice needs at least one value")

    def sample(self, rng: np.random.Generator):
        return self.values[int(rng.integers(len(self.values)))]

    def contains(self, v) -> bool:
        return v in self.values


@dataclass(frozen=True)
class SearchSpace:
    dims: dict[str, Range | Choice] = field(default_factory=dict)

    def sample(self, rng: np.random.Generator) -> dict[str, Any]:
        return {name: dim.sample(rng) for name, dim in self.dims.items()}

    def contains(self, params: dict[str, Any]) -> bool:
        return all(self.dims[k].contains(v) for k, v in params.items() if k in self.dims)


# ranges spanning the usual depth-wise and leaf-wise booster settings
DEFAULT_SPACE = SearchSpace({
    "learning_rate": Range(0.01, 0.30, log=True),
    "max_depth": Range(3, 10, integer=True),
    "subsample": Range(0.5, 1.0),
    "colsample_bytree": Range(0.3, 1.0),
    "gamma": Range(0.0, 1.0),
    "reg_alpha": Range(0.0, 5.0),
    "reg_lambda": Range(0.0, 5.0),
    "num_leaves": Range(15, 64, integer=True),
    "min_child_samples": Range(5, 30, integer=True),
    "growth": Choice(("depth_wise", "leaf_wise")),
})


@dataclass
class SearchResult:
    best_params: dict[str, Any]
    best_score: float
    log: list[dict[str, Any]]

    def to_csv(self, path: str | Path) -> None:
        names = sorted({k for entry in self.log for k in entry["params"]})
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["trial", *names, "cv_mape"])
            for e in self.log:
                w.writerow([e["trial"], *[e["params"].get(n, "") for n in names], repr(e["cv_mape"])])


def random_search(estimator, X, y, space: SearchSpace = DEFAULT_SPACE, n_trials: int = 20,
                  k: int = 5, seed: int = 0, include_defaults: bool = True) -> SearchResult:
    """Seeded random search minimizing mean k-fold CV MAPE.

    With ``include_defaults`` the estimator's current settings are trial 0.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    keys = {name: param_key(estimator, name) for name in space.dims}
    current = estimator.get_params()
    rng = np.random.default_rng(seed)
    log = []
    for trial in range(n_trials):
        if trial == 0 and include_defaults:
            params = {name: current[key] for name, key in keys.items()}
        else:
            params = space.sample(rng)
        est = clone(estimator).set_params(**{keys[n]: v for n, v in params.items()})
        score = float(np.mean(cross_val_scores(est, X, y, k=k, seed=seed, metric="mape")))
        log.append({"trial": trial, "params": params, "cv_mape": score})
    best = min(log, key=lambda e: (e["cv_mape"], e["trial"]))
    return SearchResult(dict(best["params"]), best["cv_mape"], log)


# ---------------------------------------------------------------------------
# reports

@dataclass
class EvalRow:
    group: str
    model: str
    n: int
    mae: float
    mape: float
    split: str = "test"


def evaluation_rows(y, y_pred, groups: Sequence[str], model: str = "gbdt",
                    split: str = "test") -> list[EvalRow]:
    """Per-group and pooled ("ALL") MAE / MAPE."""
    y = np.asarray(y, dtype=float)
    y_pred = np.asarray(y_pred, dtype=float)
    groups = np.asarray(groups, dtype=object)
    rows = []
    for g in sorted(set(groups.tolist())):
        m = groups == g
        rows.append(EvalRow(g, model, int(m.sum()), mae(y[m], y_pred[m]), mape(y[m], y_pred[m]),
                            split))
    rows.append(EvalRow("ALL", model, int(y.size), mae(y, y_pred), mape(y, y_pred), split))
    return rows


def write_eval_csv(path: str | Path, rows: Sequence[EvalRow]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "model", "n", "mae", "mape", "split"])
        for r in rows:
            w.writerow([r.group, r.model, r.n, repr(r.mae), repr(r.mape), r.split])


def read_grid_csv(path: str | Path) -> tuple[list[int], list[float], np.ndarray]:
    """Depth values, learning rates and the (depth x lr) MAE matrix of a grid CSV."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path}: empty grid")
    depths = sorted({int(r["max_depth"]) for r in rows})
    lrs = sorted({float(r["learning_rate"]) for r in rows})
    mat = np.full((len(depths), len(lrs)), np.nan)
    for r in rows:
        mat[depths.index(int(r["max_depth"])), lrs.index(float(r["learning_rate"]))] = float(r["mean_mae"])
    return depths, lrs, mat


def write_scatter_csv(path: str | Path, y, y_pred, groups: Sequence[str]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["actual", "predicted", "group"])
        for a, p, g in zip(y, y_pred, groups):
            w.writerow([repr(float(a)), repr(float(p)), g])
