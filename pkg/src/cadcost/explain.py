"""Feature importances, exact Shapley values and tree export."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .evaluate import METRICS
from .gbdt import GbdtModel, TreeNode

MAX_SHAPLEY_FEATURES = 12
METHODS = ("split_count", "permutation", "shapley_mean_abs")


@dataclass
class ImportanceReport:
    items: list[tuple[str, float]]
    method: str

    def as_dict(self) -> dict[str, float]:
        return dict(self.items)

    def top(self, k: int) -> list[str]:
        return [name for name, _ in self.items[:k]]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["rank", "feature", "weight", "method"])
            for rank, (name, weight) in enumerate(self.items, start=1):
                w.writerow([rank, name, repr(float(weight)), self.method])


def _ranked(weights: Mapping[str, float]) -> list[tuple[str, float]]:
    return sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))


def average_importance(reports: Sequence[Mapping[str, float] | ImportanceReport]) -> ImportanceReport:
    """Mean normalized weight per feature over per-group reports (absent = 0)."""
    if not reports:
        raise ValueError("average_importance needs at least one report")
    dicts = [r.as_dict() if isinstance(r, ImportanceReport) else dict(r) for r in reports]
    names = sorted({k for d in dicts for k in d})
    avg = {n: sum(d.get(n, 0.0) for d in dicts) / len(dicts) for n in names}
    return ImportanceReport(_ranked(avg), "split_count")


def _predictor(model):
    if hasattr(model, "predict"):
        return model.predict
    if callable(model):
        return model
    raise TypeError("model must have a predict method or be callable")


def permutation_importance(model, X, y, metric: str = "mae", n_repeats: int = 5, seed: int = 0,
                           feature_names: Sequence[str] | None = None) -> ImportanceReport:
    """Mean increase of ``metric`` when one column at a time is shuffled."""
    predict = _predictor(model)
    score = METRICS[metric]
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.shape[0] == 0:
        raise ValueError("permutation importance needs data")
    if feature_names is None:
        feature_names = getattr(model, "schema", None) or [f"f{j}" for j in range(X.shape[1])]
    baseline = score(y, predict(X))
    rng = np.random.default_rng(seed)
    weights = {}
    for j, name in enumerate(feature_names):
        deltas = []
        for _ in range(n_repeats):
            Xp = X.copy()
            Xp[:, j] = X[rng.permutation(X.shape[0]), j]
            deltas.append(score(y, predict(Xp)) - baseline)
        weights[name] = float(np.mean(deltas))
    return ImportanceReport(_ranked(weights), "permutation")


def used_features(model: GbdtModel) -> list[int]:
    return sorted({n.feature for t in model.used_trees for n in t.iter_nodes() if not n.is_leaf})


def sample_background(X, size: int = 256, seed: int = 0) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.shape[0] <= size:
        return X
    idx = np.sort(np.random.default_rng(seed).choice(X.shape[0], size=size, replace=False))
    return X[idx]


def exact_shapley(model, row, background, features: Sequence[int] | None = None,
                  chunk_rows: int = 65536) -> dict[int, float]:
    """Interventional Shapley values by enumerating every coalition.

    A coalition's value is the mean prediction over ``background`` rows
    whose coalition columns are overwritten with ``row``. Columns outside
    ``features`` keep the background values too, so with ``features`` equal
    to every column the model reads, the values sum to
    ``f(row) - mean(f(background))``. ``features`` defaults to the columns
    split on by a :class:`GbdtModel`.
    """
    predict = _predictor(model)
    row = np.asarray(row, dtype=float).ravel()
    B = np.asarray(background, dtype=float)
    if B.ndim != 2 or B.shape[0] == 0 or B.shape[1] != row.size:
        raise ValueError("background must be a non-empty 2D array matching the row width")
    if features is None:
        if not isinstance(model, GbdtModel):
            raise ValueError("features must be given for models other than GbdtModel")
        features = used_features(model)
    features = list(features)
    d = len(features)
    if d > MAX_SHAPLEY_FEATURES:
        raise ValueError(f"exact Shapley enumeration is limited to {MAX_SHAPLEY_FEATURES} "
                         f"features (got {d}); use permutation_importance for wide models")
    if d == 0:
        return {}
    n_masks = 1 << d
    nb = B.shape[0]
    bits = (np.arange(n_masks)[:, None] >> np.arange(d)[None, :]) & 1
    values = np.empty(n_masks)
    per_chunk = max(1, chunk_rows // nb)
    for lo in range(0, n_masks, per_chunk):
        hi = min(n_masks, lo + per_chunk)
        Z = np.tile(B, (hi - lo, 1))
        for j, f in enumerate(features):
            on = np.repeat(bits[lo:hi, j].astype(bool), nb)
            Z[on, f] = row[f]
        values[lo:hi] = predict(Z).reshape(hi - lo, nb).mean(axis=1)

    sizes = bits.sum(axis=1)
    weight = np.array([math.factorial(s) * math.factorial(d - s - 1) / math.factorial(d)
                       if s < d else 0.0 for s in range(d + 1)])
    phi = {}
    masks = np.arange(n_masks)
    for j, f in enumerate(features):
        without = masks[bits[:, j] == 0]
        gain = values[without | (1 << j)] - values[without]
        phi[f] = float(np.sum(weight[sizes[without]] * gain))
    return phi


def shapley_report(model: GbdtModel, X, background, features: Sequence[int] | None = None) -> ImportanceReport:
    """Mean |Shapley value| per feature over the rows of ``X``."""
    X = np.asarray(X, dtype=float)
    totals: dict[int, float] = {}
    for row in X:
        for f, v in exact_shapley(model, row, background, features).items():
            totals[f] = totals.get(f, 0.0) + abs(v)
    names = model.schema
    return ImportanceReport(_ranked({names[f]: v / len(X) for f, v in totals.items()}),
                            "shapley_mean_abs")


# ---------------------------------------------------------------------------
# tree export

def _node_stats(tree: TreeNode, X, y) -> dict[int, tuple[int, float]]:
    """Routes training rows through the tree: id(node) -> (count, mean target)."""
    stats = {}

    def walk(node, idx):
        stats[id(node)] = (len(idx), float(np.mean(y[idx])) if len(idx) else float("nan"))
        if node.is_leaf:
            return
        x = X[idx, node.feature]
        left = np.where(np.isnan(x), node.default_left, x <= node.threshold)
        walk(node.left, idx[left])
        walk(node.right, idx[~left])

    walk(tree, np.arange(len(y)))
    return stats


def export_tree(tree: TreeNode, feature_names: Sequence[str], X=None, y=None,
                precision: int = 3) -> tuple[str, str]:
    """Render a tree as Graphviz DOT and as indented text rules.

    Every node shows its split rule (internal nodes only), the share of
    training samples reaching it and its predicted value. With ``X`` and
    ``y`` the counts and values are recomputed by routing those rows;
    otherwise the counts and weights stored in the tree are used.
    """
    if X is not None and y is not None:
        stats = _node_stats(tree, np.asarray(X, dtype=float), np.asarray(y, dtype=float))
    else:
        stats = {id(n): (n.n_samples, n.weight) for n in tree.iter_nodes()}
    total = stats[id(tree)][0] or 1

    def fmt(v):
        return f"{v:.{precision}f}"

    dot = ["digraph Tree {", 'node [shape=box, style="rounded", fontname="helvetica"];',
           'edge [fontname="helvetica"];']
    text = []
    counter = [0]

    def visit(node, depth):
        nid = counter[0]
        counter[0] += 1
        count, value = stats[id(node)]
        share = f"samples = {100.0 * count / total:.1f}%"
        pred = f"value = {fmt(value)}"
        if node.is_leaf:
            label = f"{share}\\n{pred}"
        else:
            rule = f"{feature_names[node.feature]} <= {fmt(node.threshold)}"
            label = f"{rule}\\n{share}\\n{pred}"
        dot.append(f'{nid} [label="{label}"];')
        indent = "|   " * depth
        if node.is_leaf:
            text.append(f"{indent}|--- {pred} ({share})")
            return nid
        name = feature_names[node.feature]
        miss = "missing left" if node.default_left else "missing right"
        text.append(f"{indent}|--- {name} <= {fmt(node.threshold)}  [{share}, {pred}, {miss}]")
        left = visit(node.left, depth + 1)
        text.append(f"{indent}|--- {name} >  {fmt(node.threshold)}")
        right = visit(node.right, depth + 1)
        dot.append(f'{nid} -> {left} [headlabel="True"];')
        dot.append(f'{nid} -> {right} [headlabel="False"];')
        return nid

    visit(tree, 0)
    dot.append("}")
    return "\n".join(dot) + "\n", "\n".join(text) + "\n"
