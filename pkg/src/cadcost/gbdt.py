"""Gradient-boosted regression trees with squared-error loss.

Split finding is exact greedy over presorted columns. Each candidate split
is scored with the second-order regularized gain

    gain = 1/2 [S(G_L, H_L) + S(G_R, H_R) - S(G, H)] - gamma
    S(G, H) = T(G)^2 / (H + reg_lambda)

where T soft-thresholds the gradient sum by ``reg_alpha``. Rows with a
missing (NaN) feature value follow a learned default direction. Trees grow
either level by level (``depth_wise``) or best-leaf-first (``leaf_wise``).
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Mapping, NamedTuple, Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted

FORMAT = "cadcost.gbdt/1"
GROWTH_MODES = ("depth_wise", "leaf_wise")


@dataclass(frozen=True)
class TrainParams:
    learning_rate: float = 0.1
    max_depth: int = 6
    n_estimators: int = 500
    subsample: float = 1.0
    colsample_bytree: float = 1.0
    gamma: float = 0.0
    reg_alpha: float = 0.0
    reg_lambda: float = 1.0
    early_stopping_rounds: int = 20
    num_leaves: int = 31
    min_child_samples: int = 5
    growth: str = "depth_wise"
    seed: int = 0

    def __post_init__(self):
        checks = [
            (0 < self.learning_rate <= 1, "learning_rate must be in (0, 1]"),
            (self.max_depth >= 0, "max_depth must be >= 0"),
            (self.n_estimators >= 1, "n_estimators must be >= 1"),
            (0 < self.subsample <= 1, "subsample must be in (0, 1]"),
            (0 < self.colsample_bytree <= 1, "colsample_bytree must be in (0, 1]"),
            (self.gamma >= 0, "gamma must be >= 0"),
            (self.reg_alpha >= 0, "reg_alpha must be >= 0"),
            (self.reg_lambda >= 0, "reg_lambda must be >= 0"),
            (self.early_stopping_rounds >= 0, "early_stopping_rounds must be >= 0"),
            (self.num_leaves >= 2, "num_leaves must be >= 2"),
            (self.min_child_samples >= 1, "min_child_samples must be >= 1"),
            (self.growth in GROWTH_MODES, f"growth must be one of {GROWTH_MODES}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(msg)

    @classmethod
    def from_dict(cls, d: Mapping) -> "TrainParams":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown training parameters: {sorted(unknown)}")
        return cls(**d)


@dataclass
class TreeNode:
    """A tree node; leaves have ``left is None``.

    ``weight`` is the node's output (for internal nodes, what it would
    output as a leaf). ``n_samples`` counts the training rows that reached
    the node.
    """

    weight: float = 0.0
    n_samples: int = 0
    feature: int = -1
    threshold: float = 0.0
    default_left: bool = True
    gain: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None

    def iter_nodes(self):
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.append(node.right)
                stack.append(node.left)

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def n_leaves(self) -> int:
        return sum(1 for n in self.iter_nodes() if n.is_leaf)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf weight for each row of ``X``."""
        out = np.empty(X.shape[0])
        self._route(X, np.arange(X.shape[0]), out)
        return out

    def _route(self, X, idx, out):
        if self.is_leaf:
            out[idx] = self.weight
            return
        x = X[idx, self.feature]
        go_left = np.where(np.isnan(x), self.default_left, x <= self.threshold)
        self.left._route(X, idx[go_left], out)
        self.right._route(X, idx[~go_left], out)

    def to_dict(self, schema: Sequence[str]) -> dict:
        if self.is_leaf:
            return {"weight": self.weight, "n_samples": self.n_samples}
        return {
            "feature": schema[self.feature],
            "threshold": self.threshold,
            "default_left": self.default_left,
            "gain": self.gain,
            "weight": self.weight,
            "n_samples": self.n_samples,
            "children": [self.left.to_dict(schema), self.right.to_dict(schema)],
        }

    @classmethod
    def from_dict(cls, d: dict, index: Mapping[str, int]) -> "TreeNode":
        node = cls(weight=float(d["weight"]), n_samples=int(d.get("n_samples", 0)))
        if "children" in d:
            node.feature = index[d["feature"]]
            node.threshold = float(d["threshold"])
            node.default_left = bool(d["default_left"])
            node.gain = float(d.get("gain", 0.0))
            node.left = cls.from_dict(d["children"][0], index)
            node.right = cls.from_dict(d["children"][1], index)
        return node


class Split(NamedTuple):
    feature: int
    threshold: float
    default_left: bool
    gain: float


# ---------------------------------------------------------------------------
# split finding

def soft_threshold(G, alpha: float):
    if alpha == 0:
        return G
    return np.sign(G) * np.maximum(np.abs(G) - alpha, 0.0)


def _score(G, H, p: TrainParams):
    t = soft_threshold(G, p.reg_alpha)
    # positions that are not split candidates may divide by zero; callers mask them
    with np.errstate(divide="ignore", invalid="ignore"):
        s = t * t / (H + p.reg_lambda)
    if p.reg_lambda > 0:
        return s
    return np.where(H + p.reg_lambda > 0, s, 0.0)


def leaf_weight(G: float, H: float, p: TrainParams) -> float:
    denom = H + p.reg_lambda
    if denom <= 0:
        return 0.0
    return float(-soft_threshold(G, p.reg_alpha) / denom)


def _scan(X: np.ndarray, S: np.ndarray, cols: np.ndarray, g: np.ndarray, h: np.ndarray,
          p: TrainParams) -> Split | None:
    """Best split of the rows in ``S``.

    ``S[:, j]`` lists the node's rows sorted by feature ``cols[j]`` with
    missing values last. Candidates sit between consecutive distinct values
    (at their midpoint), plus "all present values left, missing right".
    """
    k, d = S.shape
    mcs = p.min_child_samples
    if k < 2 * mcs or d == 0:
        return None
    V = X[S, cols]
    Gs = g[S]
    Hs = h[S]
    CG = np.cumsum(Gs, axis=0)
    CH = np.cumsum(Hs, axis=0)
    rows = S[:, 0]
    Gt = float(g[rows].sum())
    Ht = float(h[rows].sum())

    nm = np.count_nonzero(~np.isnan(V), axis=0)
    last = np.maximum(nm - 1, 0)
    ar = np.arange(d)
    Gnm = np.where(nm > 0, CG[last, ar], 0.0)
    Hnm = np.where(nm > 0, CH[last, ar], 0.0)
    Gm, Hm, cm = Gt - Gnm, Ht - Hnm, k - nm

    pos = np.arange(k)[:, None]
    valid = np.zeros((k, d), dtype=bool)
    with np.errstate(invalid="ignore"):
        valid[:-1] = (pos[:-1] < nm - 1) & (V[:-1] < V[1:])
    valid |= (pos == nm - 1) & (cm > 0)

    nL = pos + 1
    parent = _score(Gt, Ht, p)
    # missing rows sent right
    okR = valid & (nL >= mcs) & (k - nL >= mcs)
    gainR = 0.5 * (_score(CG, CH, p) + _score(Gt - CG, Ht - CH, p) - parent) - p.gamma
    gainR = np.where(okR, gainR, -np.inf)
    # missing rows sent left; without missing values this equals gainR
    gain = gainR
    default_left = np.ones((k, d), dtype=bool)
    miss = np.flatnonzero(cm > 0)
    if miss.size:
        nL2 = nL + cm[miss]
        okL = valid[:, miss] & (nL2 >= mcs) & (k - nL2 >= mcs)
        GL2, HL2 = CG[:, miss] + Gm[miss], CH[:, miss] + Hm[miss]
        gainL = 0.5 * (_score(GL2, HL2, p) + _score(Gt - GL2, Ht - HL2, p) - parent) - p.gamma
        gainL = np.where(okL, gainL, -np.inf)
        left = gainL >= gainR[:, miss]
        default_left[:, miss] = left
        gain = gainR.copy()
        gain[:, miss] = np.where(left, gainL, gainR[:, miss])
    # feature-major flattening: argmax picks lowest feature, then lowest threshold
    flat = gain.T.ravel()
    best = int(np.argmax(flat))
    best_gain = float(flat[best])
    # gains within round-off of zero are not improvements
    if not best_gain > 1e-12 * float(np.dot(g[rows], g[rows])):
        return None
    j, i = divmod(best, k)
    lo = float(V[i, j])
    if i + 1 < nm[j]:
        hi = float(V[i + 1, j])
        thr = 0.5 * (lo + hi)
        if not lo <= thr < hi:
            thr = lo
    else:
        thr = lo
    return Split(int(cols[j]), thr, bool(default_left[i, j]), best_gain)


def presort(X: np.ndarray) -> np.ndarray:
    """Row order of each column, NaN last, ties by row index."""
    return np.argsort(X, axis=0, kind="stable")


def _node_matrix(order: np.ndarray, member: np.ndarray) -> np.ndarray:
    keep = member[order]
    k = int(keep[:, 0].sum())
    return order.T[keep.T].reshape(order.shape[1], k).T


def best_split(X, rows, g, h, features, params: TrainParams) -> Split | None:
    """Best regularized split of ``rows`` over ``features``, or None."""
    X = np.asarray(X, dtype=float)
    rows = np.asarray(rows, dtype=int)
    cols = np.asarray(sorted(features), dtype=int)
    member = np.zeros(X.shape[0], dtype=bool)
    member[rows] = True
    S = _node_matrix(presort(X[:, cols]), member)
    return _scan(X, S, cols, np.asarray(g, float), np.asarray(h, float), params)


def _go_left(X: np.ndarray, rows: np.ndarray, split: Split) -> np.ndarray:
    x = X[rows, split.feature]
    return np.where(np.isnan(x), split.default_left, x <= split.threshold)


def fit_tree(X: np.ndarray, rows, g: np.ndarray, h: np.ndarray, params: TrainParams,
             rng: np.random.Generator | None = None, order: np.ndarray | None = None,
             features: Sequence[int] | None = None) -> TreeNode:
    """Grow one regression tree on the gradient statistics of ``rows``.

    ``order`` is an optional :func:`presort` of ``X`` reused across rounds.
    When ``features`` is None, ``colsample_bytree`` draws the candidate
    columns from ``rng``.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    rows = np.asarray(rows, dtype=int)
    if rows.size == 0:
        raise ValueError("cannot fit a tree on zero rows")
    if features is None:
        if params.colsample_bytree < 1:
            if rng is None:
                rng = np.random.default_rng(params.seed)
            m = max(1, int(round(params.colsample_bytree * d)))
            features = np.sort(rng.choice(d, size=m, replace=False))
        else:
            features = np.arange(d)
    cols = np.asarray(features, dtype=int)
    if order is None:
        order = presort(X)
    member = np.zeros(n, dtype=bool)
    member[rows] = True
    S = _node_matrix(order[:, cols], member)

    def make(S_node):
        r = S_node[:, 0] if S_node.shape[1] else rows
        G, H = float(g[r].sum()), float(h[r].sum())
        return TreeNode(weight=leaf_weight(G, H, params), n_samples=len(r))

    def children(node, S_node, split):
        node.feature, node.threshold = split.feature, split.threshold
        node.default_left, node.gain = split.default_left, split.gain
        r = S_node[:, 0]
        mask = np.zeros(n, dtype=bool)
        mask[r[_go_left(X, r, split)]] = True
        keep = mask[S_node]
        kl = int(keep[:, 0].sum())
        SL = S_node.T[keep.T].reshape(len(cols), kl).T
        SR = S_node.T[~keep.T].reshape(len(cols), len(r) - kl).T
        node.left, node.right = make(SL), make(SR)
        return SL, SR

    root = make(S)
    n_leaves = 1
    if params.growth == "depth_wise":
        queue = [(root, S, 0)]
        head = 0
        while head < len(queue):
            node, S_node, depth = queue[head]
            head += 1
            if depth >= params.max_depth or n_leaves >= params.num_leaves:
                continue
            split = _scan(X, S_node, cols, g, h, params)
            if split is None:
                continue
            SL, SR = children(node, S_node, split)
            n_leaves += 1
            queue.append((node.left, SL, depth + 1))
            queue.append((node.right, SR, depth + 1))
    else:
        heap = []
        counter = 0

        def push(node, S_node, depth):
            nonlocal counter
            if depth >= params.max_depth:
                return
            split = _scan(X, S_node, cols, g, h, params)
            if split is not None:
                heapq.heappush(heap, (-split.gain, counter, node, S_node, depth, split))
                counter += 1

        push(root, S, 0)
        while heap and n_leaves < params.num_leaves:
            _, _, node, S_node, depth, split = heapq.heappop(heap)
            SL, SR = children(node, S_node, split)
            n_leaves += 1
            push(node.left, SL, depth + 1)
            push(node.right, SR, depth + 1)
    return root


# ---------------------------------------------------------------------------
# metrics used for monitoring

def _metric(name: str):
    from . import evaluate

    try:
        return {"mae": evaluate.mae, "mape": evaluate.mape, "mse": evaluate.mse}[name]
    except KeyError:
        raise ValueError(f"unknown metric {name!r}, expected mae, mape or mse") from None


# ---------------------------------------------------------------------------
# model

@dataclass
class GbdtModel:
    base_score: float
    learning_rate: float
    schema: list[str]
    trees: list[TreeNode] = field(default_factory=list)
    best_iteration: int = -1
    params: TrainParams = field(default_factory=TrainParams)
    metric: str = "mape"
    log: list[dict] = field(default_factory=list)

    @property
    def used_trees(self) -> list[TreeNode]:
        return self.trees[: self.best_iteration + 1]

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.schema):
            raise ValueError(f"expected {len(self.schema)} feature columns, got shape {X.shape}")
        key = (self.best_iteration, len(self.trees))
        if getattr(self, "_flat_key", None) != key:
            self._flat = _FlatForest(self.used_trees)
            self._flat_key = key
        return _predict_forest(self._flat, X, self.base_score, self.learning_rate)

    def predict_row(self, row: Mapping[str, float | None]) -> float:
        return float(self.predict(self.row_vector(row)[None, :])[0])

    def row_vector(self, row: Mapping[str, float | None]) -> np.ndarray:
        return np.array([np.nan if row.get(f) is None else float(row[f]) for f in self.schema])

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "params": asdict(self.params),
            "metric": self.metric,
            "schema": list(self.schema),
            "base_score": self.base_score,
            "learning_rate": self.learning_rate,
            "best_iteration": self.best_iteration,
            "trees": [t.to_dict(self.schema) for t in self.trees],
            "log": self.log,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GbdtModel":
        if d.get("format") != FORMAT:
            raise ValueError(f"unsupported model format {d.get('format')!r}")
        schema = list(d["schema"])
        index = {name: i for i, name in enumerate(schema)}
        return cls(
            base_score=float(d["base_score"]),
            learning_rate=float(d["learning_rate"]),
            schema=schema,
            trees=[TreeNode.from_dict(t, index) for t in d["trees"]],
            best_iteration=int(d["best_iteration"]),
            params=TrainParams(**d["params"]),
            metric=d.get("metric", "mape"),
            log=list(d.get("log", [])),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "GbdtModel":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


class _FlatForest:
    """Trees flattened into parallel node arrays for vectorized routing."""

    def __init__(self, trees: Sequence[TreeNode]):
        feature, threshold, default_left, left, right, value = [], [], [], [], [], []
        roots, depth = [], 0
        for tree in trees:
            roots.append(len(feature))
            depth = max(depth, tree.depth())
            ids = {}
            order = list(tree.iter_nodes())
            for node in order:
                ids[id(node)] = len(feature) + len(ids)
            for node in order:
                leaf = node.is_leaf
                feature.append(0 if leaf else node.feature)
                threshold.append(0.0 if leaf else node.threshold)
                default_left.append(node.default_left)
                me = ids[id(node)]
                left.append(me if leaf else ids[id(node.left)])
                right.append(me if leaf else ids[id(node.right)])
                value.append(node.weight)
        self.feature = np.asarray(feature, dtype=np.intp)
        self.threshold = np.asarray(threshold, dtype=float)
        self.default_left = np.asarray(default_left, dtype=bool)
        self.left = np.asarray(left, dtype=np.intp)
        self.right = np.asarray(right, dtype=np.intp)
        self.value = np.asarray(value, dtype=float)
        self.roots = np.asarray(roots, dtype=np.intp)
        self.depth = depth

    def leaf_values(self, X: np.ndarray) -> np.ndarray:
        """(n_rows, n_trees) matrix of reached leaf weights."""
        n = X.shape[0]
        nodes = np.broadcast_to(self.roots, (n, self.roots.size)).copy()
        rows = np.arange(n)[:, None]
        for _ in range(self.depth):
            x = X[rows, self.feature[nodes]]
            go_left = np.where(np.isnan(x), self.default_left[nodes], x <= self.threshold[nodes])
            # leaves point to themselves, so extra iterations are no-ops
            nodes = np.where(go_left, self.left[nodes], self.right[nodes])
        return self.value[nodes]


def _predict_forest(forest: "_FlatForest", X: np.ndarray, base: float, lr: float) -> np.ndarray:
    total = np.zeros(X.shape[0])
    if forest.roots.size:
        vals = forest.leaf_values(X)
        for t in range(vals.shape[1]):
            total += vals[:, t]
    return base + lr * total


def predict(model: GbdtModel, row) -> float | np.ndarray:
    """Predict one feature mapping, or every row of a 2D array."""
    if isinstance(row, Mapping):
        return model.predict_row(row)
    return model.predict(row)


def fit_gbdt(X, y, X_valid=None, y_valid=None, params: TrainParams | None = None,
             metric: str = "mape", feature_names: Sequence[str] | None = None) -> GbdtModel:
    """Boost squared-error trees from a mean base score.

    With a validation set and ``early_stopping_rounds > 0``, training stops
    once the validation metric has gone that many rounds without improving
    by more than 1e-12, and ``best_iteration`` marks the best round.
    """
    params = params or TrainParams()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("training matrix must be 2D and non-empty")
    if X.shape[0] != y.size:
        raise ValueError("X and y have different numbers of rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("targets must be finite")
    if np.any(np.isinf(X)):
        raise ValueError("features must be finite or NaN")
    n, d = X.shape
    schema = list(feature_names) if feature_names is not None else [f"f{i}" for i in range(d)]
    if len(schema) != d:
        raise ValueError("feature_names length does not match X")
    score = _metric(metric)

    has_valid = X_valid is not None and y_valid is not None and len(y_valid) > 0
    if has_valid:
        X_valid = np.asarray(X_valid, dtype=float)
        y_valid = np.asarray(y_valid, dtype=float).ravel()

    # exact for constant targets, where the mean can pick up round-off
    base = float(y[0]) if np.all(y == y[0]) else float(np.mean(y))
    model = GbdtModel(base_score=base, learning_rate=params.learning_rate, schema=schema,
                      params=params, metric=metric)
    rng = np.random.default_rng(params.seed)
    order = presort(X)
    pred = np.full(n, base)
    pred_valid = np.full(len(y_valid), base) if has_valid else None
    h = np.ones(n)
    all_rows = np.arange(n)
    early = has_valid and params.early_stopping_rounds > 0
    best_val, best_iter = math.inf, -1

    for r in range(params.n_estimators):
        g = pred - y
        if params.subsample < 1:
            m = max(1, int(round(params.subsample * n)))
            rows = np.sort(rng.choice(n, size=m, replace=False))
        else:
            rows = all_rows
        tree = fit_tree(X, rows, g, h, params, rng=rng, order=order)
        model.trees.append(tree)
        pred += params.learning_rate * tree.apply(X)
        entry = {"round": r, "train": float(score(y, pred))}
        if has_valid:
            pred_valid += params.learning_rate * tree.apply(X_valid)
            entry["valid"] = float(score(y_valid, pred_valid))
        model.log.append(entry)
        if early:
            if entry["valid"] < best_val - 1e-12:
                best_val, best_iter = entry["valid"], r
            elif r - best_iter >= params.early_stopping_rounds:
                break
    model.best_iteration = best_iter if early else len(model.trees) - 1
    return model


def split_count_importance(model: GbdtModel) -> dict[str, float]:
    """Share of all splits (in the used trees) made on each feature."""
    counts: dict[str, int] = {}
    for tree in model.used_trees:
        for node in tree.iter_nodes():
            if not node.is_leaf:
                name = model.schema[node.feature]
                counts[name] = counts.get(name, 0) + 1
    total = sum(counts.values())
    if total == 0:
        return {}
    return {k: v / total for k, v in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))}


def fit_cart(X, y, max_depth: int = 5, min_child_samples: int = 5,
             num_leaves: int | None = None) -> TreeNode:
    """Single least-squares regression tree; every node holds its mean target."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if X.shape[0] == 0:
        raise ValueError("cannot fit a tree on zero rows")
    n = X.shape[0]
    params = TrainParams(learning_rate=1.0, max_depth=max_depth, reg_lambda=0.0,
                         min_child_samples=min_child_samples,
                         num_leaves=num_leaves or max(2, n), early_stopping_rounds=0)
    mean = float(y.mean())
    tree = fit_tree(X, np.arange(n), mean - y, np.ones(n), params)
    for node in tree.iter_nodes():
        node.weight += mean
    return tree


# ---------------------------------------------------------------------------
# scikit-learn estimator

class GBDTRegressor(RegressorMixin, BaseEstimator):
    """scikit-learn wrapper around :func:`fit_gbdt`.

    ``fit`` accepts NaN for missing values and an optional
    ``eval_set=(X_valid, y_valid)`` used for early stopping.
    """

    def __init__(self, learning_rate=0.1, max_depth=6, n_estimators=500, subsample=1.0,
                 colsample_bytree=1.0, gamma=0.0, reg_alpha=0.0, reg_lambda=1.0,
                 early_stopping_rounds=20, num_leaves=31, min_child_samples=5,
                 growth="depth_wise", seed=0, metric="mape"):
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.n_estimators = n_estimators
        self.subsample = subsample
        self.colsample_bytree = colsample_bytree
        self.gamma = gamma
        self.reg_alpha = reg_alpha
        self.reg_lambda = reg_lambda
        self.early_stopping_rounds = early_stopping_rounds
        self.num_leaves = num_leaves
        self.min_child_samples = min_child_samples
        self.growth = growth
        self.seed = seed
        self.metric = metric

    def train_params(self) -> TrainParams:
        names = {f.name for f in fields(TrainParams)}
        return TrainParams(**{k: v for k, v in self.get_params().items() if k in names})

    def fit(self, X, y, eval_set=None, feature_names=None):
        X = check_array(X, ensure_all_finite="allow-nan", dtype=float)
        Xv = yv = None
        if eval_set is not None:
            Xv = check_array(eval_set[0], ensure_all_finite="allow-nan", dtype=float)
            yv = np.asarray(eval_set[1], dtype=float)
        self.model_ = fit_gbdt(X, y, Xv, yv, self.train_params(), metric=self.metric,
                               feature_names=feature_names)
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X, ensure_all_finite="allow-nan", dtype=float)
        return self.model_.predict(X)

    @property
    def feature_importances_(self) -> np.ndarray:
        check_is_fitted(self, "model_")
        imp = split_count_importance(self.model_)
        return np.array([imp.get(name, 0.0) for name in self.model_.schema])
