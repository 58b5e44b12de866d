"""Descriptive statistics, 12-bin histograms and the fixed feature schema."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .dxf import QuantitySet

if TYPE_CHECKING:
    from .group_ref import GroupReference

N_BINS = 12
STATS = ("count", "min", "max", "range", "mean", "median", "mode", "std", "skewness", "kurtosis")

# feature prefix -> QuantitySet field
QUANTITIES = {
    "line": "line_lengths",
    "arc": "arc_lengths",
    "arc_angle": "arc_angles",
    "circle": "circle_radii",
    "rotated": "rotated_measurements",
    "angular": "angular_measurements",
    "diameter": "diametric_measurements",
    "radial": "radial_measurements",
    "tolerance": "tolerances",
}
HIST_QUANTITIES = ("line", "arc", "arc_angle", "circle", "rotated")
TRAILING_COLUMNS = ("group", "cost", "source_id")


@dataclass(frozen=True)
class DescriptorSet:
    count: int
    min: float | None = None
    max: float | None = None
    range: float | None = None
    mean: float | None = None
    median: float | None = None
    mode: float | None = None
    std: float | None = None
    skewness: float | None = None
    kurtosis: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in STATS}


@dataclass(frozen=True)
class Histogram12:
    edges: tuple[float, ...]
    counts: tuple[int, ...]
    norm: tuple[float, ...]


def describe(values: Sequence[float]) -> DescriptorSet:
    """Ten summary statistics of a sample.

    Moments are population moments (divide by n). Skewness is m3/m2^1.5 and
    kurtosis is the excess m4/m2^2 - 3; both are 0 for n < 3 or when the
    sample has (numerically) no spread. The mode is the center of the most
    populated of 12 equal-width bins over [min, max], lowest bin on ties.
    """
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n == 0:
        return DescriptorSet(count=0)
    if not np.all(np.isfinite(x)):
        raise ValueError("describe() requires finite values")
    lo, hi = float(x.min()), float(x.max())
    mean = float(x.mean())
    dev = x - mean
    m2 = float(np.mean(dev ** 2))
    if n < 3 or m2 < 1e-12:
        skew = kurt = 0.0
    else:
        skew = float(np.mean(dev ** 3)) / m2 ** 1.5
        kurt = float(np.mean(dev ** 4)) / m2 ** 2 - 3.0
    return DescriptorSet(
        count=n, min=lo, max=hi, range=hi - lo, mean=mean,
        median=float(np.median(x)), mode=_binned_mode(x, lo, hi),
        std=math.sqrt(m2), skewness=skew, kurtosis=kurt,
    )


def _binned_mode(x: np.ndarray, lo: float, hi: float) -> float:
    if hi <= lo:
        return lo
    width = (hi - lo) / N_BINS
    idx = np.clip(((x - lo) / width).astype(int), 0, N_BINS - 1)
    counts = np.bincount(idx, minlength=N_BINS)
    return lo + (int(np.argmax(counts)) + 0.5) * width


def equal_width_edges(lo: float, hi: float) -> np.ndarray:
    """13 boundaries of 12 equal bins.

    A unit-wide band centred on ``lo`` replaces ranges too narrow to give
    distinct float edges, including ``lo == hi``.
    """
    e = np.linspace(lo, hi, N_BINS + 1)
    if hi <= lo or np.any(np.diff(e) <= 0):
        e = np.linspace(lo - 0.5, lo + 0.5, N_BINS + 1)
    return e


def build_histogram(values: Sequence[float], edges: Sequence[float]) -> Histogram12:
    """Bin ``values`` into the 12 bins given by ``edges``.

    Bins are half-open ``[edges[i], edges[i+1])``; values below the first
    edge land in the first bin and values at or above the last edge land in
    the last bin.
    """
    e = np.asarray(edges, dtype=float)
    if e.shape != (N_BINS + 1,):
        raise ValueError(f"expected {N_BINS + 1} edges, got {e.size}")
    if np.any(np.diff(e) <= 0):
        raise ValueError("histogram edges must be strictly ascending")
    x = np.asarray(values, dtype=float).ravel()
    idx = np.clip(np.searchsorted(e, x, side="right") - 1, 0, N_BINS - 1)
    counts = np.bincount(idx, minlength=N_BINS)
    total = counts.sum()
    norm = counts / total if total > 0 else np.zeros(N_BINS)
    return Histogram12(tuple(e.tolist()), tuple(int(c) for c in counts), tuple(norm.tolist()))


def material_onehot(materials: Iterable[str], vocabulary: Sequence[str]) -> dict[str, int]:
    found = {m.lower() for m in materials}
    return {f"mat_{name}": int(name.lower() in found) for name in vocabulary}


def feature_names(vocabulary: Sequence[str] = ()) -> list[str]:
    """Column order of a feature vector for the given material vocabulary."""
    names = [f"{q}_{s}" for q in QUANTITIES for s in STATS]
    for q in HIST_QUANTITIES:
        names += [f"{q}_bin{i}" for i in range(1, N_BINS + 1)]
        names += [f"norm_{q}_bin{i}" for i in range(1, N_BINS + 1)]
    for q in HIST_QUANTITIES:
        names += [f"{q}_euc_dist", f"{q}_kl_div"]
    names += ["ellipse_count", "spline_count"]
    names += [f"mat_{m}" for m in vocabulary]
    return names


@dataclass
class FeatureVector:
    values: dict[str, float | None]
    group: str = ""
    cost: float | None = None
    source_id: str = ""

    def as_array(self, names: Sequence[str]) -> np.ndarray:
        return np.array([_nan(self.values.get(n)) for n in names], dtype=float)


def _nan(v) -> float:
    return np.nan if v is None else float(v)


def featurize(qs: QuantitySet, ref: "GroupReference | None" = None,
              vocabulary: Sequence[str] = ()) -> FeatureVector:
    """Assemble the named feature vector of one drawing.

    With a group reference the histograms use its bin edges, the distance
    features are filled and its vocabulary drives the material indicators.
    Without one, each histogram spans the drawing's own min..max, distance
    features are missing and ``vocabulary`` is used for materials.
    """
    from .group_ref import euclidean_distance, kl_divergence

    if ref is not None:
        if qs.group and ref.group != qs.group:
            raise ValueError(f"reference for group {ref.group!r} applied to group {qs.group!r}")
        vocabulary = ref.vocabulary

    values: dict[str, float | None] = {}
    for q, field_name in QUANTITIES.items():
        for stat, v in describe(getattr(qs, field_name)).as_dict().items():
            values[f"{q}_{stat}"] = v
    dists: dict[str, float | None] = {}
    for q in HIST_QUANTITIES:
        data = getattr(qs, QUANTITIES[q])
        if ref is not None:
            edges = ref.edges[q]
        elif data:
            edges = equal_width_edges(min(data), max(data))
        else:
            edges = equal_width_edges(0.0, 1.0)
        h = build_histogram(data, edges)
        for i in range(N_BINS):
            values[f"{q}_bin{i + 1}"] = float(h.counts[i])
        for i in range(N_BINS):
            values[f"norm_{q}_bin{i + 1}"] = h.norm[i] if data else None
        if ref is not None and data and ref.has_data[q]:
            dists[f"{q}_euc_dist"] = euclidean_distance(h.norm, ref.mean_bins[q])
            dists[f"{q}_kl_div"] = kl_divergence(h.norm, ref.mean_bins[q], eps=ref.epsilon)
        else:
            dists[f"{q}_euc_dist"] = None
            dists[f"{q}_kl_div"] = None
    values.update(dists)
    values["ellipse_count"] = float(qs.ellipse_count)
    values["spline_count"] = float(qs.spline_count)
    values.update({k: float(v) for k, v in material_onehot(qs.materials, vocabulary).items()})
    return FeatureVector(values, group=qs.group, source_id=qs.source_id)


# ---------------------------------------------------------------------------
# CSV table

def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    v = float(v)
    # integral values (counts, one-hot flags) print without a trailing .0
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


def write_feature_csv(path: str | Path, vectors: Sequence[FeatureVector],
                      names: Sequence[str] | None = None) -> list[str]:
    """Write one row per vector; ``names`` defaults to the union schema."""
    if names is None:
        vocab: list[str] = []
        for fv in vectors:
            vocab += [k[4:] for k in fv.values if k.startswith("mat_") and k[4:] not in vocab]
        names = feature_names(vocab)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([*names, *TRAILING_COLUMNS])
        for fv in vectors:
            row = [_fmt(fv.values.get(n, 0.0 if n.startswith("mat_") else None)) for n in names]
            w.writerow([*row, fv.group, _fmt(fv.cost), fv.source_id])
    return list(names)


def read_feature_csv(path: str | Path) -> tuple[list[str], list[FeatureVector]]:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if header is None or list(header[-3:]) != list(TRAILING_COLUMNS):
            raise ValueError(f"{path}: header must end with {', '.join(TRAILING_COLUMNS)}")
        names = header[:-3]
        vectors = []
        for lineno, row in enumerate(r, start=2):
            if len(row) != len(header):
                raise ValueError(f"{path}:{lineno}: expected {len(header)} cells, got {len(row)}")
            values = {n: (float(c) if c != "" else None) for n, c in zip(names, row)}
            group, cost, source_id = row[-3:]
            vectors.append(FeatureVector(values, group, float(cost) if cost else None, source_id))
    return names, vectors


# ---------------------------------------------------------------------------
# estimator

class DrawingFeaturizer(TransformerMixin, BaseEstimator):
    """Fit per-group references on quantity sets, then emit feature matrices.

    ``fit`` groups the input by ``QuantitySet.group`` and fits one
    :class:`~cadcost.group_ref.GroupReference` per group. ``transform``
    returns a float array (NaN = missing) whose columns are
    ``get_feature_names_out()``; material columns are the union of the
    fitted vocabularies.
    """

    def __init__(self, lexicon=()):
        self.lexicon = lexicon

    def fit(self, X: Sequence[QuantitySet], y=None):
        from .group_ref import fit_group_reference

        by_group: dict[str, list[QuantitySet]] = {}
        for qs in X:
            by_group.setdefault(qs.group, []).append(qs)
        if not by_group:
            raise ValueError("DrawingFeaturizer.fit needs at least one drawing")
        self.references_ = {g: fit_group_reference(rows, self.lexicon, group=g)
                            for g, rows in sorted(by_group.items())}
        vocab: list[str] = []
        for ref in self.references_.values():
            vocab += [m for m in ref.vocabulary if m not in vocab]
        self.feature_names_out_ = feature_names(vocab)
        return self

    def featurize(self, X: Sequence[QuantitySet]) -> list[FeatureVector]:
        check_is_fitted(self, "references_")
        out = []
        for qs in X:
            if qs.group not in self.references_:
                raise KeyError(f"no group reference fitted for group {qs.group!r}")
            out.append(featurize(qs, self.references_[qs.group]))
        return out

    def transform(self, X: Sequence[QuantitySet]) -> np.ndarray:
        names = self.feature_names_out_
        vectors = self.featurize(X)
        return vectors_to_matrix(vectors, names)

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_out_")
        return np.asarray(self.feature_names_out_, dtype=object)


def vectors_to_matrix(vectors: Sequence[FeatureVector], names: Sequence[str]) -> np.ndarray:
    out = np.full((len(vectors), len(names)), np.nan)
    for i, fv in enumerate(vectors):
        for j, n in enumerate(names):
            v = fv.values.get(n)
            if v is None and n.startswith("mat_"):
                v = 0.0
            if v is not None:
                out[i, j] = v
    return out


def rows_from_mapping(rows: Iterable[Mapping[str, float | None]], names: Sequence[str]) -> np.ndarray:
    return vectors_to_matrix([FeatureVector(dict(r)) for r in rows], names)
