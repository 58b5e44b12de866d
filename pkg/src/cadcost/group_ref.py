"""Per product-group reference histograms and drawing-to-group distances."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .dxf import QuantitySet
from .features import HIST_QUANTITIES, N_BINS, QUANTITIES, build_histogram, equal_width_edges

EPSILON = 1e-10
FORMAT = "cadcost.group_reference/1"


@dataclass(frozen=True)
class GroupReference:
    group: str
    edges: dict[str, tuple[float, ...]]
    mean_bins: dict[str, tuple[float, ...]]
    has_data: dict[str, bool]
    vocabulary: tuple[str, ...] = ()
    n_train: int = 0
    epsilon: float = EPSILON

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "group": self.group,
            "epsilon": self.epsilon,
            "n_train": self.n_train,
            "vocabulary": list(self.vocabulary),
            "quantities": {
                q: {"edges": list(self.edges[q]), "mean_bins": list(self.mean_bins[q]),
                    "has_data": self.has_data[q]}
                for q in HIST_QUANTITIES
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GroupReference":
        if d.get("format") != FORMAT:
            raise ValueError(f"unsupported group reference format {d.get('format')!r}")
        qd = d["quantities"]
        return cls(
            group=d["group"],
            edges={q: tuple(qd[q]["edges"]) for q in HIST_QUANTITIES},
            mean_bins={q: tuple(qd[q]["mean_bins"]) for q in HIST_QUANTITIES},
            has_data={q: bool(qd[q]["has_data"]) for q in HIST_QUANTITIES},
            vocabulary=tuple(d["vocabulary"]),
            n_train=int(d["n_train"]),
            epsilon=float(d["epsilon"]),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "GroupReference":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def fit_group_reference(quantity_sets: Sequence[QuantitySet], lexicon: Sequence[str] = (),
                        group: str | None = None) -> GroupReference:
    """Pool training drawings of one group into reference histograms.

    Edges span the pooled min..max of each histogram quantity. The mean
    histogram averages the per-drawing normalized histograms of drawings
    that actually contain that quantity.
    """
    if not quantity_sets:
        raise ValueError("cannot fit a group reference on an empty training set")
    if group is None:
        group = quantity_sets[0].group
    edges, mean_bins, has_data = {}, {}, {}
    for q in HIST_QUANTITIES:
        lists = [getattr(qs, QUANTITIES[q]) for qs in quantity_sets]
        lists = [v for v in lists if len(v)]
        if lists:
            pooled = np.concatenate([np.asarray(v, dtype=float) for v in lists])
            e = equal_width_edges(float(pooled.min()), float(pooled.max()))
            hists = np.array([build_histogram(v, e).norm for v in lists])
            mean = hists.mean(axis=0)
        else:
            e = equal_width_edges(0.0, 1.0)
            mean = np.zeros(N_BINS)
        edges[q] = tuple(e.tolist())
        mean_bins[q] = tuple(mean.tolist())
        has_data[q] = bool(lists)

    seen = {m.lower() for qs in quantity_sets for m in qs.materials}
    if lexicon:
        vocab = tuple(m for m in lexicon if m.lower() in seen)
    else:
        vocab = tuple(sorted({m for qs in quantity_sets for m in qs.materials}))
    return GroupReference(group=group, edges=edges, mean_bins=mean_bins, has_data=has_data,
                          vocabulary=vocab, n_train=len(quantity_sets))


def _check12(a: Sequence[float], b: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (N_BINS,) or b.shape != (N_BINS,):
        raise ValueError(f"expected two vectors of {N_BINS} bins, got {a.shape} and {b.shape}")
    return a, b


def euclidean_distance(bins_dwg: Sequence[float], bins_mean: Sequence[float]) -> float:
    a, b = _check12(bins_dwg, bins_mean)
    return math.sqrt(float(np.sum((a - b) ** 2)))


def kl_divergence(bins_dwg: Sequence[float], bins_mean: Sequence[float], eps: float = EPSILON) -> float:
    """sum_i mean_i * ln((mean_i + eps) / (dwg_i + eps)).

    The group mean is the weighting distribution; the drawing histogram is
    the one being compared against it.
    """
    p, m = _check12(bins_dwg, bins_mean)
    if np.any(p < 0) or np.any(m < 0):
        raise ValueError("histogram bins must be non-negative")
    return float(np.sum(m * np.log((m + eps) / (p + eps))))
