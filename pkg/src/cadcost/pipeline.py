"""Per-product-group cost model: group reference + featurizer + boosted trees."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin, clone
from sklearn.utils.validation import check_is_fitted

from .dxf import QuantitySet
from .features import DrawingFeaturizer, feature_names
from .gbdt import GBDTRegressor, GbdtModel
from .group_ref import GroupReference

FORMAT = "cadcost.cost_model/1"


class CostRegressor(RegressorMixin, BaseEstimator):
    """Fits one featurizer and one regressor per product group.

    ``X`` is a sequence of :class:`~cadcost.dxf.QuantitySet`; each set's
    ``group`` selects the sub-model. Group references are fitted on the
    training rows only, so cross-validating this estimator never leaks bin
    edges or mean histograms from held-out rows.

    When no ``eval_set`` is given and the regressor uses early stopping,
    ``valid_fraction`` of each group's training rows is held out for it.
    """

    def __init__(self, lexicon=(), regressor=None, valid_fraction=0.15, seed=0):
        self.lexicon = lexicon
        self.regressor = regressor
        self.valid_fraction = valid_fraction
        self.seed = seed

    def _template(self):
        return self.regressor if self.regressor is not None else GBDTRegressor()

    def fit(self, X: Sequence[QuantitySet], y, eval_set=None):
        y = np.asarray(y, dtype=float)
        if len(X) != y.size:
            raise ValueError("X and y have different lengths")
        if len(X) == 0:
            raise ValueError("cannot fit on zero drawings")
        template = self._template()
        uses_early_stop = getattr(template, "early_stopping_rounds", 0) > 0
        self.models_ = {}
        for group in sorted({qs.group for qs in X}):
            idx = np.array([i for i, qs in enumerate(X) if qs.group == group])
            X_tr, y_tr = [X[i] for i in idx], y[idx]
            X_va, y_va = [], np.empty(0)
            if eval_set is not None:
                vidx = [i for i, qs in enumerate(eval_set[0]) if qs.group == group]
                X_va = [eval_set[0][i] for i in vidx]
                y_va = np.asarray(eval_set[1], dtype=float)[vidx]
            elif uses_early_stop and self.valid_fraction > 0 and len(idx) >= 10:
                rng = np.random.default_rng(self.seed)
                perm = rng.permutation(len(idx))
                n_va = max(1, int(round(self.valid_fraction * len(idx))))
                va, tr = np.sort(perm[:n_va]), np.sort(perm[n_va:])
                X_va, y_va = [X_tr[i] for i in va], y_tr[va]
                X_tr, y_tr = [X_tr[i] for i in tr], y_tr[tr]
            featurizer = DrawingFeaturizer(lexicon=tuple(self.lexicon)).fit(X_tr)
            names = list(featurizer.feature_names_out_)
            reg = clone(template)
            kw = {"feature_names": names} if isinstance(reg, GBDTRegressor) else {}
            if len(X_va) and isinstance(reg, GBDTRegressor):
                kw["eval_set"] = (featurizer.transform(X_va), y_va)
            reg.fit(featurizer.transform(X_tr), y_tr, **kw)
            self.models_[group] = (featurizer, reg)
        return self

    @property
    def groups_(self) -> list[str]:
        check_is_fitted(self, "models_")
        return list(self.models_)

    def predict(self, X: Sequence[QuantitySet]) -> np.ndarray:
        check_is_fitted(self, "models_")
        out = np.empty(len(X))
        for group, (featurizer, reg) in self.models_.items():
            idx = [i for i, qs in enumerate(X) if qs.group == group]
            if idx:
                out[idx] = reg.predict(featurizer.transform([X[i] for i in idx]))
        unknown = {qs.group for qs in X} - set(self.models_)
        if unknown:
            raise KeyError(f"no model for group(s) {sorted(unknown)}")
        return out

    def feature_rows(self, X: Sequence[QuantitySet]):
        """Feature vectors as the fitted sub-models see them."""
        check_is_fitted(self, "models_")
        return [self.models_[qs.group][0].featurize([qs])[0] for qs in X]

    def reference(self, group: str) -> GroupReference:
        return self.models_[group][0].references_[group]

    def gbdt(self, group: str) -> GbdtModel:
        return self.models_[group][1].model_

    # -- persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        check_is_fitted(self, "models_")
        groups = {}
        for g, (featurizer, reg) in self.models_.items():
            if not isinstance(reg, GBDTRegressor):
                raise TypeError("only GBDTRegressor sub-models can be serialized")
            groups[g] = {"reference": featurizer.references_[g].to_dict(),
                         "model": reg.model_.to_dict(), "regressor_metric": reg.metric}
        return {"format": FORMAT, "lexicon": list(self.lexicon),
                "valid_fraction": self.valid_fraction, "seed": self.seed, "groups": groups}

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_dict(cls, d: dict) -> "CostRegressor":
        if d.get("format") != FORMAT:
            raise ValueError(f"unsupported cost model format {d.get('format')!r}")
        models = {}
        params = None
        for g, entry in d["groups"].items():
            ref = GroupReference.from_dict(entry["reference"])
            gm = GbdtModel.from_dict(entry["model"])
            featurizer = DrawingFeaturizer(lexicon=tuple(d["lexicon"]))
            featurizer.references_ = {g: ref}
            featurizer.feature_names_out_ = feature_names(ref.vocabulary)
            if featurizer.feature_names_out_ != gm.schema:
                raise ValueError(f"group {g!r}: model schema does not match its group reference")
            params = asdict(gm.params)
            reg = GBDTRegressor(**params, metric=entry.get("regressor_metric", gm.metric))
            reg.model_ = gm
            reg.n_features_in_ = len(gm.schema)
            models[g] = (featurizer, reg)
        template = GBDTRegressor(**params) if params else None
        est = cls(lexicon=tuple(d["lexicon"]), regressor=template,
                  valid_fraction=d.get("valid_fraction", 0.15), seed=d.get("seed", 0))
        est.models_ = models
        return est

    @classmethod
    def load(cls, path: str | Path) -> "CostRegressor":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
