"""Command line front end: ``cadcost <subcommand> ...``.

Every stage reads and writes plain files (CSV, JSON, DOT) so stages can be
run and checked independently. All randomness comes from ``--seed``. A JSON
file given with ``--config`` overrides flags: its keys are option names
(dashes or underscores), plus ``params`` for booster settings and ``synth``
for generator settings.

Exit codes: 0 ok, 1 other failure, 2 usage, 3 drawing parse error,
4 table/model schema error, 5 file I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import fields
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .dxf import DxfParseError, QuantitySet, extract_quantities, load_drawing, load_lexicon, with_group
from .evaluate import (DEFAULT_SPACE, evaluation_rows, grid_search, random_search, split_dataset,
                       write_eval_csv, write_scatter_csv)
from .explain import (ImportanceReport, average_importance, export_tree, permutation_importance,
                      sample_background, shapley_report, used_features)
from .features import feature_names, featurize, read_feature_csv, vectors_to_matrix, write_feature_csv
from .gbdt import GBDTRegressor, TrainParams, fit_cart, split_count_importance
from .group_ref import GroupReference
from .pipeline import CostRegressor
from .synth import SynthConfig, generate_corpus

log = logging.getLogger("cadcost")

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_PARSE, EXIT_SCHEMA, EXIT_IO = 0, 1, 2, 3, 4, 5
SIDECAR_FORMAT = "cadcost.quantities/1"


class SchemaError(ValueError):
    """Input table or model does not have the expected layout."""


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small file helpers

def sidecar_path(csv_path: str | Path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".quantities.json")


def _need_file(path, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise FileNotFoundError(f"{what} not found: {p}")
    return p


def _need_dir(path, what: str) -> Path:
    p = Path(path)
    if not p.is_dir():
        raise FileNotFoundError(f"{what} is not a directory: {p}")
    return p


def _out_file(path) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        raise FileNotFoundError(f"output directory does not exist: {p.parent}")
    return p


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def read_labels_csv(path) -> dict[str, tuple[str, float]]:
    """source_id -> (group, cost); group may be empty."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"source_id", "cost"} <= set(reader.fieldnames):
            raise SchemaError(f"{path}: labels need columns source_id and cost")
        for lineno, row in enumerate(reader, start=2):
            try:
                cost = float(row["cost"])
            except ValueError:
                raise SchemaError(f"{path}:{lineno}: cost {row['cost']!r} is not a number") from None
            out[row["source_id"]] = (row.get("group") or "", cost)
    return out


def load_references(path) -> dict[str, GroupReference]:
    """Group references from a reference JSON (one or a list) or a trained cost model."""
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        if isinstance(d, dict) and "groups" in d and "format" in d:
            return {g: GroupReference.from_dict(e["reference"]) for g, e in d["groups"].items()}
        items = d if isinstance(d, list) else [d]
        refs = [GroupReference.from_dict(x) for x in items]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: not a group reference or cost model ({exc})") from None
    return {r.group: r for r in refs}


def write_sidecar(path: Path, qsets: Sequence[QuantitySet], lexicon: Sequence[str]) -> None:
    _write_json(path, {"format": SIDECAR_FORMAT, "lexicon": list(lexicon),
                       "drawings": [q.to_dict() for q in qsets]})


def read_sidecar(path: Path) -> tuple[list[str], dict[str, QuantitySet]]:
    d = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(d, dict) or d.get("format") != SIDECAR_FORMAT:
        raise SchemaError(f"{path}: not a quantities file ({SIDECAR_FORMAT})")
    qsets = [QuantitySet.from_dict(x) for x in d["drawings"]]
    return list(d.get("lexicon", [])), {q.source_id: q for q in qsets}


class Table:
    """A featurized table joined with its quantity sets and targets."""

    def __init__(self, names, vectors, qsets, lexicon):
        self.names = names
        self.vectors = vectors
        self.qsets = qsets
        self.lexicon = lexicon

    @property
    def costs(self) -> np.ndarray:
        return np.array([np.nan if v.cost is None else v.cost for v in self.vectors])

    @property
    def groups(self) -> list[str]:
        return [v.group for v in self.vectors]

    def subset(self, idx) -> "Table":
        return Table(self.names, [self.vectors[i] for i in idx],
                     [self.qsets[i] for i in idx] if self.qsets is not None else None,
                     self.lexicon)


def load_table(csv_path, labels=None, groups=None, need_costs=True, need_quantities=True) -> Table:
    """Read a feature CSV, check its header, attach labels and the quantities sidecar."""
    path = _need_file(csv_path, "feature table")
    try:
        names, vectors = read_feature_csv(path)
    except (ValueError, StopIteration) as exc:
        raise SchemaError(str(exc)) from None
    vocab = [n[4:] for n in names if n.startswith("mat_")]
    if names != feature_names(vocab):
        raise SchemaError(f"{path}: feature columns do not follow the canonical schema")
    if labels:
        lab = read_labels_csv(_need_file(labels, "labels"))
        for v in vectors:
            if v.source_id in lab:
                g, c = lab[v.source_id]
                v.cost = c
                v.group = g or v.group
    if groups:
        vectors = [v for v in vectors if v.group in groups]
    if not vectors:
        raise SchemaError(f"{path}: no rows" + (f" for groups {sorted(groups)}" if groups else ""))
    if need_costs:
        bad = [v.source_id for v in vectors if v.cost is None or not v.cost > 0]
        if bad:
            raise SchemaError(f"{len(bad)} rows lack a positive cost, e.g. {bad[0]!r}")
    qsets, lexicon = None, vocab
    side = sidecar_path(path)
    if need_quantities or side.is_file():
        lexicon, by_id = read_sidecar(_need_file(side, "quantities sidecar"))
        missing = [v.source_id for v in vectors if v.source_id not in by_id]
        if missing:
            raise SchemaError(f"{side}: no quantities for {len(missing)} rows, e.g. {missing[0]!r}")
        qsets = [with_group(by_id[v.source_id], v.group) for v in vectors]
    return Table(names, vectors, qsets, lexicon)


def parse_params(items: Sequence[str] | None, base: dict | None = None) -> dict:
    """``key=value`` booster overrides, values parsed as JSON when possible."""
    allowed = {f.name for f in fields(TrainParams)} | {"metric"}
    out = dict(base or {})
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--param expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = json.loads(v)
        except json.JSONDecodeError:
            out[k.strip()] = v
    unknown = set(out) - allowed
    if unknown:
        raise UsageError(f"unknown booster parameter(s): {', '.join(sorted(unknown))}")
    return out


def _regressor(args) -> GBDTRegressor:
    params = dict(args.params)
    params.setdefault("seed", args.seed)
    try:
        reg = GBDTRegressor(**params)
        reg.train_params()
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad booster parameters: {exc}") from None
    return reg


def _groups(args):
    return set(args.group.split(",")) if getattr(args, "group", None) else None


# ---------------------------------------------------------------------------
# featurize

def _load_one(job):
    path, group, lexicon = job
    try:
        drawing = load_drawing(path, group=group)
    except (DxfParseError, OSError, UnicodeError) as exc:
        return None, [f"{path.name}: {exc}"]
    notes = list(drawing.diagnostics)
    notes += [f"{path.name}: skipped {n} unsupported {kind} entities"
              for kind, n in drawing.skipped]
    return extract_quantities(drawing, lexicon), notes


def cmd_featurize(args) -> int:
    src = _need_dir(args.dxf_dir, "drawing directory")
    out = _out_file(args.out)
    lexicon = load_lexicon(_need_file(args.lexicon, "lexicon")) if args.lexicon else []
    labels = read_labels_csv(_need_file(args.labels, "labels")) if args.labels else {}
    refs = load_references(_need_file(args.reference, "reference")) if args.reference else {}
    files = sorted(p for p in src.iterdir() if p.suffix.lower() == ".dxf" and p.is_file())
    if not files:
        raise FileNotFoundError(f"no .dxf files in {src}")

    jobs = [(p, labels.get(p.stem, (args.group or "", None))[0] or (args.group or ""), lexicon)
            for p in files]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_load_one, jobs, chunksize=16))
    else:
        results = [_load_one(j) for j in jobs]

    qsets, vectors, notes = [], [], []
    for (path, _, _), (qs, msgs) in zip(jobs, results):
        notes += msgs
        if qs is None:
            continue
        ref = refs.get(qs.group)
        if refs and ref is None:
            notes.append(f"{path.name}: no group reference for group {qs.group!r}; distances left empty")
        fv = featurize(qs, ref, vocabulary=ref.vocabulary if ref else lexicon)
        fv.cost = labels[qs.source_id][1] if qs.source_id in labels else None
        qsets.append(qs)
        vectors.append(fv)

    for n in notes:
        log.warning("%s", n)
    if args.log:
        Path(args.log).write_text("".join(n + "\n" for n in notes), encoding="utf-8")
    if not vectors:
        log.error("no drawing could be parsed")
        return EXIT_PARSE
    vocab = []
    for r in refs.values():
        vocab += [m for m in r.vocabulary if m not in vocab]
    vocab += [m for m in lexicon if m not in vocab]
    write_feature_csv(out, vectors, feature_names(vocab))
    write_sidecar(sidecar_path(out), qsets, lexicon)
    log.info("featurized %d of %d drawings into %s", len(vectors), len(files), out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# train / predict / evaluate

def cmd_train(args) -> int:
    table = load_table(args.features, args.labels, _groups(args))
    out = _out_file(args.out)
    ratios = tuple(float(x) for x in args.split.split(","))
    try:
        tr, va, te = split_dataset(len(table.vectors), ratios, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    y = table.costs
    model = CostRegressor(lexicon=tuple(table.lexicon), regressor=_regressor(args), seed=args.seed)
    model.fit([table.qsets[i] for i in tr], y[tr],
              eval_set=([table.qsets[i] for i in va], y[va]) if len(va) else None)
    model.save(out)

    pred = model.predict(table.qsets)
    split_of = np.empty(len(y), dtype=object)
    rows = []
    for name, idx in (("train", tr), ("valid", va), ("test", te)):
        split_of[idx] = name
        if len(idx):
            rows += evaluation_rows(y[idx], pred[idx], [table.groups[i] for i in idx], split=name)
    report = Path(args.report) if args.report else out.with_name(out.stem + ".report.csv")
    write_eval_csv(report, rows)
    preds = Path(args.predictions) if args.predictions else out.with_name(out.stem + ".predictions.csv")
    with open(preds, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source_id", "group", "split", "actual", "predicted"])
        for i, v in enumerate(table.vectors):
            w.writerow([v.source_id, v.group, split_of[i], repr(float(y[i])), repr(float(pred[i]))])
    for r in rows:
        if r.group == "ALL":
            log.info("%-5s n=%d MAE=%.4f MAPE=%.3f%%", r.split, r.n, r.mae, r.mape)
    return EXIT_OK


def _load_model(path) -> CostRegressor:
    p = _need_file(path, "model")
    try:
        return CostRegressor.load(p)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{p}: cannot load cost model ({exc})") from None


def _drivers(model: CostRegressor, group: str, k: int) -> str:
    imp = sorted(split_count_importance(model.gbdt(group)).items(), key=lambda kv: (-kv[1], kv[0]))
    return ";".join(f"{n}:{w:.4f}" for n, w in imp[:k])


def _pick_group(model: CostRegressor, group: str | None) -> str:
    if group:
        if group not in model.models_:
            raise SchemaError(f"model has no group {group!r} (groups: {', '.join(model.groups_)})")
        return group
    if len(model.models_) == 1:
        return model.groups_[0]
    raise UsageError(f"model has groups {', '.join(model.groups_)}; pass --group")


def cmd_predict(args) -> int:
    model = _load_model(args.model)
    inputs = [_need_file(p, "input") for p in args.inputs]
    results = []  # (source_id, group, cost)
    for path in inputs:
        if path.suffix.lower() == ".csv":
            try:
                names, vectors = read_feature_csv(path)
            except ValueError as exc:
                raise SchemaError(str(exc)) from None
            for v in vectors:
                g = _pick_group(model, args.group or v.group or None)
                gm = model.gbdt(g)
                missing = [n for n in gm.schema if n not in names]
                if missing:
                    log.warning("%s: %d model features absent from the table, treated as missing",
                                path, len(missing))
                if all(v.values.get(n) is None for n in gm.schema if n.endswith("_euc_dist")):
                    log.warning("%s: row has no distance features; featurize with "
                                "--reference MODEL to match the model's references", v.source_id)
                results.append((v.source_id, g, gm.predict_row(v.values)))
        else:
            g = _pick_group(model, args.group)
            drawing = load_drawing(path, group=g)
            for d in drawing.diagnostics:
                log.warning("%s", d)
            qs = extract_quantities(drawing, model.lexicon)
            results.append((qs.source_id, g, float(model.predict([qs])[0])))

    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["source_id", "group", "predicted_cost"] + (["drivers"] if args.top_k else []))
        for sid, g, c in results:
            w.writerow([sid, g, repr(c)] + ([_drivers(model, g, args.top_k)] if args.top_k else []))
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _predict_table(model: CostRegressor, table: Table) -> np.ndarray:
    if table.qsets is not None:
        return model.predict(table.qsets)
    pred = np.empty(len(table.vectors))
    for i, v in enumerate(table.vectors):
        pred[i] = model.gbdt(_pick_group(model, v.group)).predict_row(v.values)
    return pred


def cmd_evaluate(args) -> int:
    model = _load_model(args.model)
    table = load_table(args.features, args.labels, _groups(args), need_quantities=False)
    pred = _predict_table(model, table)
    rows = evaluation_rows(table.costs, pred, table.groups, split=args.split_name)
    write_eval_csv(_out_file(args.out), rows)
    if args.scatter:
        write_scatter_csv(_out_file(args.scatter), table.costs, pred, table.groups)
    for r in rows:
        log.info("%s n=%d MAE=%.4f MAPE=%.3f%%", r.group, r.n, r.mae, r.mape)
    return EXIT_OK


# ---------------------------------------------------------------------------
# tune / grid

def cmd_tune(args) -> int:
    table = load_table(args.features, args.labels, _groups(args))
    out = _out_file(args.out)
    est = CostRegressor(lexicon=tuple(table.lexicon), regressor=_regressor(args), seed=args.seed)
    res = random_search(est, table.qsets, table.costs, DEFAULT_SPACE, n_trials=args.trials,
                        k=args.folds, seed=args.seed)
    res.to_csv(out)
    if args.best:
        _write_json(_out_file(args.best), {"params": res.best_params, "cv_mape": res.best_score})
    log.info("best CV MAPE %.3f%% with %s", res.best_score, res.best_params)
    return EXIT_OK


def _floats(s: str) -> list[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def cmd_grid(args) -> int:
    table = load_table(args.features, args.labels, _groups(args))
    out = _out_file(args.out)
    est = CostRegressor(lexicon=tuple(table.lexicon), regressor=_regressor(args), seed=args.seed)
    depths = [int(x) for x in _floats(args.depths)]
    res = grid_search(est, table.qsets, table.costs, depths, _floats(args.lrs),
                      k=args.folds, seed=args.seed)
    res.to_csv(out)
    d, lr, m = res.best
    log.info("best cell max_depth=%d learning_rate=%g mean MAE %.4f", d, lr, m)
    return EXIT_OK


# ---------------------------------------------------------------------------
# explain

def cmd_explain(args) -> int:
    model = _load_model(args.model)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups = [g for g in model.groups_ if not _groups(args) or g in _groups(args)]
    if not groups:
        raise SchemaError("no model groups selected")
    reports = []
    for g in groups:
        rep = ImportanceReport(sorted(split_count_importance(model.gbdt(g)).items(),
                                      key=lambda kv: (-kv[1], kv[0])), "split_count")
        rep.to_csv(out / f"importance_split_count_{g}.csv")
        reports.append(rep)
    average_importance(reports).to_csv(out / "importance_split_count_average.csv")

    if args.features:
        table = load_table(args.features, args.labels, set(groups), need_quantities=False)
        for g in groups:
            idx = [i for i, v in enumerate(table.vectors) if v.group == g]
            if not idx:
                continue
            sub = table.subset(idx)
            gm = model.gbdt(g)
            if sub.qsets is not None:
                X = model.models_[g][0].transform(sub.qsets)
            else:
                X = vectors_to_matrix(sub.vectors, gm.schema)
            y = sub.costs
            permutation_importance(gm, X, y, metric="mae", n_repeats=args.repeats,
                                   seed=args.seed).to_csv(out / f"importance_permutation_{g}.csv")
            tree = fit_cart(X, y, max_depth=args.tree_depth, min_child_samples=args.tree_min_samples)
            dot, text = export_tree(tree, gm.schema, X, y)
            (out / f"tree_{g}.dot").write_text(dot, encoding="utf-8")
            (out / f"tree_{g}.txt").write_text(text, encoding="utf-8")
            if args.shapley_rows:
                feats = _shapley_features(gm, args.shapley_features)
                bg = sample_background(X, size=args.background, seed=args.seed)
                rows = X[: args.shapley_rows]
                shapley_report(gm, rows, bg, feats).to_csv(out / f"importance_shapley_{g}.csv")
    log.info("wrote explanations for %s to %s", ", ".join(groups), out)
    return EXIT_OK


def _shapley_features(gm, limit: int) -> list[int]:
    """Most split-on features, at most ``limit`` of them."""
    imp = split_count_importance(gm)
    index = {n: i for i, n in enumerate(gm.schema)}
    ranked = sorted(imp.items(), key=lambda kv: (-kv[1], kv[0]))
    feats = [index[n] for n, _ in ranked[:limit]]
    return sorted(feats) if feats else used_features(gm)[:limit]


# ---------------------------------------------------------------------------
# synth

def cmd_synth(args) -> int:
    base = dict(args.synth or {})
    base.setdefault("n_drawings", args.n)
    base.setdefault("noise_pct", args.noise)
    base["seed"] = args.seed
    try:
        cfg = SynthConfig.from_dict(base)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad synth settings: {exc}") from None
    samples = generate_corpus(cfg, args.out)
    log.info("wrote %d drawings to %s", len(samples), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice (default 0)")
    common.add_argument("--config", help="JSON file whose keys override the flags")
    common.add_argument("-v", "--verbose", action="store_true")
    common.add_argument("-q", "--quiet", action="store_true")

    booster = argparse.ArgumentParser(add_help=False)
    booster.add_argument("--param", action="append", metavar="KEY=VALUE",
                         help="booster parameter override, repeatable (e.g. max_depth=4)")

    table = argparse.ArgumentParser(add_help=False)
    table.add_argument("features", help="feature CSV written by 'featurize'")
    table.add_argument("--labels", help="labels CSV (source_id, group, cost) overriding the table")
    table.add_argument("--group", help="comma-separated product groups to keep")

    p = argparse.ArgumentParser(prog="cadcost", description="Cost prediction from DXF drawings.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("featurize", parents=[common], help="DXF directory -> feature CSV")
    s.add_argument("dxf_dir")
    s.add_argument("--out", required=True, help="feature CSV; quantities go to <stem>.quantities.json")
    s.add_argument("--lexicon", help="material names, one per line")
    s.add_argument("--labels", help="labels CSV giving group and cost per source_id")
    s.add_argument("--group", help="group for drawings not listed in --labels")
    s.add_argument("--reference", help="group reference JSON or trained model for distance features")
    s.add_argument("--log", help="write per-file diagnostics here")
    s.add_argument("--jobs", type=int, default=1, help="parallel parser processes")
    s.set_defaults(func=cmd_featurize)

    s = sub.add_parser("train", parents=[common, booster, table], help="fit per-group models")
    s.add_argument("--out", required=True, help="model JSON")
    s.add_argument("--split", default="0.7,0.15,0.15", help="train,valid,test ratios")
    s.add_argument("--report", help="metrics CSV (default <model>.report.csv)")
    s.add_argument("--predictions", help="per-row predictions CSV (default <model>.predictions.csv)")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("predict", parents=[common], help="predict cost of drawings or feature rows")
    s.add_argument("model")
    s.add_argument("inputs", nargs="+", help=".dxf files or feature CSVs")
    s.add_argument("--group", help="product group (required for DXF input to multi-group models)")
    s.add_argument("--top-k", type=int, default=0, help="also list the k most split-on features")
    s.add_argument("--out", help="CSV output (default stdout)")
    s.set_defaults(func=cmd_predict)

    s = sub.add_parser("evaluate", parents=[common, table], help="MAE / MAPE of a model on a table")
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True, help="metrics CSV")
    s.add_argument("--scatter", help="actual vs predicted CSV")
    s.add_argument("--split-name", default="test")
    s.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("tune", parents=[common, booster, table], help="random search, k-fold CV MAPE")
    s.add_argument("--out", required=True, help="trial log CSV")
    s.add_argument("--best", help="best parameters JSON")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--folds", type=int, default=5)
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("grid", parents=[common, booster, table],
                       help="max_depth x learning_rate grid, k-fold CV MAE")
    s.add_argument("--out", required=True, help="grid CSV (max_depth, learning_rate, mean_mae)")
    s.add_argument("--depths", default="3,5,7,10")
    s.add_argument("--lrs", default="0.01,0.05,0.1,0.2")
    s.add_argument("--folds", type=int, default=5)
    s.set_defaults(func=cmd_grid)

    s = sub.add_parser("explain", parents=[common], help="importances, surrogate tree, Shapley")
    s.add_argument("model")
    s.add_argument("--features", help="feature CSV for permutation importance and the tree export")
    s.add_argument("--labels")
    s.add_argument("--group", help="comma-separated groups (default all)")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--repeats", type=int, default=5)
    s.add_argument("--tree-depth", type=int, default=3)
    s.add_argument("--tree-min-samples", type=int, default=5)
    s.add_argument("--shapley-rows", type=int, default=0, help="rows to explain with exact Shapley")
    s.add_argument("--shapley-features", type=int, default=8, help="at most 12")
    s.add_argument("--background", type=int, default=64)
    s.set_defaults(func=cmd_explain)

    s = sub.add_parser("synth", parents=[common], help="write a synthetic labeled corpus")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--n", type=int, default=800, help="number of drawings")
    s.add_argument("--noise", type=float, default=0.05, help="relative label noise (std)")
    s.set_defaults(func=cmd_synth)
    return p


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    """Fold ``--config`` JSON into ``args``; the file wins over flags."""
    params = {}
    synth = None
    if args.config:
        cfg = json.loads(_need_file(args.config, "config").read_text(encoding="utf-8"))
        if not isinstance(cfg, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        for key, value in cfg.items():
            dest = key.replace("-", "_")
            if dest == "params":
                params.update(value)
            elif dest == "synth":
                synth = value
            elif dest in ("command", "func", "config") or not hasattr(args, dest):
                raise UsageError(f"{args.config}: unknown option {key!r} for {args.command}")
            else:
                setattr(args, dest, value)
    if hasattr(args, "param"):
        cli_params = parse_params(args.param)
        args.params = parse_params((), {**cli_params, **params})
    args.synth = synth
    return args


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.ERROR if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(message)s", stream=sys.stderr, force=True)
    try:
        args = apply_config(args)
        return args.func(args)
    except UsageError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except DxfParseError as exc:
        log.error("%s", exc)
        return EXIT_PARSE
    except SchemaError as exc:
        log.error("%s", exc)
        return EXIT_SCHEMA
    except (OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    except (KeyError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
