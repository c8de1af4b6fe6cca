"""Command-line surface: split, gdd, select.

stdout carries machine-readable JSON only; diagnostics, including the fully
resolved configuration of every run, go to stderr. Exit codes: 0 success,
2 usage or input error, 3 numerical failure (partial output suppressed).

Outputs are byte-reproducible for identical inputs, flags and seed: the
provenance timestamp is derived from the dataset file, not the wall clock.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .errors import ConfigInvalid, GradateError, NonConvergence, NumericalFailure, SchemaError
from .fgw import default_reference_size
from .gdd import LabelInformedCost, cross_linear_fgw, gdd_from_cost, label_informed_cost
from .graphs import concat_datasets, degree_one_hot_features
from .pipeline import SelectionConfig, gradate, lava_select, random_select

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_COMMON_DEFAULTS = {
    "c": 0.0,
    "alpha": 0.5,
    "order": 2,
    "nbar": None,
    "solver": "exact",
    "epsilon": 0.01,
    "seed": 0,
    "jobs": 1,
    "val_labels": True,
}
_SELECT_DEFAULTS = {**_COMMON_DEFAULTS, "method": None, "tau": None, "eta": 1e-4, "T": 10}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradate",
        description="Optimal-transport training-data selection for graph datasets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("split", help="sort by a graph property and split 60/20/20")
    sp.add_argument("dataset", help="TUDataset directory or native .json file")
    sp.add_argument("--by", choices=("density", "size"), default="density")
    sp.add_argument("--out", required=True, help="where to write the split JSON")
    sp.set_defaults(func=cmd_split)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("dataset", help="TUDataset directory or native .json file")
    common.add_argument("split", help="split JSON produced by `gradate split`")
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--c", type=float, default=None, help="label signal strength")
    common.add_argument("--alpha", type=float, default=None, help="FGW trade-off")
    common.add_argument("--order", type=int, default=None, help="FGW distance order r")
    common.add_argument("--nbar", type=int, default=None, help="reference graph size")
    common.add_argument("--solver", choices=("exact", "sinkhorn"), default=None)
    common.add_argument("--epsilon", type=float, default=None, help="sinkhorn regularization")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--jobs", type=int, default=None,
                        help="thread bound for pairwise-distance computation")
    common.add_argument("--cache-dir", default=None,
                        help="distance cache directory (env GRADATE_CACHE_DIR overrides default)")
    common.add_argument("--no-val-labels", dest="val_labels", action="store_const",
                        const=False, default=None,
                        help="ignore validation labels and force c=0")

    gp = sub.add_parser("gdd", parents=[common],
                        help="dataset distance between the train and val splits")
    gp.add_argument("--weights", default=None,
                    help="JSON weight array or selection file over the train split")
    gp.add_argument("--force", action="store_true",
                    help="accept a selection file whose dataset hash disagrees")
    gp.set_defaults(func=cmd_gdd)

    lp = sub.add_parser("select", parents=[common], help="select training data")
    lp.add_argument("--method", choices=("gradate", "lava", "random"), default=None)
    lp.add_argument("--tau", type=float, default=None, help="selection ratio")
    lp.add_argument("--eta", type=float, default=None, help="learning rate")
    lp.add_argument("--T", type=int, default=None, dest="T", help="update steps")
    lp.add_argument("--out", required=True, help="where to write the selection JSON")
    lp.add_argument("--trace", default=None, help="optional per-iteration CSV")
    lp.set_defaults(func=cmd_select)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (NumericalFailure, NonConvergence) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GradateError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


# ---------------------------------------------------------------------------
# config plumbing

def _resolve(args, defaults: dict) -> dict:
    resolved = dict(defaults)
    config_path = getattr(args, "config", None)
    if config_path:
        file_cfg = json.loads(Path(config_path).read_text())
        unknown = set(file_cfg) - set(defaults)
        if unknown:
            raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
        resolved.update(file_cfg)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    resolved["dataset"] = args.dataset
    resolved["split"] = args.split
    return resolved


def _log_config(resolved: dict) -> None:
    print("resolved config: " + json.dumps(resolved, sort_keys=True), file=sys.stderr)


def _selection_config(resolved: dict, tau: float | None = None) -> SelectionConfig:
    return SelectionConfig(
        tau=resolved.get("tau") if tau is None else tau,
        alpha=resolved["alpha"],
        order=resolved["order"],
        c=resolved["c"],
        T=resolved.get("T", 10),
        eta=resolved.get("eta", 1e-4),
        seed=resolved["seed"],
        solver=resolved["solver"],
        epsilon=resolved["epsilon"],
        nbar=resolved["nbar"],
        jobs=resolved["jobs"],
        val_labels_available=resolved["val_labels"],
    )


def _cache_dir(args) -> Path:
    flag = getattr(args, "cache_dir", None)
    raw = flag or os.environ.get("GRADATE_CACHE_DIR") or ".gradate_cache"
    path = Path(raw)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _load_splits(args):
    raw = io.load_dataset(args.dataset)
    split = io.load_split(args.split)
    covered = len(split.train_idx) + len(split.val_idx) + len(split.test_idx)
    if covered != len(raw):
        raise SchemaError(
            f"split covers {covered} graphs but the dataset has {len(raw)}"
        )
    featured = degree_one_hot_features(raw)
    return raw, featured.subset(split.train_idx), featured.subset(split.val_idx)


def _dataset_stamp(dataset_path) -> str:
    """Deterministic provenance timestamp: the dataset's mtime in UTC."""
    mtime = Path(dataset_path).stat().st_mtime
    return _dt.datetime.fromtimestamp(int(mtime), tz=_dt.timezone.utc).isoformat()


def _cached_cost(train, val, cfg: SelectionConfig, cache_dir: Path) -> LabelInformedCost:
    """Cross cost with content-addressed caching of both D and D-tilde."""
    joint = concat_datasets(train, val)
    nbar = cfg.nbar if cfg.nbar is not None else default_reference_size(joint.graphs)
    key_d = {
        "dataset_hash": io.dataset_hash(joint),
        "alpha": cfg.alpha,
        "r": cfg.order,
        "nbar": nbar,
        "seed": cfg.seed,
        "rows": len(train),
        "cols": len(val),
    }
    path_d = cache_dir / io.cache_file_name("D", key_d)
    if path_d.exists():
        D = io.load_matrix_cache(path_d, key_d)
    else:
        D = cross_linear_fgw(train, val, cfg=cfg.fgw_config(), nbar=nbar, jobs=cfg.jobs)
        io.save_matrix_cache(path_d, D, key_d)

    c_eff = cfg.effective_c()
    key_dt = {**key_d, "c": c_eff}
    path_dt = cache_dir / io.cache_file_name("Dtilde", key_dt)
    if path_dt.exists():
        values = io.load_matrix_cache(path_dt, key_dt)
        return LabelInformedCost(values=values, base=D, label_offsets=values - D, c=c_eff)
    dtilde = label_informed_cost(train, val, D, c_eff, cfg.ot_solver())
    io.save_matrix_cache(path_dt, dtilde.values, key_dt)
    return dtilde


def _load_weights(path, n: int, expected_hash: str, force: bool) -> np.ndarray:
    payload = json.loads(Path(path).read_text())
    if isinstance(payload, list):
        w = np.asarray(payload, dtype=np.float64)
        if w.shape != (n,):
            raise SchemaError(f"{path}: {w.shape[0]} weights for {n} training graphs")
        return w
    selection = io.load_selection(path, expected_hash=expected_hash, force=force)
    w = np.zeros(n)
    for i, x in zip(selection.indices, selection.weights):
        if i >= n:
            raise SchemaError(f"{path}: selection index {i} outside the train split")
        w[i] = x
    return w


# ---------------------------------------------------------------------------
# commands

def cmd_split(args) -> int:
    dataset = io.load_dataset(args.dataset)
    split = io.covariate_split(dataset, args.by)
    io.save_split(split, args.out, dataset_digest=io.dataset_hash(dataset))
    print(json.dumps({
        "split": args.out,
        "sizes": {"train": len(split.train_idx), "val": len(split.val_idx),
                  "test": len(split.test_idx)},
    }, sort_keys=True))
    return EXIT_OK


def cmd_gdd(args) -> int:
    resolved = _resolve(args, _COMMON_DEFAULTS)
    _log_config(resolved)
    raw, train, val = _load_splits(args)
    cfg = _selection_config(resolved, tau=1.0)
    dtilde = _cached_cost(train, val, cfg, _cache_dir(args))
    w = None
    if args.weights:
        w = _load_weights(args.weights, len(train), io.dataset_hash(raw), args.force)
    value, _ = gdd_from_cost(dtilde, w, cfg.ot_solver())
    print(json.dumps({"gdd": value, "config": resolved}, sort_keys=True))
    return EXIT_OK


def cmd_select(args) -> int:
    resolved = _resolve(args, _SELECT_DEFAULTS)
    _log_config(resolved)
    if resolved["method"] is None:
        raise ConfigInvalid("--method is required (gradate, lava or random)")
    if resolved["tau"] is None:
        raise ConfigInvalid("--tau is required")
    raw, train, val = _load_splits(args)

    method = resolved["method"]
    if method == "random":
        result = random_select(train, resolved["tau"], resolved["seed"])
    else:
        cfg = _selection_config(resolved)
        dtilde = _cached_cost(train, val, cfg, _cache_dir(args))
        if method == "gradate":
            result = gradate(train, val, cfg, dtilde=dtilde)
        else:
            result = lava_select(train, val, cfg, dtilde=dtilde)

    provenance = dict(result.provenance)
    provenance["config"] = resolved
    provenance["dataset_hash"] = io.dataset_hash(raw)
    result = replace(result, provenance=provenance)
    io.save_selection(result, args.out, created_at=_dataset_stamp(args.dataset))

    if args.trace:
        _write_trace(result, args.trace)
    print(json.dumps({
        "selection": args.out,
        "method": method,
        "n_selected": len(result.indices),
    }, sort_keys=True))
    return EXIT_OK


def _write_trace(result, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "gdd", "support"])
        if result.trace is not None:
            for t, value, support in result.trace.rows():
                writer.writerow([t, repr(value), support])


if __name__ == "__main__":
    sys.exit(main())
