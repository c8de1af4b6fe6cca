"""End-to-end training-data selectors.

Three methods share one result schema: the iterative reweighting selector,
a one-shot ranking by calibrated duals, and a seeded random baseline.
Downstream consumers cannot distinguish them except by the method field.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np

from .errors import ConfigInvalid, DimensionMismatch, EmptyDataset
from .fgw import FGWConfig
from .gdd import cross_linear_fgw, label_informed_cost
from .graphs import LabeledGraphDataset, concat_datasets, degree_one_hot_features
from .great import GreatTrace, floor_budget, great_select
from .io import dataset_hash
from .ot import calibrate_duals, solve_exact_ot, solve_sinkhorn


@dataclass(frozen=True)
class SelectionConfig:
    """Everything a selection run needs, serializable for provenance.

    tau : fraction of training samples to keep (budget floor(n * tau)).
    alpha : FGW feature/structure trade-off.
    order : FGW distance order r.
    c : label signal strength in the dataset distance.
    T : number of update steps (T - 1 gradient iterations).
    eta : learning rate of the weight updates.
    solver : "exact" for LP duals, "sinkhorn" for entropic acceleration.
    val_labels_available : when False, c is forced to 0 and validation
        labels are ignored entirely.
    """

    tau: float
    alpha: float = 0.5
    order: int = 2
    c: float = 0.0
    T: int = 10
    eta: float = 1e-4
    seed: int = 0
    solver: str = "exact"
    epsilon: float = 0.01
    nbar: int | None = None
    fgw_max_iter: int = 200
    inner_tol: float = 1e-9
    jobs: int = 1
    val_labels_available: bool = True

    def __post_init__(self):
        if not 0.0 < self.tau <= 1.0:
            raise ConfigInvalid(f"tau must be in (0, 1], got {self.tau}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigInvalid(f"alpha must be in [0, 1], got {self.alpha}")
        if self.order < 1:
            raise ConfigInvalid(f"order must be >= 1, got {self.order}")
        if self.c < 0:
            raise ConfigInvalid(f"c must be >= 0, got {self.c}")
        if self.T < 2:
            raise ConfigInvalid(f"T must be >= 2, got {self.T}")
        if self.eta < 0:
            raise ConfigInvalid(f"eta must be >= 0, got {self.eta}")
        if self.solver not in ("exact", "sinkhorn"):
            raise ConfigInvalid(f"solver must be 'exact' or 'sinkhorn', got {self.solver!r}")
        if self.solver == "sinkhorn" and self.epsilon <= 0:
            raise ConfigInvalid("sinkhorn epsilon must be positive")
        if self.jobs < 1:
            raise ConfigInvalid(f"jobs must be >= 1, got {self.jobs}")

    def fgw_config(self) -> FGWConfig:
        return FGWConfig(alpha=self.alpha, order=self.order,
                         max_iter=self.fgw_max_iter, inner_tol=self.inner_tol,
                         seed=self.seed)

    def ot_solver(self):
        if self.solver == "sinkhorn":
            return partial(solve_sinkhorn, epsilon=self.epsilon)
        return solve_exact_ot

    def effective_c(self) -> float:
        return self.c if self.val_labels_available else 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SelectionResult:
    """A selected training subset with its weights and provenance.

    indices are sorted positions into the training dataset; weights align
    with them and sum to one.
    """

    indices: tuple[int, ...]
    weights: tuple[float, ...]
    method: str
    trace: GreatTrace | None = field(default=None, compare=False)
    provenance: dict = field(default_factory=dict, compare=False)


def _prepare_features(train: LabeledGraphDataset, val: LabeledGraphDataset):
    """Synthesize degree features jointly when both sides are featureless."""
    if train.feature_dim == 0 and val.feature_dim == 0:
        merged = degree_one_hot_features(concat_datasets(train, val))
        return merged.subset(range(len(train))), merged.subset(range(len(train), len(merged)))
    if train.feature_dim != val.feature_dim:
        raise DimensionMismatch(
            f"train has feature dimension {train.feature_dim}, val {val.feature_dim}"
        )
    return train, val


def _build_cost(train, val, cfg: SelectionConfig):
    featured_train, featured_val = _prepare_features(train, val)
    fgw_cfg = cfg.fgw_config()
    D = cross_linear_fgw(featured_train, featured_val, cfg=fgw_cfg,
                         nbar=cfg.nbar, jobs=cfg.jobs)
    return label_informed_cost(featured_train, featured_val, D,
                               cfg.effective_c(), cfg.ot_solver())


def _provenance(train, val, cfg_dict: dict) -> dict:
    return {
        "config": cfg_dict,
        "train_hash": dataset_hash(train),
        "val_hash": dataset_hash(val),
    }


def _check_budget(n: int, tau: float) -> int:
    budget = floor_budget(n, tau)
    if budget < 1:
        raise ConfigInvalid(f"floor({n} * {tau}) = 0; nothing would be selected")
    return budget


def gradate(train: LabeledGraphDataset, val: LabeledGraphDataset,
            cfg: SelectionConfig, dtilde=None) -> SelectionResult:
    """Select the training subset that minimizes the dataset distance.

    Builds the joint barycenter and the label-informed cost once, then runs
    the iterative reweighting loop and returns the nonzero support of the
    final weights, with the optimization trace attached. A precomputed
    label-informed cost (for instance from the CLI cache) can be passed as
    `dtilde` to skip the embedding stage.
    """
    if len(train) == 0 or len(val) == 0:
        raise EmptyDataset("train and val must both be nonempty")
    _check_budget(len(train), cfg.tau)
    if dtilde is None:
        dtilde = _build_cost(train, val, cfg)
    selected, trace = great_select(dtilde, cfg.tau, cfg.T, cfg.eta, cfg.ot_solver())
    return SelectionResult(
        indices=tuple(int(i) for i in selected),
        weights=tuple(float(x) for x in trace.final_weights[selected]),
        method="gradate",
        trace=trace,
        provenance=_provenance(train, val, cfg.to_dict()),
    )


def lava_select(train: LabeledGraphDataset, val: LabeledGraphDataset,
                cfg: SelectionConfig, dtilde=None) -> SelectionResult:
    """One-shot selection by calibrated duals at uniform weights.

    Solves a single OT between the uniform train and val measures, ranks
    training samples by calibrated dual ascending (ties to the lower index)
    and keeps the floor(n * tau) smallest. No iteration.
    """
    if len(train) == 0 or len(val) == 0:
        raise EmptyDataset("train and val must both be nonempty")
    n = len(train)
    budget = _check_budget(n, cfg.tau)
    if dtilde is None:
        dtilde = _build_cost(train, val, cfg)
    solver = cfg.ot_solver()
    sol = solver(dtilde.values, np.full(n, 1.0 / n), np.full(len(val), 1.0 / len(val)))
    ranking = np.argsort(calibrate_duals(sol).dual_source, kind="stable")
    indices = sorted(int(i) for i in ranking[:budget])
    return SelectionResult(
        indices=tuple(indices),
        weights=tuple(1.0 / budget for _ in indices),
        method="lava",
        trace=None,
        provenance=_provenance(train, val, cfg.to_dict()),
    )


def random_select(train: LabeledGraphDataset, tau: float, seed: int) -> SelectionResult:
    """Uniform sample without replacement of floor(n * tau) indices."""
    n = len(train)
    if n == 0:
        raise EmptyDataset("train must be nonempty")
    budget = _check_budget(n, tau)
    rng = np.random.default_rng(seed)
    indices = sorted(int(i) for i in rng.choice(n, size=budget, replace=False))
    return SelectionResult(
        indices=tuple(indices),
        weights=tuple(1.0 / budget for _ in indices),
        method="random",
        trace=None,
        provenance={
            "config": {"tau": tau, "seed": seed},
            "train_hash": dataset_hash(train),
        },
    )
