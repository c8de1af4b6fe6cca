"""Label-informed distance between labeled graph datasets.

The dataset distance is an optimal transport problem whose ground cost is
the LinearFGW block between training and validation graphs, optionally
shifted per label pair by a graph-label distance: the OT distance between
the label-specific uniform measures over graphs, using the same LinearFGW
block as cost. With label weight c=0 the label structure drops out exactly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import AllZeroWeights, DimensionMismatch, EmptyClass, EmptyDataset, ConfigInvalid
from .fgw import FGWConfig, fgw_barycenter
from .graphs import LabeledGraphDataset, concat_datasets
from .linear_fgw import embed_all, linear_fgw_distance
from .ot import TransportSolution, solve_exact_ot

OTSolver = Callable[[np.ndarray, np.ndarray, np.ndarray], TransportSolution]


@dataclass(frozen=True)
class LabelDistanceTable:
    """Pairwise OT distances between train-side and val-side label measures.

    values[a, b] is the distance between the measure of train graphs with
    label labels[a] and val graphs with label labels[b]. Pairs with an empty
    class on either side are flagged absent (NaN + mask), never zero.
    """

    values: np.ndarray
    present: np.ndarray
    labels: tuple

    def get(self, y, y_prime) -> float:
        """Entry lookup; absent entries fall back to the pessimistic penalty.

        The penalty is the maximum finite entry of the table, which keeps
        cost construction total without inventing affinity between classes
        that were never observed together.
        """
        a = self.labels.index(y)
        b = self.labels.index(y_prime)
        if self.present[a, b]:
            return float(self.values[a, b])
        if not self.present.any():
            raise EmptyClass(y, "train")
        penalty = float(np.nanmax(self.values))
        warnings.warn(
            f"label pair ({y!r}, {y_prime!r}) has an empty class; "
            f"using penalty {penalty:.6g}",
            RuntimeWarning, stacklevel=2,
        )
        return penalty


@dataclass(frozen=True)
class LabelInformedCost:
    """Cross cost D-tilde = base LinearFGW block + c * label offsets."""

    values: np.ndarray
    base: np.ndarray
    label_offsets: np.ndarray
    c: float

    @property
    def shape(self):
        return self.values.shape


def cross_linear_fgw(train: LabeledGraphDataset, val: LabeledGraphDataset,
                     cfg: FGWConfig | None = None, nbar: int | None = None,
                     jobs: int = 1) -> np.ndarray:
    """Train-by-val LinearFGW block against one joint reference.

    The barycenter is built from train and val together so both sides live
    in the same embedding space; splitting the reference per side would make
    the block meaningless.
    """
    if len(train) == 0 or len(val) == 0:
        raise EmptyDataset("both datasets must be nonempty")
    cfg = cfg or FGWConfig()
    joint = concat_datasets(train, val)
    reference = fgw_barycenter(joint.graphs, nbar=nbar, cfg=cfg, jobs=jobs)
    embeddings = embed_all(joint.graphs, reference, cfg, jobs=jobs)
    n = len(train)
    D = np.empty((n, len(val)))
    for i in range(n):
        for j in range(len(val)):
            D[i, j] = linear_fgw_distance(embeddings[i], embeddings[n + j], cfg.alpha)
    return D


def graph_label_distance(train: LabeledGraphDataset, val: LabeledGraphDataset,
                         D: np.ndarray, y, y_prime,
                         solver: OTSolver | None = None) -> float:
    """OT distance between the label-y train measure and label-y' val measure.

    Both measures are uniform over their class members; the cost is the
    matching sub-block of the cross LinearFGW matrix D.
    """
    solver = solver or solve_exact_ot
    rows = train.indices_with_label(y)
    cols = val.indices_with_label(y_prime)
    if not rows:
        raise EmptyClass(y, "train")
    if not cols:
        raise EmptyClass(y_prime, "val")
    sub = D[np.ix_(rows, cols)]
    p = np.full(len(rows), 1.0 / len(rows))
    q = np.full(len(cols), 1.0 / len(cols))
    return solver(sub, p, q).value


def label_distance_table(train: LabeledGraphDataset, val: LabeledGraphDataset,
                         D: np.ndarray,
                         solver: OTSolver | None = None) -> LabelDistanceTable:
    """All label-pair distances, computed once and reused across cost builds."""
    labels = tuple(sorted(set(train.label_set) | set(val.label_set)))
    k = len(labels)
    values = np.full((k, k), np.nan)
    present = np.zeros((k, k), dtype=bool)
    for a, y in enumerate(labels):
        if not train.indices_with_label(y):
            continue
        for b, y_prime in enumerate(labels):
            if not val.indices_with_label(y_prime):
                continue
            values[a, b] = graph_label_distance(train, val, D, y, y_prime, solver)
            present[a, b] = True
    return LabelDistanceTable(values=values, present=present, labels=labels)


def label_informed_cost(train: LabeledGraphDataset, val: LabeledGraphDataset,
                        D: np.ndarray, c: float,
                        solver: OTSolver | None = None) -> LabelInformedCost:
    """Shift every (i, j) entry of D by c times its label-pair distance.

    With c=0 the result is bit-identical to D and no label distance is ever
    computed, so unlabeled validation data degrades gracefully.
    """
    if c < 0:
        raise ConfigInvalid(f"label weight c must be >= 0, got {c}")
    D = np.asarray(D, dtype=np.float64)
    if D.shape != (len(train), len(val)):
        raise DimensionMismatch(
            f"D has shape {D.shape}, expected ({len(train)}, {len(val)})"
        )
    if c == 0:
        return LabelInformedCost(values=D.copy(), base=D.copy(),
                                 label_offsets=np.zeros_like(D), c=0.0)
    table = label_distance_table(train, val, D, solver)
    offsets = np.empty_like(D)
    for i, y in enumerate(train.labels):
        for j, y_prime in enumerate(val.labels):
            offsets[i, j] = c * table.get(y, y_prime)
    return LabelInformedCost(values=D + offsets, base=D.copy(),
                             label_offsets=offsets, c=float(c))


def gdd_from_cost(dtilde, w: np.ndarray | None = None,
                  solver: OTSolver | None = None) -> tuple[float, TransportSolution]:
    """Dataset distance given a prebuilt label-informed cost.

    Solves OT(p(w), uniform, D-tilde) where w defaults to uniform over the
    training rows. This is the only piece re-solved inside the selection
    loop; the cost itself is built once.
    """
    solver = solver or solve_exact_ot
    values = dtilde.values if isinstance(dtilde, LabelInformedCost) else np.asarray(dtilde)
    n, m = values.shape
    if w is None:
        w = np.full(n, 1.0 / n)
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (n,):
        raise DimensionMismatch(f"weights have shape {w.shape}, expected ({n},)")
    if np.max(w, initial=0.0) <= 0.0:
        raise AllZeroWeights("the training weight vector carries no mass")
    q = np.full(m, 1.0 / m)
    sol = solver(values, w, q)
    return sol.value, sol


def gdd(train: LabeledGraphDataset, val: LabeledGraphDataset,
        w: np.ndarray | None = None, c: float = 0.0,
        cfg: FGWConfig | None = None, nbar: int | None = None,
        jobs: int = 1, solver: OTSolver | None = None) -> tuple[float, TransportSolution]:
    """Graph dataset distance between a weighted train set and a val set.

    End-to-end: joint barycenter, LinearFGW cross block, label-informed
    shift, outer OT. The returned solution carries the dual potentials that
    act as the gradient of the distance in the training weights.
    """
    cfg = cfg or FGWConfig()
    D = cross_linear_fgw(train, val, cfg=cfg, nbar=nbar, jobs=jobs)
    dtilde = label_informed_cost(train, val, D, c, solver)
    return gdd_from_cost(dtilde, w, solver)
