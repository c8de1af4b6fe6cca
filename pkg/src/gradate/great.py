"""Dataset-distance minimization over the sparse probability simplex.

Starting from uniform training weights, each iteration takes a gradient
step along the calibrated OT dual potentials, projects to nonnegativity,
keeps only the top-k entries under a shrinking schedule and renormalizes.
The nonzero indices of the final weight vector are the selected samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalid
from .gdd import LabelInformedCost, OTSolver, gdd_from_cost
from .ot import calibrate_duals

_SNAP_EPS = 1e-9


def _snap(x: float) -> float:
    # Guard floor/ceil against float dust in products like 0.2 * 100.
    r = round(x)
    return float(r) if abs(x - r) <= _SNAP_EPS else x


def floor_budget(n: int, tau: float) -> int:
    """The sparsity budget floor(n * tau)."""
    return int(math.floor(_snap(n * tau)))


def validate_weights(w: np.ndarray, budget: int | None = None) -> np.ndarray:
    """Check the weight-vector invariants: simplex point, sparsity bound."""
    w = np.asarray(w, dtype=np.float64)
    if np.any(w < 0):
        raise ConfigInvalid("weights must be nonnegative")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ConfigInvalid(f"weights sum to {w.sum()!r}, expected 1")
    if budget is not None and np.count_nonzero(w) > budget:
        raise ConfigInvalid(f"support {np.count_nonzero(w)} exceeds budget {budget}")
    return w


@dataclass(frozen=True)
class GreatIteration:
    """One optimization step: distance seen, support kept, move made.

    `weights` is the full weight vector after this step, kept for
    diagnostics and invariant checks.
    """

    t: int
    gdd_value: float
    support_size: int
    step_norm: float
    weights: np.ndarray | None = None
    recovered: bool = False


@dataclass(frozen=True)
class GreatTrace:
    """Per-iteration log plus the final state of the selection run."""

    iterations: tuple[GreatIteration, ...]
    selected: tuple[int, ...]
    final_weights: np.ndarray
    final_gdd: float

    def rows(self) -> list[tuple[int, float, int]]:
        """(t, gdd, support) triplets for CSV-style serialization."""
        return [(it.t, it.gdd_value, it.support_size) for it in self.iterations]


def gdd_gradient(dtilde, w: np.ndarray, solver: OTSolver | None = None) -> np.ndarray:
    """Gradient of the dataset distance in the training weights.

    Solves the outer OT exactly at w and returns the calibrated (zero-sum)
    source dual vector. Zero-weight atoms keep their reduced-cost-feasible
    dual value from the solver, so pruned samples can still be ranked.
    """
    _, sol = gdd_from_cost(dtilde, w, solver)
    return calibrate_duals(sol).dual_source


def sparsity_schedule(n: int, tau: float, T: int, t: int) -> int:
    """Support budget k(t) = n * max(tau, (T-t+1)/(T-1) + tau*t/(T-1)).

    The raw value exceeds n for small t; it is clamped to [ceil(n*tau), n]
    and rounded down. Non-increasing in t.
    """
    if not 0.0 < tau <= 1.0:
        raise ConfigInvalid(f"tau must be in (0, 1], got {tau}")
    if T < 2:
        raise ConfigInvalid(f"T must be >= 2, got {T}")
    if not 1 <= t <= T - 1:
        raise ConfigInvalid(f"iteration t={t} outside [1, {T - 1}]")
    raw = n * max(tau, (T - t + 1) / (T - 1) + tau * t / (T - 1))
    lo = int(math.ceil(_snap(n * tau)))
    return int(math.floor(_snap(min(max(raw, lo), n))))


def _topk_mask(w: np.ndarray, k: int) -> np.ndarray:
    # Stable sort on -w: ties keep the lower index, as required for
    # reproducible selections.
    order = np.argsort(-w, kind="stable")
    mask = np.zeros(len(w), dtype=bool)
    mask[order[:k]] = True
    return mask


def great_select(dtilde, tau: float, T: int, eta: float,
                 solver: OTSolver | None = None) -> tuple[np.ndarray, GreatTrace]:
    """Select training samples by iterative reweighting and sparsification.

    For t = 1..T-1: gradient step w <- max(w - eta * g, 0), keep the k(t)
    largest entries (ties to the lower index), renormalize. A terminal clamp
    to floor(n * tau) entries is applied before extracting the selected
    index set, since the schedule itself never goes below ceil(n * tau).

    If a step annihilates every coordinate (possible only for uncalibrated
    gradients, but handled defensively), the pre-update weights restricted
    to their top-k support are restored and the event is recorded on the
    trace.
    """
    values = dtilde.values if isinstance(dtilde, LabelInformedCost) else np.asarray(dtilde)
    n = values.shape[0]
    if not 0.0 < tau <= 1.0:
        raise ConfigInvalid(f"tau must be in (0, 1], got {tau}")
    if T < 2:
        raise ConfigInvalid(f"T must be >= 2, got {T}")
    if eta < 0:
        raise ConfigInvalid(f"eta must be >= 0, got {eta}")
    budget = floor_budget(n, tau)
    if budget < 1:
        raise ConfigInvalid(f"floor(n * tau) = {budget}; nothing would be selected")

    w = np.full(n, 1.0 / n)
    records: list[GreatIteration] = []
    for t in range(1, T):
        value, sol = gdd_from_cost(values, w, solver)
        grad = calibrate_duals(sol).dual_source
        k = sparsity_schedule(n, tau, T, t)

        updated = np.maximum(w - eta * grad, 0.0)
        recovered = False
        if updated.max() <= 0.0:
            updated = np.where(_topk_mask(w, k), w, 0.0)
            recovered = True
        updated[~_topk_mask(updated, k)] = 0.0
        updated /= updated.sum()

        records.append(GreatIteration(
            t=t,
            gdd_value=value,
            support_size=int(np.count_nonzero(updated)),
            step_norm=float(np.linalg.norm(updated - w)),
            weights=updated.copy(),
            recovered=recovered,
        ))
        w = updated

    if np.count_nonzero(w) > budget:
        w = np.where(_topk_mask(w, budget), w, 0.0)
        w /= w.sum()

    final_value, _ = gdd_from_cost(values, w, solver)
    selected = np.flatnonzero(w)
    trace = GreatTrace(
        iterations=tuple(records),
        selected=tuple(int(i) for i in selected),
        final_weights=w,
        final_gdd=final_value,
    )
    return selected, trace
