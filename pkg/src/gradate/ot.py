"""Discrete optimal transport between weighted point sets.

Two solvers share one result type: an exact transportation-LP solver that
also returns optimal dual potentials, and an entropic (Sinkhorn) solver with
log-domain potentials. The exact duals are the gradient carrier used by the
selection loop, so their feasibility and strong duality are part of the
contract here, not an afterthought.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import sparse
from scipy.optimize import linprog
from scipy.special import logsumexp

from .errors import InfeasibleMarginals, NonConvergence, NumericalFailure

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True)
class TransportSolution:
    """An OT solution: objective value, primal coupling and dual potentials.

    For the exact solver the duals satisfy beta[i] + psi[j] <= cost[i, j]
    and strong duality p @ beta + q @ psi == value. For Sinkhorn they are the
    converged log-domain potentials.
    """

    value: float
    coupling: np.ndarray
    dual_source: np.ndarray
    dual_target: np.ndarray


def as_cost_matrix(values) -> np.ndarray:
    """Validate and return a dense nonnegative finite cost matrix."""
    cost = np.asarray(values, dtype=np.float64)
    if cost.ndim != 2:
        raise ValueError(f"cost matrix must be 2-D, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise ValueError("cost matrix entries must be finite")
    if np.any(cost < 0):
        raise ValueError("cost matrix entries must be nonnegative")
    return cost


def _check_marginal(v, size: int, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (size,):
        raise InfeasibleMarginals(f"{name} has shape {v.shape}, expected ({size},)")
    if np.any(v < -SIMPLEX_TOL):
        raise InfeasibleMarginals(f"{name} has negative entries")
    if abs(v.sum() - 1.0) > SIMPLEX_TOL:
        raise InfeasibleMarginals(f"{name} sums to {v.sum()!r}, expected 1")
    return np.maximum(v, 0.0)


@lru_cache(maxsize=128)
def _transport_constraints(n: int, m: int):
    """Sparse equality constraints of the (n, m) transportation polytope."""
    rows = sparse.kron(sparse.eye(n), np.ones((1, m)))
    cols = sparse.kron(np.ones((1, n)), sparse.eye(m))
    return sparse.vstack([rows, cols]).tocsc()


def solve_exact_ot(cost, p, q) -> TransportSolution:
    """Exact OT(p, q, cost) via the transportation linear program.

    Returns an optimal basic solution together with optimal dual potentials.
    Zero-mass atoms are dropped before the solve and re-inserted afterwards:
    their coupling rows/columns are zero and their duals are set to the
    tightest reduced-cost-feasible value, so a sparsified training measure
    still yields a full-length, feasible dual vector.
    """
    cost = as_cost_matrix(cost)
    n, m = cost.shape
    p = _check_marginal(p, n, "source marginal p")
    q = _check_marginal(q, m, "target marginal q")

    keep_i = np.flatnonzero(p > 0)
    keep_j = np.flatnonzero(q > 0)
    sub = cost[np.ix_(keep_i, keep_j)]
    ps, qs = p[keep_i], q[keep_j]
    ns, ms = len(keep_i), len(keep_j)

    # Dual simplex guarantees an optimal *basic* solution (a vertex of the
    # transportation polytope) along with exact LP duals.
    res = linprog(
        sub.ravel(),
        A_eq=_transport_constraints(ns, ms),
        b_eq=np.concatenate([ps, qs]),
        bounds=(0, None),
        method="highs-ds",
    )
    if res.status != 0:
        raise NumericalFailure(f"transportation LP failed: {res.message}")

    coupling = np.zeros((n, m))
    coupling[np.ix_(keep_i, keep_j)] = res.x.reshape(ns, ms)
    beta = np.empty(n)
    psi = np.empty(m)
    duals = res.eqlin.marginals
    beta[keep_i] = duals[:ns]
    psi[keep_j] = duals[ns:]
    # Extend duals to zero-mass atoms: columns first against the kept rows,
    # then rows against all columns, so feasibility holds for every pair.
    drop_j = np.flatnonzero(q <= 0)
    if drop_j.size:
        psi[drop_j] = np.min(cost[np.ix_(keep_i, drop_j)] - beta[keep_i, None], axis=0)
    drop_i = np.flatnonzero(p <= 0)
    if drop_i.size:
        beta[drop_i] = np.min(cost[drop_i] - psi[None, :], axis=1)

    return TransportSolution(float(res.fun), coupling, beta, psi)


def solve_sinkhorn(cost, p, q, epsilon: float, max_iter: int = 10_000,
                   tol: float = 1e-9) -> TransportSolution:
    """Entropic OT via log-domain Sinkhorn iterations.

    The reported value is <coupling, cost> without the regularization term;
    dual_source/dual_target are the converged potentials. Raises
    NonConvergence when the marginal violation still exceeds `tol` after
    `max_iter` sweeps.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    cost = as_cost_matrix(cost)
    n, m = cost.shape
    p = _check_marginal(p, n, "source marginal p")
    q = _check_marginal(q, m, "target marginal q")

    keep_i = np.flatnonzero(p > 0)
    keep_j = np.flatnonzero(q > 0)
    sub = cost[np.ix_(keep_i, keep_j)]
    ps, qs = p[keep_i], q[keep_j]
    logp, logq = np.log(ps), np.log(qs)

    f = np.zeros(len(keep_i))
    g = np.zeros(len(keep_j))
    err = np.inf
    for _ in range(max_iter):
        f = -epsilon * (logsumexp((g[None, :] - sub) / epsilon + logq[None, :], axis=1))
        g = -epsilon * (logsumexp((f[:, None] - sub) / epsilon + logp[:, None], axis=0))
        log_pi = (f[:, None] + g[None, :] - sub) / epsilon + logp[:, None] + logq[None, :]
        pi = np.exp(log_pi)
        err = max(np.abs(pi.sum(axis=1) - ps).max(), np.abs(pi.sum(axis=0) - qs).max())
        if err <= tol:
            break
    else:
        raise NonConvergence(
            f"sinkhorn marginal violation {err:.3e} > {tol:.3e} after {max_iter} iterations"
        )

    coupling = np.zeros((n, m))
    coupling[np.ix_(keep_i, keep_j)] = pi
    beta = np.empty(n)
    psi = np.empty(m)
    beta[keep_i] = f
    psi[keep_j] = g
    drop_j = np.flatnonzero(q <= 0)
    if drop_j.size:
        # Soft-min extension of the potentials to unused atoms.
        psi[drop_j] = -epsilon * logsumexp(
            (beta[keep_i, None] - cost[np.ix_(keep_i, drop_j)]) / epsilon
            + logp[:, None], axis=0)
    drop_i = np.flatnonzero(p <= 0)
    if drop_i.size:
        beta[drop_i] = -epsilon * logsumexp(
            (psi[None, :] - cost[drop_i]) / epsilon
            + np.log(np.maximum(q[None, :], 1e-300)), axis=1)

    value = float(np.sum(coupling * cost))
    return TransportSolution(value, coupling, beta, psi)


def calibrate_duals(sol: TransportSolution) -> TransportSolution:
    """Resolve the additive-constant ambiguity of OT duals.

    Shifts dual_source to sum to zero and dual_target oppositely, leaving
    every beta[i] + psi[j] (hence feasibility and strong duality for unit
    masses) unchanged. Primal fields are untouched.
    """
    shift = float(np.mean(sol.dual_source))
    return replace(sol,
                   dual_source=sol.dual_source - shift,
                   dual_target=sol.dual_target + shift)
