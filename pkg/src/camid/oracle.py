"""Reference solver for small identification problems.

The objective is a weighted L1 norm of residuals that are affine in the rule
weights, hence convex, and the feasible set is the probability simplex.  A
projected subgradient method therefore reaches the global minimum; it shares
no machinery with the evolutionary search and serves as its cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import WeightScheme
from .objective import IdentificationProblem

MAX_K = 64


@dataclass
class OracleResult:
    theta: np.ndarray
    objective: float
    iterations: int
    converged: bool


def simplex_project(v) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = 1}`` (sort-based)."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("expected a non-empty 1-D vector")
    if np.all(v >= 0.0) and v.sum() == 1.0:
        return v.copy()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = ind[u - css / ind > 0][-1]
    tau = css[rho - 1] / rho
    return np.maximum(v - tau, 0.0)


def solve_projected_subgradient(
    data,
    max_iter: int = 100_000,
    tol: float = 1e-12,
    step: float = 0.1,
    epoch: int = 1000,
    min_step: float = 1e-10,
    weighting=WeightScheme.RELATIVE,
    problem: IdentificationProblem | None = None,
) -> OracleResult:
    """Minimize the identification objective over the simplex.

    Projected subgradient steps ``c / sqrt(j) * g / |g|`` are taken in epochs
    of ``epoch`` iterations, ``j`` counting from the start of the epoch.
    Each new epoch restarts from the best iterate with ``c`` halved, which
    keeps the error shrinking geometrically on this piecewise-linear
    objective.  The run is converged once ``c`` falls below ``min_step``, or
    earlier when a whole epoch improves the objective by less than ``tol``
    while ``c`` is already below ``sqrt(min_step)``.  Reaching ``max_iter``
    returns the best iterate with ``converged=False``.
    """
    if problem is None:
        problem = IdentificationProblem.from_dataset(data, weighting)
    K = problem.K
    if K > MAX_K:
        raise ValueError(f"oracle is meant for K <= {MAX_K}, got {K}")

    theta = np.full(K, 1.0 / K)
    best, best_J = theta.copy(), problem(theta)
    if K == 1:
        return OracleResult(best, best_J, 0, True)

    c = step
    j = 0
    epoch_start_J = best_J
    for it in range(1, max_iter + 1):
        j += 1
        g = problem.subgradient(theta)
        # only the component tangent to the simplex moves the iterate
        g -= g.mean()
        norm = math.sqrt(float(g @ g))
        if norm == 0.0:
            return OracleResult(theta, problem(theta), it, True)
        theta = simplex_project(theta - (c / math.sqrt(j)) * g / norm)
        J = problem(theta)
        if J < best_J:
            best, best_J = theta.copy(), J
        if j == epoch:
            stalled = epoch_start_J - best_J < tol and c < math.sqrt(min_step)
            c /= 2.0
            if c < min_step or stalled:
                return OracleResult(best, best_J, it, True)
            theta = best.copy()
            j = 0
            epoch_start_J = best_J
    return OracleResult(best, best_J, max_iter, False)
