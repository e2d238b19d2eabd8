"""Identification objective.

For a rule ``theta`` the objective sums, over ``t = 0 .. T-1``, the weighted
configuration distance between the observed ``x(t+1)`` and the one-step
prediction obtained by applying ``theta`` to the *observed* ``x(t)``.  The
prediction is linear in ``theta``, so the whole dataset collapses to a design
matrix ``A`` (one row per cell and step, one column per neighbor), a target
vector ``y`` and row weights ``w``::

    J(theta) = sum_j w_j * |y_j - A_j . theta|
"""

from __future__ import annotations

import numpy as np

from .lattice import NeighborhoodSpec, RuleParams, WeightScheme, apply_rule, cell_weights, d_m, neighborhood_stack


class IdentificationProblem:
    """Precomputed design matrix of a dataset for fast repeated evaluation."""

    def __init__(self, observed, spec: NeighborhoodSpec, weighting=WeightScheme.RELATIVE):
        observed = np.asarray(observed, dtype=float)
        if observed.ndim != 3 or observed.shape[0] < 2:
            raise ValueError("observed trajectory must have shape (T+1, H, W) with T >= 1")
        self.spec = spec
        self.weighting = WeightScheme(weighting)
        self.K = spec.size()
        steps, h, w = observed.shape[0] - 1, observed.shape[1], observed.shape[2]
        self.A = np.ascontiguousarray(neighborhood_stack(observed[:-1], spec).reshape(-1, self.K))
        self.y = observed[1:].reshape(-1).copy()
        self.w = np.tile(cell_weights((h, w), self.weighting).reshape(-1), steps)

    @classmethod
    def from_dataset(cls, data, weighting=WeightScheme.RELATIVE):
        return cls(data.observed, data.spec.neighborhood, weighting)

    @classmethod
    def from_arrays(cls, A, y, w) -> IdentificationProblem:
        """Problem with an explicit design matrix, targets and row weights."""
        self = cls.__new__(cls)
        self.A = np.ascontiguousarray(A, dtype=float)
        self.y = np.asarray(y, dtype=float).reshape(-1)
        self.w = np.asarray(w, dtype=float).reshape(-1)
        if self.A.ndim != 2 or not (self.A.shape[0] == self.y.size == self.w.size):
            raise ValueError("A must be (N, K) with y and w of length N")
        self.spec = None
        self.weighting = None
        self.K = self.A.shape[1]
        return self

    def _check(self, theta: np.ndarray):
        if theta.shape[-1] != self.K:
            raise ValueError(f"expected {self.K} rule weights, got {theta.shape[-1]}")

    def __call__(self, theta) -> float:
        theta = np.asarray(theta, dtype=float)
        self._check(theta)
        return float(self.w @ np.abs(self.y - self.A @ theta))

    def batch(self, thetas) -> np.ndarray:
        """Objective of each row of ``thetas`` (shape ``(n, K)``)."""
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        self._check(thetas)
        resid = self.A @ thetas.T
        resid -= self.y[:, None]
        np.abs(resid, out=resid)
        return self.w @ resid

    def subgradient(self, theta) -> np.ndarray:
        """A subgradient of J at ``theta``; ``sign(0)`` is taken as 0."""
        theta = np.asarray(theta, dtype=float)
        return -(self.A.T @ (self.w * np.sign(self.y - self.A @ theta)))


def fitness(theta, data, weighting=WeightScheme.RELATIVE) -> float:
    """Objective of ``theta`` on a dataset, evaluated step by step.

    Slower than :class:`IdentificationProblem` but written directly in terms
    of the forward model and the configuration distance.
    """
    spec = data.spec.neighborhood
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (spec.size(),):
        raise ValueError(f"expected {spec.size()} rule weights, got shape {theta.shape}")
    rule = RuleParams(theta, spec)
    obs = data.observed
    return float(sum(d_m(obs[t + 1], apply_rule(obs[t], rule), weighting) for t in range(len(obs) - 1)))
