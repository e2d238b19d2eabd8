"""Bernoulli-measure cellular automata on a periodic 2-D lattice.

A configuration is a float array of shape ``(height, width)`` whose entries
are the Bernoulli parameters ``p`` of each cell.  Trajectories stack
configurations along a leading time axis.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "Topology",
    "WeightScheme",
    "NeighborhoodSpec",
    "RuleParams",
    "neighborhood_offsets",
    "neighborhood_size",
    "as_configuration",
    "gather_neighborhood",
    "neighborhood_stack",
    "apply_rule",
    "evolve",
    "d_mk",
    "cell_weights",
    "d_m",
]

SIMPLEX_TOL = 1e-9


class Topology(str, enum.Enum):
    MANHATTAN = "manhattan"
    MOORE = "moore"


class WeightScheme(str, enum.Enum):
    """Per-cell weighting used by the configuration distance."""

    RELATIVE = "relative"
    CENTERED = "centered"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Closed ball of radius ``radius`` under the topology's own metric.

    ``radius=0`` is accepted as the degenerate single-cell neighborhood.
    """

    topology: Topology
    radius: int

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        if int(self.radius) != self.radius or self.radius < 0:
            raise ValueError(f"radius must be a non-negative integer, got {self.radius!r}")
        object.__setattr__(self, "radius", int(self.radius))

    def size(self) -> int:
        return neighborhood_size(self)

    def offsets(self) -> list[tuple[int, int]]:
        return neighborhood_offsets(self)


def _distance(topology: Topology, dy: int, dx: int) -> int:
    if topology is Topology.MANHATTAN:
        return abs(dy) + abs(dx)
    return max(abs(dy), abs(dx))


@lru_cache(maxsize=None)
def _offsets(topology: Topology, radius: int) -> tuple[tuple[int, int], ...]:
    r = radius
    return tuple(
        (dy, dx)
        for dy in range(-r, r + 1)
        for dx in range(-r, r + 1)
        if _distance(topology, dy, dx) <= r
    )


def neighborhood_offsets(spec: NeighborhoodSpec) -> list[tuple[int, int]]:
    """Offsets ``(dy, dx)`` of the neighborhood, sorted row-major.

    This ordering fixes the correspondence between rule weights and
    neighbors everywhere in the package.
    """
    return list(_offsets(spec.topology, spec.radius))


def neighborhood_size(spec: NeighborhoodSpec) -> int:
    r = spec.radius
    if spec.topology is Topology.MANHATTAN:
        return 2 * r * r + 2 * r + 1
    return (2 * r + 1) ** 2


def offset_distances(spec: NeighborhoodSpec) -> np.ndarray:
    """Distance of each offset from the center, in the topology's metric."""
    return np.array(
        [_distance(spec.topology, dy, dx) for dy, dx in neighborhood_offsets(spec)],
        dtype=float,
    )


@dataclass(frozen=True, eq=False)
class RuleParams:
    """Convex-combination local rule: one weight per neighborhood offset."""

    weights: np.ndarray
    spec: NeighborhoodSpec

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        k = self.spec.size()
        if w.shape[0] != k:
            raise ValueError(f"expected {k} weights for {self.spec}, got {w.shape[0]}")
        if not np.all(np.isfinite(w)) or np.any(w < 0.0) or np.any(w > 1.0):
            raise ValueError("rule weights must lie in [0, 1]")
        if abs(w.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError(f"rule weights must sum to 1, got {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def K(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def identity(cls, spec: NeighborhoodSpec) -> RuleParams:
        w = np.zeros(spec.size())
        w[neighborhood_offsets(spec).index((0, 0))] = 1.0
        return cls(w, spec)


def as_configuration(x) -> np.ndarray:
    """Validate and return ``x`` as a 2-D float array with entries in [0, 1]."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"configuration must be a non-empty 2-D grid, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("configuration cells must lie in [0, 1]")
    return arr


def gather_neighborhood(cfg, cell: tuple[int, int], spec: NeighborhoodSpec) -> np.ndarray:
    """States of the neighbors of ``cell`` in offset order, wrapping toroidally."""
    cfg = np.asarray(cfg, dtype=float)
    h, w = cfg.shape
    row, col = cell
    if not (0 <= row < h and 0 <= col < w):
        raise IndexError(f"cell {cell} outside {h}x{w} lattice")
    return np.array([cfg[(row + dy) % h, (col + dx) % w] for dy, dx in neighborhood_offsets(spec)])


def neighborhood_stack(cfg: np.ndarray, spec: NeighborhoodSpec) -> np.ndarray:
    """Shifted copies of ``cfg`` (or a trajectory) with the offset on the last axis.

    ``out[..., y, x, k]`` equals the state at ``(y + dy_k, x + dx_k)`` with
    periodic wrap, i.e. the neighborhood vector of every cell at once.
    """
    cfg = np.asarray(cfg, dtype=float)
    axes = (cfg.ndim - 2, cfg.ndim - 1)
    return np.stack(
        [np.roll(cfg, shift=(-dy, -dx), axis=axes) for dy, dx in neighborhood_offsets(spec)],
        axis=-1,
    )


def apply_rule(cfg, rule: RuleParams) -> np.ndarray:
    """One synchronous update ``x_i <- sum_k theta_k N_i[k]`` of every cell."""
    cfg = np.asarray(cfg, dtype=float)
    out = np.zeros_like(cfg)
    # per-cell sum runs sequentially in offset order
    for theta, (dy, dx) in zip(rule.weights, neighborhood_offsets(rule.spec)):
        out += theta * np.roll(cfg, shift=(-dy, -dx), axis=(0, 1))
    return np.clip(out, 0.0, 1.0, out=out)


def evolve(cfg0, rule: RuleParams, steps: int) -> np.ndarray:
    """Trajectory ``[x(0), ..., x(steps)]`` as an array of shape ``(steps+1, H, W)``."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    x = as_configuration(cfg0)
    traj = np.empty((steps + 1,) + x.shape)
    traj[0] = x
    for t in range(steps):
        traj[t + 1] = apply_rule(traj[t], rule)
    return traj


def d_mk(p, q):
    """Monge-Kantorovich distance between Bernoulli(p) and Bernoulli(q)."""
    return np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))


def cell_weights(shape: tuple[int, int], weighting=WeightScheme.RELATIVE) -> np.ndarray:
    """Per-cell weights ``2**-|i|`` of the configuration distance.

    ``|i|`` is built on the Chebyshev distance ``d`` of cell ``i`` from the
    lattice center ``((H-1)/2, (W-1)/2)``; on even dimensions the center falls
    between cells and ``d`` is half-integral.

    ``RELATIVE``
        ``|i| = d / R`` with ``R`` the half-width of the larger lattice side,
        so weights fall from 1 at the center to 1/2 at the border.
    ``CENTERED``
        ``|i| = d`` in cell units; weight halves with every ring.
    ``UNIFORM``
        ``1 / (H*W)`` everywhere.
    """
    h, w = shape
    weighting = WeightScheme(weighting)
    if weighting is WeightScheme.UNIFORM:
        return np.full((h, w), 1.0 / (h * w))
    dy = np.abs(np.arange(h) - (h - 1) / 2.0)
    dx = np.abs(np.arange(w) - (w - 1) / 2.0)
    dist = np.maximum(dy[:, None], dx[None, :])
    if weighting is WeightScheme.RELATIVE:
        half = (max(h, w) - 1) / 2.0
        if half > 0:
            dist = dist / half
    return np.exp2(-dist)


def d_m(x, y, weighting=WeightScheme.RELATIVE) -> float:
    """Weighted sum of per-cell MK distances between two configurations."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 2:
        raise ValueError(f"configurations differ in shape: {x.shape} vs {y.shape}")
    return float(np.sum(cell_weights(x.shape, weighting) * d_mk(x, y)))
