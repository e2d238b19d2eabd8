"""Identification scenarios: ground-truth rules, initial states and noisy observations."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .lattice import (
    NeighborhoodSpec,
    RuleParams,
    Topology,
    evolve,
    offset_distances,
)
from .seeding import derive_seed

__all__ = [
    "ThetaScheme",
    "ScenarioSpec",
    "ObservedDataset",
    "make_theta",
    "random_configuration",
    "add_noise",
    "build_dataset",
    "standard_scenarios",
]


class ThetaScheme(str, enum.Enum):
    RANDOM = "random"
    DISTANCE = "distance"


def make_theta(spec: NeighborhoodSpec, scheme, seed=None) -> RuleParams:
    """Ground-truth rule weights on the simplex.

    ``RANDOM`` normalizes K i.i.d. U[0, 1) draws.  ``DISTANCE`` weights each
    neighbor by ``1 / (1 + d)`` where ``d`` is its distance from the center in
    the topology's metric, then normalizes.
    """
    scheme = ThetaScheme(scheme)
    if scheme is ThetaScheme.DISTANCE:
        raw = 1.0 / (1.0 + offset_distances(spec))
    else:
        rng = np.random.default_rng(seed)
        raw = rng.random(spec.size())
        while raw.sum() <= 0.0:
            raw = rng.random(spec.size())
    return RuleParams(raw / raw.sum(), spec)


def random_configuration(shape, seed) -> np.ndarray:
    return np.random.default_rng(seed).random(shape)


def noise_sigma(traj, snr_db: float) -> float:
    """Noise standard deviation giving ``snr_db`` against the trajectory's mean power."""
    power = float(np.mean(np.square(traj)))
    return math.sqrt(power / 10.0 ** (snr_db / 10.0))


def add_noise(traj, snr_db, seed, clip: bool = True) -> np.ndarray:
    """Add white Gaussian noise at a global SNR (dB) to every cell of every step.

    Signal power is the mean square over the whole trajectory.  With
    ``snr_db=None`` (or +inf) the input is returned unchanged.  Noisy values
    are clamped to [0, 1] unless ``clip`` is false.
    """
    traj = np.asarray(traj, dtype=float)
    if snr_db is None or math.isinf(snr_db) and snr_db > 0:
        return traj.copy()
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or None, got {snr_db!r}")
    sigma = noise_sigma(traj, snr_db)
    noisy = traj + np.random.default_rng(seed).normal(0.0, sigma, size=traj.shape)
    if clip:
        np.clip(noisy, 0.0, 1.0, out=noisy)
    return noisy


@dataclass(frozen=True)
class ScenarioSpec:
    """One identification scenario.

    ``seed`` drives the random rule weights and the noise.  The initial
    configuration comes from ``init_seed`` so that a suite can share one
    ``x(0)`` across scenarios; when omitted it is derived from ``seed``.
    """

    topology: Topology
    radius: int
    theta_scheme: ThetaScheme
    height: int = 51
    width: int = 51
    T: int = 10
    snr_db: float | None = 40.0
    seed: int = 0
    init_seed: int | None = None
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "topology", Topology(self.topology))
        object.__setattr__(self, "theta_scheme", ThetaScheme(self.theta_scheme))
        if self.T < 1:
            raise ValueError("T must be >= 1")
        span = 2 * self.radius + 1
        if self.height < span or self.width < span:
            raise ValueError(
                f"lattice {self.height}x{self.width} too small for radius {self.radius}"
            )
        if self.snr_db is not None and math.isnan(self.snr_db):
            raise ValueError("snr_db must not be NaN")
        if not self.name:
            object.__setattr__(self, "name", self.default_name())

    @property
    def neighborhood(self) -> NeighborhoodSpec:
        return NeighborhoodSpec(self.topology, self.radius)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def default_name(self) -> str:
        return f"{self.topology.value}-r{self.radius}-{self.theta_scheme.value}"

    def resolved_init_seed(self) -> int:
        return self.init_seed if self.init_seed is not None else derive_seed(self.seed, "init")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["topology"] = self.topology.value
        d["theta_scheme"] = self.theta_scheme.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ScenarioSpec:
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown scenario fields: {sorted(unknown)}")
        return cls(**d)


@dataclass(frozen=True, eq=False)
class ObservedDataset:
    spec: ScenarioSpec
    truth: RuleParams
    clean: np.ndarray
    observed: np.ndarray

    @property
    def T(self) -> int:
        return self.observed.shape[0] - 1


def build_dataset(spec: ScenarioSpec) -> ObservedDataset:
    truth = make_theta(spec.neighborhood, spec.theta_scheme, derive_seed(spec.seed, "theta"))
    x0 = random_configuration(spec.shape, spec.resolved_init_seed())
    clean = evolve(x0, truth, spec.T)
    observed = add_noise(clean, spec.snr_db, derive_seed(spec.seed, "noise"))
    for arr in (clean, observed):
        arr.setflags(write=False)
    return ObservedDataset(spec, truth, clean, observed)


def standard_scenarios(height=51, width=51, T=10, snr_db=40.0) -> list[ScenarioSpec]:
    """The twelve scenarios: {Manhattan, Moore} x r in {1, 2, 3} x {random, distance}."""
    return [
        ScenarioSpec(topo, r, scheme, height=height, width=width, T=T, snr_db=snr_db)
        for scheme in ThetaScheme
        for r in (1, 2, 3)
        for topo in Topology
    ]

