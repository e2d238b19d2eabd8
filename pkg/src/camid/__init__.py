"""Identification of Bernoulli-measure cellular automata."""

from .lattice import (
    NeighborhoodSpec,
    RuleParams,
    Topology,
    WeightScheme,
    apply_rule,
    d_m,
    d_mk,
    evolve,
    gather_neighborhood,
    neighborhood_offsets,
    neighborhood_size,
)
from .objective import IdentificationProblem, fitness
from .scenario import ObservedDataset, ScenarioSpec, ThetaScheme, add_noise, build_dataset, make_theta
from .sade import SadeConfig, SadeRunResult, Strategy
from .sade import run as run_sade

__version__ = "0.1.0"

__all__ = [
    "IdentificationProblem",
    "NeighborhoodSpec",
    "ObservedDataset",
    "RuleParams",
    "SadeConfig",
    "SadeRunResult",
    "ScenarioSpec",
    "Strategy",
    "ThetaScheme",
    "Topology",
    "WeightScheme",
    "add_noise",
    "apply_rule",
    "build_dataset",
    "d_m",
    "d_mk",
    "evolve",
    "fitness",
    "gather_neighborhood",
    "make_theta",
    "neighborhood_offsets",
    "neighborhood_size",
    "run_sade",
]
