"""Self-adaptive differential evolution over the probability simplex.

Each generation every candidate picks one of four mutation strategies by
stochastic universal sampling, builds a mutant, applies binomial crossover
(except for current-to-rand/1, whose arithmetic recombination replaces it),
is repaired onto the simplex and then competes greedily with its parent.
Strategy probabilities and per-strategy crossover-rate medians are learnt
from the success/failure record of the last ``LP`` generations.

Generations are synchronous: all trials of a generation are built from the
population as it stood at the start of that generation, then evaluated
together.  Every random draw of a generation comes from one stream in a
fixed order, so results depend only on the seed.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .lattice import RuleParams
from .objective import IdentificationProblem

__all__ = [
    "Strategy",
    "SadeConfig",
    "StrategyState",
    "SadeRunResult",
    "select_strategies",
    "mutate",
    "crossover",
    "repair",
    "update_adaptation",
    "run",
]

EPSILON = 0.01
FEASIBILITY_TOL = 1e-9
N_NEIGHBOURS = 5


class Strategy(enum.IntEnum):
    RAND_1 = 0
    RAND_TO_BEST_2 = 1
    RAND_2 = 2
    CURRENT_TO_RAND_1 = 3

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    Strategy.RAND_1: "rand/1",
    Strategy.RAND_TO_BEST_2: "rand-to-best/2",
    Strategy.RAND_2: "rand/2",
    Strategy.CURRENT_TO_RAND_1: "current-to-rand/1",
}
N_STRATEGIES = len(Strategy)


@dataclass(frozen=True)
class SadeConfig:
    NP: int = 100
    LP: int = 50
    G_max: int = 500
    F_mean: float = 0.5
    F_spread: float = 0.3
    CR_init: float = 0.5
    CR_spread: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.NP < N_NEIGHBOURS + 1:
            raise ValueError(f"NP must be >= {N_NEIGHBOURS + 1}, got {self.NP}")
        if self.LP < 1:
            raise ValueError(f"LP must be >= 1, got {self.LP}")
        if self.G_max < 1:
            raise ValueError(f"G_max must be >= 1, got {self.G_max}")
        if self.F_spread < 0 or self.CR_spread < 0:
            raise ValueError("spreads must be non-negative")
        if not 0.0 <= self.CR_init <= 1.0:
            raise ValueError("CR_init must lie in [0, 1]")


@dataclass
class StrategyState:
    """Adaptive state of the strategy pool.

    ``successes``/``failures`` hold per-generation count vectors and
    ``cr_memory`` per-generation lists of successful CR values, each limited to
    the last ``LP`` generations.
    """

    LP: int
    probabilities: np.ndarray = field(default_factory=lambda: np.full(N_STRATEGIES, 1.0 / N_STRATEGIES))
    crm: np.ndarray = field(default_factory=lambda: np.full(N_STRATEGIES, 0.5))
    successes: deque = None
    failures: deque = None
    cr_memory: deque = None

    def __post_init__(self):
        self.successes = deque(maxlen=self.LP)
        self.failures = deque(maxlen=self.LP)
        self.cr_memory = deque(maxlen=self.LP)


@dataclass(frozen=True)
class GenerationRecord:
    """Outcome of one generation, per strategy."""

    successes: np.ndarray
    failures: np.ndarray
    success_crs: tuple  # one array of CR values per strategy


@dataclass
class SadeRunResult:
    best_theta: RuleParams
    best_fitness: float
    fitness_trace: np.ndarray
    strategy_prob_trace: np.ndarray
    cvr_trace: np.ndarray
    evaluations: int
    seed: int
    config: SadeConfig = None


def select_strategies(probabilities, n: int, rng: np.random.Generator) -> np.ndarray:
    """Stochastic universal sampling of ``n`` strategy ids.

    One spin places ``n`` equally spaced pointers on the cumulative
    distribution, so each strategy is drawn ``floor`` or ``ceil`` of
    ``n * p`` times.  The draws are shuffled before being handed to
    candidates.
    """
    p = np.asarray(probabilities, dtype=float)
    cum = np.cumsum(p)
    cum[-1] = np.inf
    pointers = (rng.random() + np.arange(n)) / n * p.sum()
    picks = np.searchsorted(cum, pointers, side="right")
    return rng.permutation(picks)


def mutate(strategy, population, i, best, f, f_rec, r) -> np.ndarray:
    """Mutant vectors for candidates ``i`` (arrays, one entry per candidate).

    ``r`` has shape ``(n, 5)`` and holds the sampled neighbor indices,
    ``best`` is the best vector, ``f`` the scale factors and ``f_rec`` the
    recombination coefficients used by current-to-rand/1.
    """
    pop = np.asarray(population, dtype=float)
    strategy = np.atleast_1d(strategy)
    i = np.atleast_1d(i)
    r = np.atleast_2d(r)
    f = np.atleast_1d(np.asarray(f, dtype=float))[:, None]
    f_rec = np.atleast_1d(np.asarray(f_rec, dtype=float))[:, None]
    best = np.asarray(best, dtype=float)
    x = pop[i]
    x1, x2, x3, x4, x5 = (pop[r[:, j]] for j in range(N_NEIGHBOURS))

    out = np.empty_like(x)
    s = strategy[:, None]
    np.copyto(out, x1 + f * (x2 - x3), where=s == Strategy.RAND_1)
    np.copyto(out, x + f * (best - x) + f * (x1 - x2) + f * (x3 - x4), where=s == Strategy.RAND_TO_BEST_2)
    np.copyto(out, x1 + f * (x2 - x3) + f * (x4 - x5), where=s == Strategy.RAND_2)
    np.copyto(out, x + f_rec * (x1 - x) + f * (x2 - x3), where=s == Strategy.CURRENT_TO_RAND_1)
    return out


def crossover(trial, target, cr, k_rand, rng, strategy=None) -> np.ndarray:
    """Binomial crossover of mutants with their targets, row-wise.

    A component comes from the mutant when its coin is below ``cr`` or it
    sits at ``k_rand``.  Rows using current-to-rand/1 pass through untouched.
    """
    trial = np.atleast_2d(np.asarray(trial, dtype=float))
    target = np.atleast_2d(np.asarray(target, dtype=float))
    n, k = trial.shape
    cr = np.broadcast_to(np.asarray(cr, dtype=float), (n,))
    k_rand = np.broadcast_to(np.asarray(k_rand), (n,))
    coins = rng.random((n, k))
    take = (coins < cr[:, None]) | (np.arange(k)[None, :] == k_rand[:, None])
    if strategy is not None:
        take |= (np.broadcast_to(np.asarray(strategy), (n,)) == Strategy.CURRENT_TO_RAND_1)[:, None]
    return np.where(take, trial, target)


def repair(vectors):
    """Clamp to [0, 1] then rescale to unit sum, row-wise.

    Returns the repaired rows and a flag per row telling whether it was
    infeasible before repair (a component outside [0, 1] or a sum off by
    more than 1e-9).  A row that clamps to all zeros becomes uniform.
    """
    v = np.asarray(vectors, dtype=float)
    single = v.ndim == 1
    v = np.atleast_2d(v)
    clamped = np.clip(v, 0.0, 1.0)
    out_of_bounds = np.any(clamped != v, axis=1)
    sums = clamped.sum(axis=1)
    infeasible = out_of_bounds | (np.abs(v.sum(axis=1) - 1.0) > FEASIBILITY_TOL)
    zero = sums <= 0.0
    if np.any(zero):
        clamped[zero] = 1.0
        sums[zero] = clamped.shape[1]
        infeasible |= zero
    repaired = clamped / sums[:, None]
    if single:
        return repaired[0], bool(infeasible[0])
    return repaired, infeasible


def update_adaptation(state: StrategyState, record: GenerationRecord) -> StrategyState:
    """Fold one generation into the memories and, once ``LP`` generations
    are held, recompute the strategy probabilities and CR medians."""
    state.successes.append(np.asarray(record.successes, dtype=float))
    state.failures.append(np.asarray(record.failures, dtype=float))
    state.cr_memory.append(record.success_crs)
    if len(state.successes) < state.LP:
        return state

    ns = np.sum(state.successes, axis=0)
    nf = np.sum(state.failures, axis=0)
    total = ns + nf
    rate = np.divide(ns, total, out=np.zeros_like(ns), where=total > 0) + EPSILON
    state.probabilities = rate / rate.sum()

    for k in range(N_STRATEGIES):
        crs = [gen[k] for gen in state.cr_memory if len(gen[k])]
        if crs:
            state.crm[k] = float(np.median(np.concatenate(crs)))
    return state


def _truncated_normal(rng, mean, sd, n, lo, hi, lo_open=False):
    """Normal draws redrawn until they fall in [lo, hi] (or (lo, hi])."""
    mean = np.broadcast_to(np.asarray(mean, dtype=float), (n,))
    x = rng.normal(mean, sd)

    def bad(v):
        return (v <= lo if lo_open else v < lo) | (v > hi)

    mask = bad(x)
    while np.any(mask):
        x[mask] = rng.normal(mean[mask], sd)
        mask = bad(x)
    return x


def _frozen(a: np.ndarray) -> np.ndarray:
    v = a.view()
    v.flags.writeable = False
    return v


def _sample_neighbours(rng, n: int) -> np.ndarray:
    """Five distinct indices per candidate, all different from the candidate."""
    keys = rng.random((n, n))
    np.fill_diagonal(keys, np.inf)
    return np.argsort(keys, axis=1, kind="stable")[:, :N_NEIGHBOURS]


def run(data, cfg: SadeConfig | None = None, problem: IdentificationProblem | None = None,
        callback=None) -> SadeRunResult:
    """Identify the rule weights of ``data`` (an :class:`ObservedDataset`).

    ``problem`` may carry a precomputed objective (for instance with a
    non-default weighting).  ``callback(generation, population, fitness)``
    is called after every generation with read-only views.
    """
    cfg = cfg or SadeConfig()
    if problem is None:
        problem = IdentificationProblem.from_dataset(data)
    spec = data.spec.neighborhood
    K = problem.K
    rng = np.random.default_rng(cfg.seed)

    if K == 1:
        theta = np.ones(1)
        J = problem(theta)
        return SadeRunResult(
            best_theta=RuleParams(theta, spec),
            best_fitness=J,
            fitness_trace=np.array([J]),
            strategy_prob_trace=np.full((1, N_STRATEGIES), 1.0 / N_STRATEGIES),
            cvr_trace=np.zeros((1, N_STRATEGIES)),
            evaluations=1,
            seed=cfg.seed,
            config=cfg,
        )

    NP = cfg.NP
    pop, _ = repair(rng.random((NP, K)))
    fit = problem.batch(pop)
    evaluations = NP
    b = int(np.argmin(fit))
    best, best_fit = pop[b].copy(), float(fit[b])

    state = StrategyState(cfg.LP)
    state.crm[:] = cfg.CR_init
    fitness_trace = np.empty(cfg.G_max)
    prob_trace = np.empty((cfg.G_max, N_STRATEGIES))
    cvr_trace = np.empty((cfg.G_max, N_STRATEGIES))
    idx = np.arange(NP)

    for g in range(cfg.G_max):
        prob_trace[g] = state.probabilities
        strategies = select_strategies(state.probabilities, NP, rng)
        f = _truncated_normal(rng, cfg.F_mean, cfg.F_spread, NP, 0.0, 2.0, lo_open=True)
        f_rec = rng.random(NP)
        cr = _truncated_normal(rng, state.crm[strategies], cfg.CR_spread, NP, 0.0, 1.0)
        k_rand = rng.integers(0, K, size=NP)
        neighbours = _sample_neighbours(rng, NP)

        mutants = mutate(strategies, pop, idx, best, f, f_rec, neighbours)
        trials = crossover(mutants, pop, cr, k_rand, rng, strategies)
        trials, infeasible = repair(trials)
        trial_fit = problem.batch(trials)
        evaluations += NP

        accept = trial_fit <= fit
        pop[accept] = trials[accept]
        fit[accept] = trial_fit[accept]
        b = int(np.argmin(trial_fit))
        if trial_fit[b] < best_fit:
            best, best_fit = trials[b].copy(), float(trial_fit[b])
        fitness_trace[g] = best_fit

        counts = np.bincount(strategies, minlength=N_STRATEGIES)
        bad = np.bincount(strategies, weights=infeasible, minlength=N_STRATEGIES)
        with np.errstate(invalid="ignore", divide="ignore"):
            cvr_trace[g] = np.where(counts > 0, bad / np.maximum(counts, 1), np.nan)

        succ = np.bincount(strategies, weights=accept, minlength=N_STRATEGIES)
        crs = tuple(
            cr[accept & (strategies == k)] if k != Strategy.CURRENT_TO_RAND_1 else np.empty(0)
            for k in range(N_STRATEGIES)
        )
        update_adaptation(state, GenerationRecord(succ, counts - succ, crs))
        if callback is not None:
            callback(g, _frozen(pop), _frozen(fit))

    return SadeRunResult(
        best_theta=RuleParams(best, spec),
        best_fitness=best_fit,
        fitness_trace=fitness_trace,
        strategy_prob_trace=prob_trace,
        cvr_trace=cvr_trace,
        evaluations=evaluations,
        seed=cfg.seed,
        config=cfg,
    )
