import numpy as np
import pytest

from camid.lattice import NeighborhoodSpec, WeightScheme
from camid.objective import IdentificationProblem, fitness
from camid.scenario import ObservedDataset, ScenarioSpec, build_dataset, make_theta


def double_loop_objective(theta, observed, spec, weighting):
    """Sum over steps and cells of weight * |x(t+1) - theta . neighbors(x(t))|."""
    _, h, w = observed.shape
    cy, cx = (h - 1) / 2, (w - 1) / 2
    half = (max(h, w) - 1) / 2
    total = 0.0
    for t in range(observed.shape[0] - 1):
        for y in range(h):
            for x in range(w):
                pred = sum(th * observed[t, (y + dy) % h, (x + dx) % w] for th, (dy, dx) in zip(theta, spec.offsets()))
                dist = max(abs(y - cy), abs(x - cx))
                if weighting is WeightScheme.RELATIVE:
                    dist /= half
                total += 2.0 ** (-dist) * abs(observed[t + 1, y, x] - pred)
    return total


@pytest.fixture(scope="module")
def small():
    return build_dataset(ScenarioSpec("moore", 1, "random", height=5, width=5, T=2, snr_db=30.0, seed=8))


@pytest.mark.parametrize("weighting", [WeightScheme.CENTERED, WeightScheme.RELATIVE])
def test_matches_double_loop(small, weighting):
    rng = np.random.default_rng(0)
    for _ in range(5):
        theta = rng.random(9)
        theta /= theta.sum()
        expected = double_loop_objective(theta, small.observed, small.spec.neighborhood, weighting)
        assert fitness(theta, small, weighting) == pytest.approx(expected, rel=1e-12)
        problem = IdentificationProblem.from_dataset(small, weighting)
        assert problem(theta) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("topology, radius", [("manhattan", 1), ("moore", 2), ("manhattan", 3)])
def test_truth_is_zero_on_noiseless_data(topology, radius):
    data = build_dataset(ScenarioSpec(topology, radius, "random", height=15, width=15, snr_db=None, seed=1))
    assert fitness(data.truth.weights, data) < 1e-12
    assert IdentificationProblem.from_dataset(data)(data.truth.weights) < 1e-12


def test_single_cell_single_weight():
    spec = ScenarioSpec("moore", 0, "random", height=1, width=1, T=3, snr_db=None)
    traj = np.array([0.2, 0.5, 0.4, 0.9]).reshape(4, 1, 1)
    theta = make_theta(spec.neighborhood, "random", 0)
    data = ObservedDataset(spec, theta, traj, traj)
    # |0.5-0.2| + |0.4-0.5| + |0.9-0.4|
    assert fitness([1.0], data) == pytest.approx(0.9, abs=1e-15)


def test_batch_matches_single(small):
    problem = IdentificationProblem.from_dataset(small)
    rng = np.random.default_rng(1)
    thetas = rng.random((7, 9))
    thetas /= thetas.sum(axis=1, keepdims=True)
    np.testing.assert_allclose(problem.batch(thetas), [problem(t) for t in thetas], rtol=1e-12)


def test_wrong_length_rejected(small):
    problem = IdentificationProblem.from_dataset(small)
    with pytest.raises(ValueError):
        problem(np.full(5, 0.2))
    with pytest.raises(ValueError):
        fitness(np.full(5, 0.2), small)


def test_subgradient_matches_finite_difference(small):
    problem = IdentificationProblem.from_dataset(small)
    theta = np.full(9, 1 / 9)
    g = problem.subgradient(theta)
    eps = 1e-7
    fd = np.array([(problem(theta + eps * e) - problem(theta - eps * e)) / (2 * eps) for e in np.eye(9)])
    np.testing.assert_allclose(g, fd, rtol=1e-5, atol=1e-6)


def test_from_arrays_validates_shapes():
    with pytest.raises(ValueError):
        IdentificationProblem.from_arrays(np.ones((3, 2)), np.ones(3), np.ones(2))
    p = IdentificationProblem.from_arrays(np.eye(2), [0.3, 0.7], [1, 1])
    assert p.K == 2
    assert p([0.3, 0.7]) == 0.0


def test_design_matrix_shape():
    spec = NeighborhoodSpec("manhattan", 2)
    obs = np.random.default_rng(2).random((3, 7, 7))
    assert IdentificationProblem(obs, spec).A.shape == (2 * 49, 13)
