import math

import numpy as np
import pytest

from camid.lattice import NeighborhoodSpec, apply_rule
from camid.scenario import (
    ScenarioSpec,
    ThetaScheme,
    add_noise,
    build_dataset,
    make_theta,
    standard_scenarios,
)
from camid.experiment import bind_seeds


def test_distance_theta_manhattan_r1():
    theta = make_theta(NeighborhoodSpec("manhattan", 1), ThetaScheme.DISTANCE)
    np.testing.assert_allclose(theta.weights, [1 / 6, 1 / 6, 1 / 3, 1 / 6, 1 / 6], atol=1e-15)


def test_distance_theta_moore_r1_symmetry():
    w = make_theta(NeighborhoodSpec("moore", 1), "distance").weights
    centre = w[4]
    ring = np.delete(w, 4)
    assert np.all(ring == ring[0])
    assert centre > ring.max()


@pytest.mark.parametrize("topology", ["manhattan", "moore"])
@pytest.mark.parametrize("radius", [1, 2, 3])
@pytest.mark.parametrize("scheme", list(ThetaScheme))
def test_theta_on_simplex(topology, radius, scheme):
    w = make_theta(NeighborhoodSpec(topology, radius), scheme, seed=11).weights
    assert abs(w.sum() - 1) < 1e-12
    assert np.all((w > 0) & (w < 1))


def test_random_theta_deterministic():
    spec = NeighborhoodSpec("moore", 2)
    a = make_theta(spec, "random", seed=5).weights
    b = make_theta(spec, "random", seed=5).weights
    c = make_theta(spec, "random", seed=6).weights
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_no_noise_is_identity():
    traj = np.random.default_rng(0).random((3, 4, 4))
    assert np.array_equal(add_noise(traj, None, seed=1), traj)
    assert np.array_equal(add_noise(traj, math.inf, seed=1), traj)


def test_noise_sigma_on_constant_half():
    traj = np.full((11, 51, 51), 0.5)
    noisy = add_noise(traj, 40.0, seed=3, clip=False)
    # P_s = 0.25 -> sigma = sqrt(0.25 * 1e-4) = 0.005
    assert np.std(noisy - traj) == pytest.approx(0.005, rel=0.10)


def test_empirical_snr():
    data = build_dataset(ScenarioSpec("manhattan", 1, "random", snr_db=None, seed=2))
    noisy = add_noise(data.clean, 40.0, seed=9, clip=False)
    noise = noisy - data.clean
    snr = 10 * np.log10(np.mean(data.clean**2) / np.mean(noise**2))
    assert abs(snr - 40.0) <= 0.5


def test_noisy_values_clamped():
    traj = np.random.default_rng(1).random((2, 20, 20))
    noisy = add_noise(traj, 10.0, seed=1)
    assert noisy.min() >= 0 and noisy.max() <= 1


def test_build_dataset_deterministic():
    spec = ScenarioSpec("moore", 1, "random", height=15, width=15, seed=42)
    a, b = build_dataset(spec), build_dataset(spec)
    assert np.array_equal(a.observed, b.observed)
    assert np.array_equal(a.clean, b.clean)
    assert np.array_equal(a.truth.weights, b.truth.weights)


def test_build_dataset_without_noise():
    data = build_dataset(ScenarioSpec("moore", 1, "distance", height=9, width=9, snr_db=None))
    assert np.array_equal(data.observed, data.clean)


def test_clean_trajectory_follows_rule():
    data = build_dataset(ScenarioSpec("manhattan", 2, "random", height=13, width=11, T=4, seed=3))
    assert data.clean.shape == (5, 13, 11)
    for t in range(4):
        assert np.array_equal(data.clean[t + 1], apply_rule(data.clean[t], data.truth))
    assert data.observed.min() >= 0 and data.observed.max() <= 1


def test_suite_shares_initial_state():
    specs = bind_seeds(standard_scenarios(height=15, width=15), master_seed=7)
    assert len(specs) == 12
    x0 = [build_dataset(s).clean[0] for s in specs]
    assert all(np.array_equal(x0[0], x) for x in x0[1:])
    assert len({s.seed for s in specs}) == 12


def test_standard_scenarios_cover_grid():
    names = {s.name for s in standard_scenarios()}
    assert len(names) == 12
    assert "moore-r3-distance" in names


@pytest.mark.parametrize(
    "kwargs",
    [dict(T=0), dict(height=4, radius=2), dict(snr_db=float("nan"))],
)
def test_invalid_scenarios(kwargs):
    base = dict(topology="moore", radius=1, theta_scheme="random")
    base.update(kwargs)
    with pytest.raises(ValueError):
        ScenarioSpec(**base)


def test_spec_dict_round_trip():
    spec = ScenarioSpec("moore", 2, "distance", height=21, width=23, T=5, snr_db=30.0, seed=9, init_seed=4)
    assert ScenarioSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ValueError):
        ScenarioSpec.from_dict({**spec.to_dict(), "colour": "red"})
