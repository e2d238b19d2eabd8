import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from camid import io
from camid.oracle import solve_projected_subgradient
from camid.sade import SadeConfig, run
from camid.scenario import ScenarioSpec, build_dataset


@settings(max_examples=50, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trip(x):
    assert io.parse(io.fmt(x)) == x


def test_nan_written_empty():
    assert io.fmt(float("nan")) == ""
    assert np.isnan(io.parse(""))


@settings(max_examples=30, deadline=None)
@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.floats(0, 1)))
def test_config_csv_round_trip(tmp_path_factory, cfg):
    path = tmp_path_factory.mktemp("cfg") / "grid.csv"
    io.config_to_csv(cfg, path)
    np.testing.assert_array_equal(io.config_from_csv(path), cfg)
    assert b"\r" not in path.read_bytes()


def test_config_json_round_trip():
    cfg = np.random.default_rng(0).random((3, 5))
    env = json.loads(json.dumps(io.config_to_json(cfg)))
    assert env["height"] == 3 and env["width"] == 5 and len(env["cells"]) == 15
    np.testing.assert_array_equal(io.config_from_json(env), cfg)


def test_config_json_size_mismatch():
    with pytest.raises(ValueError):
        io.config_from_json({"height": 2, "width": 2, "cells": [0.1, 0.2, 0.3]})


def test_dataset_round_trip(tmp_path):
    data = build_dataset(ScenarioSpec("moore", 1, "random", height=7, width=9, T=3, seed=4))
    io.write_dataset(data, tmp_path)
    manifest = io.read_json(tmp_path / "manifest.json")
    assert manifest["neighborhood"]["K"] == 9
    assert manifest["steps"] == 4
    assert len(list((tmp_path / "observed").iterdir())) == 4
    back = io.read_dataset(tmp_path)
    assert back.spec == data.spec
    np.testing.assert_array_equal(back.observed, data.observed)
    np.testing.assert_array_equal(back.clean, data.clean)
    np.testing.assert_array_equal(back.truth.weights, data.truth.weights)


def test_traces_and_result_payload(tmp_path):
    data = build_dataset(ScenarioSpec("manhattan", 1, "random", height=9, width=9, seed=1))
    res = run(data, SadeConfig(NP=12, G_max=15, LP=3, seed=7))
    io.write_traces(res, tmp_path / "traces.csv")
    tr = io.read_traces(tmp_path / "traces.csv")
    assert list(tr) == io.TRACE_COLUMNS
    np.testing.assert_array_equal(tr["best_J"], res.fitness_trace)
    np.testing.assert_array_equal(tr["generation"], np.arange(15))

    payload = io.result_to_dict(res, truth=data.truth.weights, nrmse=1.5)
    assert payload["solver"] == "sade"
    assert payload["seed"] == 7 and payload["evaluations"] == 12 * 16
    assert payload["config"]["NP"] == 12
    assert payload["theta"] == res.best_theta.weights.tolist()

    sol = solve_projected_subgradient(data)
    oracle = io.result_to_dict(sol, solver="oracle")
    assert oracle["solver"] == "oracle" and "iterations" in oracle and "seed" not in oracle
