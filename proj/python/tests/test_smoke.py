import math

import numpy as np
import pytest

import d2drobust as d2d


@pytest.fixture(scope="module")
def scenario():
    return d2d.build_scenario()


@pytest.fixture(scope="module")
def train(scenario):
    return d2d.generate_dataset(scenario, 1000, seed=3)


def test_dataset_shape_and_determinism(scenario, train):
    assert train.shape == (1000, 2)
    assert np.all(train >= 0)
    again = d2d.generate_dataset(scenario, 1000, seed=3)
    assert np.array_equal(train, again)
    other = d2d.generate_dataset(scenario, 50, seed=3, distribution="truncated-exponential")
    assert other.shape == (50, 2)


def test_calibrated_box_covers_quantile(train):
    box = d2d.calibrate(train, "BoxSet", 0.05)
    assert box.shape == "BoxSet"
    inside = sum(box.contains(g) for g in train)
    assert inside >= 950


def test_svc_fit(train):
    model = d2d.fit_svc(train, 0.05)
    assert model.cap == pytest.approx(0.02)
    assert sum(model.weights) == pytest.approx(1.0, abs=1e-8)
    assert len(model.outliers) <= 50
    point, value = model.worst_case(np.array([1.0, -0.5]))
    assert value == pytest.approx(point @ np.array([1.0, -0.5]), rel=1e-9)
    for g in train[:100]:
        assert model.contains(g) == model.kernel_sphere_contains(g)


def test_allocate_reaches_an_endpoint(scenario, train):
    for method in ["nonrobust", "l1", "l2", "box", "svc", "quantile-svc"]:
        result = d2d.allocate(scenario, d2d.fit_set(method, train, 0.05))
        assert result.feasible, method
        zeta = 1e-4 * scenario.p_max_d_w
        assert (abs(result.p_c - scenario.p_max_c_w) <= zeta) or (abs(result.p_d - scenario.p_max_d_w) <= zeta)
        assert result.iterations <= 25
        assert d2d.sinr_c(result.p_c, result.p_d, scenario) >= scenario.gamma_min_c * (1 - 1e-9)


def test_run_experiment_rows():
    rows = d2d.run_experiment({"methods": ["l2", "box"], "sweep": "epsilon", "grid": [0.05, 0.1],
                               "n_train": 300, "n_test": 2000})
    assert len(rows) == 4
    for row in rows:
        assert 0.0 <= row["outage"] <= 1.0
        assert row["throughput_bps"] >= 0.0
        assert math.isfinite(row["mean_due_sinr"])


def test_unknown_key_raises():
    with pytest.raises(d2d.ConfigError, match="colour"):
        d2d.effective_config({"colour": "red"})
