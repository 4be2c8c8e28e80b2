import math

import numpy as np
import pytest

import dcfw


def test_elementwise_oracle():
    out = dcfw.lo_elementwise(np.array([3.0, -1.0]), np.array([0.5, 0.0]), 1.0)
    np.testing.assert_allclose(out["u"], [-2.0 / 3.0, 0.0], atol=1e-15)
    assert out["value"] == pytest.approx(-2.0)
    assert out["multiplier"] == pytest.approx(2.0)


def test_group_oracle():
    out = dcfw.lo_group(np.array([1.0, 0.0]), np.array([0.0, 0.5]), 1.0, [[0, 1]])
    assert out["value"] == pytest.approx(-math.sqrt(0.75) / 0.75, rel=1e-12)
    with pytest.raises(ValueError):
        dcfw.lo_group(np.array([1.0, 0.0]), np.zeros(2), 1.0, [[0]])


def test_nuclear_oracle():
    out = dcfw.lo_nuclear(np.array([[1.0, 0.0], [0.0, 0.0]]), np.zeros((2, 2)), 2.0)
    np.testing.assert_allclose(out["u"], [[-2.0, 0.0], [0.0, 0.0]], atol=1e-8)


def test_strongly_convex_oracle():
    out = dcfw.lo_strongly_convex(np.array([1.0]), np.zeros(1), np.zeros(1), 1.0, 0.0, 1.5)
    assert out["u"][0] == pytest.approx(-1.0, abs=1e-8)
    assert out["multiplier"] == pytest.approx(0.5, abs=1e-8)


def test_constraint_value():
    assert dcfw.constraint_value("l1", np.array([3.0, 4.0]), mu=0.5) == pytest.approx(4.5)
    assert dcfw.constraint_value("nuclear", np.array([[2.0]]), mu=0.5) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        dcfw.constraint_value("nope", np.zeros(2))


def test_least_squares_reaches_boundary_optimum():
    res = dcfw.solve_least_squares(np.eye(2), np.array([3.0, 0.0]), kind="l1", mu=0.5, sigma=1.0,
                                   variant="afw", max_iter=5000)
    np.testing.assert_allclose(res["x"], [2.0, 0.0], atol=1e-5)
    fs = [r["f"] for r in res["trace"]]
    assert all(b <= a + 1e-12 for a, b in zip(fs, fs[1:]))
    assert res["trace"][-1]["constraint_value"] <= 1.0 + 1e-9


def test_matrix_completion_small():
    data = dcfw.gen_synthetic_mc(rows=30, cols=20, rank=2, obs_fraction=0.5, noise=0.0, seed=3)
    assert len(data["value"]) == 300
    sigma = 0.9 * data["truth_nuclear_norm"]
    res = dcfw.solve_matrix_completion(30, 20, data["row"], data["col"], np.asarray(data["value"]),
                                       mu=0.5, sigma=sigma, variant="afw", max_iter=100)
    assert res["x"].shape == (30, 20)
    assert res["rank"] >= 1
    assert all(r["constraint_value"] <= sigma + 1e-9 for r in res["trace"])


def test_run_experiment_summary():
    summary = dcfw.run_experiment("problem = cs\nsigma = 1\nmax_iter = 200\ntiming = false\n")
    assert summary["problem"] == "cs"
    assert float(summary["feasibility_slack"]) <= 1e-9
    with pytest.raises(ValueError):
        dcfw.run_experiment("bogus = 1\n")


def test_kkt_certificate():
    rep = dcfw.kkt_check_elementwise(np.array([3.0, -1.0, 0.5]), np.array([0.2, 0.0, -0.1]), 0.5, 1.0)
    assert rep["passed"]
