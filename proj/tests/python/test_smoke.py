import json
import math

import numpy as np
import pytest

import skewdiff as sd


def test_params_and_regime_errors():
    m = sd.ModelParams(sigma=2.0, delta=3.0, b=1.0, p=0.5)
    assert m.mean_reversion_level == pytest.approx(3.0)
    with pytest.raises(sd.SkewdiffError) as err:
        sd.ModelParams(p=1.2)
    assert err.value.code == "POutOfRange"
    with pytest.raises(sd.SkewdiffError) as err:
        sd.ModelParams(delta=0.5)
    assert err.value.code == "DeltaBelowOne"


def test_path_shapes_and_determinism():
    m = sd.ModelParams(sigma=2.0, delta=2.0, b=1.0, p=0.75)
    curve = sd.make_curve("constant", 1.0, {"value": 1.0})
    grid = sd.GridSpec(1.0, 256)
    scheme = sd.SchemeConfig(skew_mode=sd.SkewMode.bridge, drift_mode=sd.DriftMode.implicit_sqrt_term)
    a = sd.simulate_y_path(m, curve, 1.0, grid, scheme, seed=5)
    b = sd.simulate_y_path(m, curve, 1.0, grid, scheme, seed=5)
    assert a.values.shape == (257,)
    assert a.gauss.shape == (256,)
    assert np.array_equal(a.values, b.values)
    assert np.all(a.values >= 0.0)
    r = sd.square_path(a)
    assert r.frame == "R"
    assert np.allclose(r.values, a.values**2)


def test_python_curve_and_local_time():
    m = sd.ModelParams(sigma=2.0, delta=2.0, b=1.0, p=0.75)
    curve = sd.curve_from_function(lambda t: 1.0 + 0.1 * t, 2.0, deriv=lambda t: 0.1)
    assert curve.lam(1.0) == pytest.approx(1.1)
    path = sd.simulate_y_path(m, curve, 1.0, sd.GridSpec(2.0, 2048), seed=2)
    est = sd.occupation_both(path, curve.lam, sd.default_eps(path))
    assert est.symmetric[-1] >= 0.0
    assert len(est.times) == len(est.upper)


def test_oracles():
    m = sd.ModelParams(sigma=2.0, delta=3.0, b=1.0, p=0.5)
    mean, var = sd.cir_moments(m, 1.0, 1.0)
    assert mean == pytest.approx(3.0 - 2.0 * math.exp(-1.0), rel=1e-12)
    assert var > 0.0
    assert sd.skew_bm_prob_above(0.75, 1e-12, 0.0) == pytest.approx(0.75)
    assert 0.0 < sd.cir_transition_cdf(m, 1.0, 1.0, 2.0) < 1.0


def test_pde_solve_respects_max_principle():
    m = sd.ModelParams(sigma=2.0, delta=2.0, b=1.0, p=0.7)
    sol = sd.solve_backward(m, lambda t: 1.0, lambda x: min(x, 2.0), 1.0, sd.PdeGrid(x_max=20.0, n_x=201, n_t=200))
    assert sol.max_principle_ok
    assert 0.0 <= sol.value_at(1.0) <= 2.0


def test_experiment_roundtrip_and_thread_determinism():
    assert "cir-baseline" in sd.experiment_names()
    cfg = sd.default_config("cir-baseline")
    cfg["n_paths"] = 2000
    a = sd.run_experiment(cfg, seed=9, threads=1)
    b = sd.run_experiment(json.dumps(cfg), seed=9, threads=3)
    assert a["metrics_json"] == b["metrics_json"]
    assert a["experiment"] == "cir-baseline"
    assert {c["name"] for c in a["criteria"]} >= {"mean_within_3se"}


def test_invalid_config_raises():
    with pytest.raises(sd.SkewdiffError) as err:
        sd.validate_config({"experiment": "cir-baseline", "seed": 1, "grid": {"n_step": 3}})
    assert err.value.code == "ConfigInvalid"
    with pytest.raises(sd.SkewdiffError):
        sd.run({"experiment": "no-such-experiment"}, seed=1)
