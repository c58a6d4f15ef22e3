import math
import os

import numpy as np
import pytest

import laseruav

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "..", "scenarios")


def small_config():
    cfg = laseruav.load_config(os.path.join(SCENARIOS, "reference_phi600.cfg"))
    cfg.T = 30.0
    cfg.N = 60
    return cfg


def test_config_loads():
    cfg = laseruav.load_config(os.path.join(SCENARIOS, "reference_phi600.cfg"))
    assert cfg.gamma == pytest.approx(100.0)
    assert cfg.dt == pytest.approx(0.5)


def test_double_circle_plan():
    plan = laseruav.plan_double_circle(laseruav.ScenarioConfig.reference_setup())
    assert abs(plan.V1 - 26.43) <= 1.0
    assert plan.r1 + plan.r2 <= 500.0


def test_water_fill_hand_example():
    p, level = laseruav.water_fill(np.array([100.0, 200.0, 400.0]), 300.0, 1.0)
    assert level == pytest.approx(300.0)
    assert np.allclose(p, [200.0, 100.0, 0.0])


def test_methods_are_ordered_and_feasible():
    cfg = small_config()
    rates = {}
    for method in ("single", "double", "joint"):
        out = laseruav.run_method(method, cfg)
        assert out["q"].shape == (cfg.N, 2)
        rep = laseruav.audit(out["q"], out["v"], out["a"], out["p"], cfg)
        assert rep["residual"] <= 1e-6 * rep["harvest"]
        assert math.isclose(laseruav.sum_throughput(out["q"], out["p"], cfg), out["rate_sum"], rel_tol=1e-12)
        rates[method] = out["rate_sum"]
    assert rates["joint"] >= rates["double"] >= rates["single"]


def test_errors_map_to_exceptions():
    cfg = laseruav.ScenarioConfig.reference_setup()
    cfg.phi = 0.0
    with pytest.raises(laseruav.InfeasibleError):
        laseruav.run_method("joint", cfg)
    with pytest.raises(laseruav.InputError):
        laseruav.run_method("triple", cfg)
