import math

import pytest

import compint as ci
from compint.errors import OracleError
from conftest import Y10, Y_HALF_0


def test_exponential_flow(t_field):
    v = ci.solve_ivp(t_field, 0.0, 1.0, 1.0)
    assert abs(v - math.e) < 1e-10


def test_empty_interval_identity(t_field):
    assert ci.solve_ivp(t_field, 0.7, 0.7, 1.234) == 1.234


def test_linear_rhs(s_field):
    v = ci.solve_ivp(s_field, 0.0, 1.0, 0.0)
    assert abs(v - 0.5) < 1e-12


def test_frozen_references(exp_field):
    for t0, expected in Y10.items():
        v = ci.solve_ivp(exp_field, 0.0, 1.0, t0)
        assert abs(v - expected) / expected < 1e-9
    v_half = ci.solve_ivp(exp_field, 0.0, 0.5, 1.0)
    assert abs(v_half - Y_HALF_0) / Y_HALF_0 < 1e-9


def test_semigroup_consistency(exp_field):
    cfg = ci.OracleConfig()
    gen = ci.SplitMix64(314159)
    for _ in range(40):
        pts = sorted(gen.next_float() for _ in range(2))
        a, b, c = 0.0, *pts
        t = gen.next_in(0.25, 3.0)
        via_b = ci.solve_ivp(exp_field, b, c, ci.solve_ivp(exp_field, a, b, t, cfg), cfg)
        direct = ci.solve_ivp(exp_field, a, c, t, cfg)
        assert abs(via_b - direct) <= 100 * cfg.rtol * abs(direct)


def test_tolerance_self_consistency(exp_field):
    coarse = ci.OracleConfig(rtol=1e-10, atol=1e-12)
    fine = ci.OracleConfig(rtol=5e-11, atol=5e-13)
    v1 = ci.solve_ivp(exp_field, 0.0, 1.0, 1.0, coarse)
    v2 = ci.solve_ivp(exp_field, 0.0, 1.0, 1.0, fine)
    assert abs(v1 - v2) < 1e-10


def test_deterministic(exp_field):
    cfg = ci.OracleConfig(init_step=1e-3)
    runs = {ci.solve_ivp(exp_field, 0.0, 1.0, 2.0, cfg) for _ in range(5)}
    assert len(runs) == 1


def test_blow_up_exhausts_budget():
    # y' = y^2 from y(0)=2 blows up at x = 1/2
    with pytest.raises(OracleError):
        ci.solve_ivp(lambda s, t: t * t, 0.0, 1.0, 2.0, ci.OracleConfig(max_steps=2000))


def test_reversed_interval_rejected(t_field):
    with pytest.raises(ValueError):
        ci.solve_ivp(t_field, 1.0, 0.0, 1.0)


def test_config_validation():
    with pytest.raises(ValueError):
        ci.OracleConfig(rtol=0.0)
    with pytest.raises(ValueError):
        ci.OracleConfig(atol=-1.0)
    with pytest.raises(ValueError):
        ci.OracleConfig(max_steps=0)
    with pytest.raises(ValueError):
        ci.OracleConfig(init_step=0.0)
