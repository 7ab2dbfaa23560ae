"""Shared fixtures: compiled integrands (session-scoped so numba
compilation happens once) and frozen reference values.

The Y10 constants are y(1) for y' = exp(-x*y), y(0) = t0, frozen from two
independent high-accuracy solvers (an eighth-order adaptive pair at
rtol 1e-13 and a high-precision Taylor-series integrator at 30 digits,
agreeing to ~1e-13) before the engine was built.
"""

import math

import pytest

import compint as ci

Y10 = {
    0.5: 1.1449618807411373,
    1.0: 1.5415295918743712,
    2.0: 2.3931772501227386,
}
# y(0.5) for y' = exp(-x*y), y(0) = 1, same provenance
Y_HALF_0 = 1.3713779008743625


@pytest.fixture(scope="session")
def exp_field():
    return ci.compile_field("exp(-s*t)")


@pytest.fixture(scope="session")
def t_field():
    return ci.compile_field("t")


@pytest.fixture(scope="session")
def s_field():
    return ci.compile_field("s")


@pytest.fixture(scope="session")
def volterra_field():
    return ci.compile_field("2*s*t")


@pytest.fixture(scope="session")
def exp_spec(exp_field):
    return ci.FlowSpec(exp_field, 0.0, 1.0, (0.0, math.inf))


@pytest.fixture(scope="session")
def t_spec(t_field):
    return ci.FlowSpec(t_field, 0.0, 1.0)


@pytest.fixture(scope="session")
def oracle_y10(exp_field):
    return {t0: ci.solve_ivp(exp_field, 0.0, 1.0, t0) for t0 in (0.5, 1.0, 2.0)}
