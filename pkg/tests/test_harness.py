import math

import pytest

import compint as ci
from compint.harness import ROUNDING_FLOOR, ConvergenceRow, fit_order
from conftest import Y10


def test_convergence_table_first_order(exp_spec, oracle_y10):
    n_list = [2**k for k in range(4, 11)]
    report = ci.convergence_table(
        exp_spec, 1.0, ci.LEFT, n_list, oracle_y10[1.0], "oracle"
    )
    assert len(report.rows) == len(n_list)
    assert [r.n for r in report.rows] == n_list
    meshes = [r.mesh for r in report.rows]
    assert all(b < a for a, b in zip(meshes, meshes[1:]))
    assert 0.8 <= report.order <= 1.2
    lo, hi = report.order_ci
    assert lo <= report.order <= hi
    assert report.diagnostic is None


def test_rounding_level_rows_skip_fit(s_field):
    # midpoint tags are exact on f(s,t)=s: errors at rounding level, no fit
    spec = ci.FlowSpec(s_field, 0.0, 1.0)
    report = ci.convergence_table(
        spec, 0.0, ci.MIDPOINT, [16, 64, 256, 1024], 0.5, "exact"
    )
    assert all(r.abs_error <= ROUNDING_FLOOR for r in report.rows)
    assert report.order is None
    assert report.order_ci is None


def test_partial_table_on_escape(t_field):
    # value (1+1/n)^n grows with n toward e; cap the state just below e
    spec = ci.FlowSpec(t_field, 0.0, 1.0, (0.0, 2.7))
    report = ci.convergence_table(
        spec, 1.0, ci.LEFT, [4, 16, 64, 256, 1024], math.e, "exact"
    )
    assert report.diagnostic is not None
    assert "state escape" in report.diagnostic
    assert 0 < len(report.rows) < 5


def test_table_validation(exp_spec):
    with pytest.raises(ValueError):
        ci.convergence_table(exp_spec, 1.0, ci.LEFT, [16, 32], 1.0)
    with pytest.raises(ValueError):
        ci.convergence_table(exp_spec, 1.0, ci.LEFT, [16, 16, 32], 1.0)
    with pytest.raises(ValueError):
        ci.convergence_table(exp_spec, 1.0, ci.LEFT, [16, 32, 64], math.inf)


def test_fit_order_on_synthetic_rows():
    rows = tuple(
        ConvergenceRow(n, 1.0 / n, 0.0, 0.37 / n, 0.37 / n) for n in (16, 32, 64, 128)
    )
    order, ci_ = fit_order(rows)
    assert order == pytest.approx(1.0, abs=1e-9)
    lo, hi = ci_
    assert lo <= 1.0 <= hi


def test_fit_order_insufficient_rows():
    rows = (ConvergenceRow(16, 1 / 16, 0.0, 1e-18, 1e-18),)
    assert fit_order(rows) == (None, None)


def test_audit_all_pass(exp_spec):
    summary = ci.group_law_audit(exp_spec, 25, seed=7, tol=1e-6, t_range=(0.1, 3.0))
    assert summary.all_passed
    assert summary.bitwise_passes == 25
    assert summary.worst_bitwise_gap == 0.0
    assert summary.worst_chain_gap <= 1e-5
    assert summary.worst_roundtrip_gap <= 1e-5
    assert summary.failures == ()


def test_audit_deterministic(exp_spec):
    a = ci.group_law_audit(exp_spec, 10, seed=42, tol=1e-6)
    b = ci.group_law_audit(exp_spec, 10, seed=42, tol=1e-6)
    assert a == b
    c = ci.group_law_audit(exp_spec, 10, seed=43, tol=1e-6)
    assert c.worst_chain_gap != a.worst_chain_gap


def test_audit_collapsed_interval_trivially_passes(exp_field):
    # a == b == c: every law reduces to the identity
    spec = ci.FlowSpec(exp_field, 0.5, 0.5, (0.0, math.inf))
    summary = ci.group_law_audit(spec, 1, seed=1, tol=1e-6)
    assert summary.all_passed
    assert summary.worst_chain_gap == 0.0
    assert summary.worst_roundtrip_gap == 0.0


def test_audit_exponential_flow(t_spec):
    summary = ci.group_law_audit(t_spec, 20, seed=5, tol=1e-6, t_range=(0.5, 3.0))
    assert summary.all_passed


def test_audit_records_failures(exp_spec):
    # starving the refinement forces no-convergence failures, which are data
    summary = ci.group_law_audit(
        exp_spec, 3, seed=9, tol=1e-12, n0=16, n_max=32
    )
    assert not summary.all_passed
    assert summary.chain_passes == 0
    assert summary.roundtrip_passes == 0
    assert summary.bitwise_passes == 3  # bitwise law needs no refinement
    assert any("no convergence" in msg for msg in summary.failures)


def test_audit_validation(exp_spec):
    with pytest.raises(ValueError):
        ci.group_law_audit(exp_spec, 0, seed=1, tol=1e-6)


def test_constant_in_t_table_matches_scalar_riemann_error(s_field):
    # end-to-end: for a t-independent integrand the table's abs_error equals
    # the plain Riemann-sum error of the scalar integral, up to 8*n*eps
    import sys

    eps = sys.float_info.epsilon
    spec = ci.FlowSpec(s_field, 0.0, 1.0)
    t0 = 0.7
    reference = t0 + 0.5
    n_list = [16, 64, 256, 1024]
    report = ci.convergence_table(spec, t0, ci.LEFT, n_list, reference, "exact")
    for row in report.rows:
        p = ci.uniform_partition(0.0, 1.0, row.n, ci.LEFT)
        acc = 0.0
        for (lo, hi, tag) in p.cells():
            acc += tag * (hi - lo)
        sum_err = abs(acc - 0.5)
        assert abs(row.abs_error - sum_err) <= 8 * row.n * eps * (abs(t0) + abs(acc))
