"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines as they
complete. Every tolerance is pinned here, not configurable.
"""

import math
import subprocess
import sys

import pytest

import compint as ci
from compint.cli import main
from conftest import Y10

EPS = sys.float_info.epsilon


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_01_first_order_convergence(exp_spec, oracle_y10):
    """Left-tag meshes n=2^4..2^14 fit slope in [0.8, 1.2] vs the oracle and
    the n=2^14 error is at most 5e-4, for t in {0.5, 1, 2}."""
    n_list = [2**k for k in range(4, 15)]
    ok = True
    details = []
    for t0 in (0.5, 1.0, 2.0):
        report = ci.convergence_table(
            exp_spec, t0, ci.LEFT, n_list, oracle_y10[t0], "oracle"
        )
        tail_err = report.rows[-1].abs_error
        slope_ok = report.order is not None and 0.8 <= report.order <= 1.2
        tail_ok = tail_err <= 5e-4
        ok = ok and slope_ok and tail_ok
        details.append(f"t={t0}: slope {report.order:.3f}, err@2^14 {tail_err:.2e}")
    _report("criterion 1", ok, "; ".join(details))


def test_criterion_02_identity_law():
    """Empty-partition composition returns t bit-exactly, 1000 random draws
    over a fixed integrand family."""
    family = [
        ci.compile_field(src) for src in ("exp(-s*t)", "t", "s", "2*s*t", "cos(s)*t")
    ]
    gen = ci.SplitMix64(20260810)
    failures = 0
    for i in range(1000):
        f = family[i % len(family)]
        a = gen.next_float()
        t = gen.next_in(-5.0, 5.0)
        spec = ci.FlowSpec(f, a, a)
        p = ci.uniform_partition(a, a, 0, ci.LEFT)
        if ci.riemann_composition(spec, t, p).value != t:
            failures += 1
        if ci.compositional_integral(spec, t, 1e-6).value != t:
            failures += 1
    _report("criterion 2", failures == 0, f"{1000 - failures}/1000 draws bit-exact")


def _random_partition(gen, a, b, n):
    interior = sorted(gen.next_in(a, b) for _ in range(n - 1))
    nodes = (a, *interior, b)
    tags = tuple(lo + gen.next_float() * (hi - lo) for lo, hi in zip(nodes, nodes[1:]))
    return ci.Partition(a, b, nodes, tags)


def test_criterion_03_concatenation_bitwise(exp_field, t_field):
    """Chained equals direct bit-identically over 100 random splits of [0, 1]
    with random partitions, for f = e^(-st) and f = t. Zero tolerance."""
    gen = ci.SplitMix64(31415926)
    mismatches = 0
    for i in range(100):
        field = exp_field if i % 2 == 0 else t_field
        spec = ci.FlowSpec(field, 0.0, 1.0, (0.0, math.inf))
        b = gen.next_in(0.05, 0.95)
        p_ab = _random_partition(gen, 0.0, b, 1 + gen.next_below(24))
        p_bc = _random_partition(gen, b, 1.0, 1 + gen.next_below(24))
        t = gen.next_in(0.25, 3.0)
        chained, direct = ci.compose_flows(spec, t, 0.0, b, 1.0, p_ab, p_bc)
        if chained != direct:
            mismatches += 1
    _report("criterion 3", mismatches == 0, f"{100 - mismatches}/100 splits bit-identical")


def test_criterion_04_converged_group_law(exp_spec):
    """|Y_cb(Y_ba(t)) - Y_ca(t)| <= 1e-5 at tol = 1e-6 for 100 random
    a <= b <= c in [0, 1] and t in (0, 3]."""
    summary = ci.group_law_audit(
        exp_spec, trials=100, seed=271828, tol=1e-6, t_range=(1e-9, 3.0)
    )
    ok = summary.chain_passes == summary.trials and summary.worst_chain_gap <= 1e-5
    _report(
        "criterion 4",
        ok,
        f"{summary.chain_passes}/100 within 1e-5, worst gap {summary.worst_chain_gap:.2e}",
    )


def test_criterion_05_inversion_roundtrip(exp_spec):
    """inverse(forward(t)) within 1e-5 of t at tol = 1e-7, 50 random trials."""
    gen = ci.SplitMix64(16180339)
    worst = 0.0
    passes = 0
    for _ in range(50):
        t = gen.next_in(1e-9, 3.0)
        forward = ci.compositional_integral(exp_spec, t, 1e-7).value
        back = ci.inverse_flow(exp_spec, forward, 1e-7)
        gap = abs(back - t)
        worst = max(worst, gap)
        passes += gap <= 1e-5
    _report("criterion 5", passes == 50, f"{passes}/50 round trips, worst {worst:.2e}")


def test_criterion_06_substitution(exp_spec):
    """gamma(p) = p^2 on [0, 1]: the substituted converged value agrees with
    the direct converged value within 1e-5 for f = e^(-st), t = 1."""
    gamma = lambda p: p * p
    gamma_prime = lambda p: 2.0 * p
    tol = 1e-6
    n = 64
    prev = None
    value = None
    while n <= 1 << 22:
        p = ci.uniform_partition(0.0, 1.0, n, ci.LEFT)
        value = ci.substituted_flow(
            exp_spec, gamma, gamma_prime, 0.0, 1.0, 1.0, p
        ).value
        if prev is not None and abs(value - prev) <= tol * (1.0 + abs(value)):
            break
        prev = value
        n *= 2
    direct = ci.compositional_integral(exp_spec, 1.0, tol).value
    gap = abs(value - direct)
    _report("criterion 6", gap <= 1e-5, f"substituted vs direct gap {gap:.2e} at n={n}")


def test_criterion_07_constant_in_t_reduction(s_field):
    """f(s, t) = s: composition minus (t + Riemann sum) stays within
    8*n*eps*scale up to n = 2^14; midpoint error vs t + 0.5 is at rounding
    level."""
    spec = ci.FlowSpec(s_field, 0.0, 1.0)
    t0 = 0.7
    ok = True
    worst_ratio = 0.0
    for k in range(4, 15):
        n = 2**k
        p = ci.uniform_partition(0.0, 1.0, n, ci.LEFT)
        comp = ci.riemann_composition(spec, t0, p).value
        acc = 0.0
        for (lo, hi, tag) in p.cells():
            acc += tag * (hi - lo)
        bound = 8 * n * EPS * (abs(t0) + abs(acc))
        gap = abs(comp - (t0 + acc))
        ok = ok and gap <= bound
        worst_ratio = max(worst_ratio, gap / bound if bound else 0.0)

        mid = ci.uniform_partition(0.0, 1.0, n, ci.MIDPOINT)
        mid_gap = abs(ci.riemann_composition(spec, t0, mid).value - (t0 + 0.5))
        ok = ok and mid_gap <= 8 * n * EPS * (abs(t0) + 0.5)
    _report("criterion 7", ok, f"worst gap/bound ratio {worst_ratio:.3f}")


def test_criterion_08_closed_forms(t_field, volterra_field):
    """Converged flows match t*e^(b-a) for f = t and t*e^(int p) for
    f = 2st within 10x the requested tolerance at tol = 1e-8."""
    tol = 1e-8
    spec_t = ci.FlowSpec(t_field, 0.0, 1.0)
    exact_t = ci.exact_value(ci.exp_flow_case(), 0.0, 1.0, 1.0)
    err_t = abs(ci.compositional_integral(spec_t, 1.0, tol).value - exact_t)

    spec_v = ci.FlowSpec(volterra_field, 0.0, 1.0)
    exact_v = ci.exact_value(ci.volterra_case(lambda s: 2.0 * s), 0.0, 1.0, 1.0)
    err_v = abs(ci.compositional_integral(spec_v, 1.0, tol).value - exact_v)

    ok = err_t <= 10 * tol and err_v <= 10 * tol
    _report("criterion 8", ok, f"exp flow err {err_t:.2e}, volterra err {err_v:.2e} vs 1e-07")


def test_criterion_09_product_identities():
    """product(k=2, x=1, n=1e5) within 5e-5 of e; the k=1 product obeys
    |value - e| <= 2e/n for n >= 100."""
    err_k2 = abs(ci.product_limit_exp_k(2, 1.0, 10**5) - math.e)
    ok = err_k2 <= 5e-5
    worst = 0.0
    for n in (100, 316, 1000, 10_000, 100_000):
        err = abs(ci.product_limit_exp_k(1, 1.0, n) - math.e)
        worst = max(worst, err * n / (2 * math.e))
        ok = ok and err <= 2 * math.e / n
    _report("criterion 9", ok, f"k=2 err {err_k2:.2e}; k=1 worst err/(2e/n) {worst:.3f}")


def test_criterion_10_oracle_consistency(exp_field, t_field, volterra_field):
    """Oracle semigroup discrepancy <= 100*rtol*|value| over 100 random
    splits; oracle vs closed forms <= 1e-9 relative."""
    cfg = ci.OracleConfig()
    gen = ci.SplitMix64(6283185)
    ok = True
    worst = 0.0
    for _ in range(100):
        a, b, c = sorted(gen.next_float() for _ in range(3))
        t = gen.next_in(0.25, 3.0)
        via_b = ci.solve_ivp(exp_field, b, c, ci.solve_ivp(exp_field, a, b, t, cfg), cfg)
        direct = ci.solve_ivp(exp_field, a, c, t, cfg)
        gap = abs(via_b - direct)
        bound = 100 * cfg.rtol * abs(direct)
        ok = ok and gap <= bound
        worst = max(worst, gap / bound if bound else 0.0)

    exp_rel = abs(ci.solve_ivp(t_field, 0.0, 1.0, 2.0, cfg) - 2 * math.e) / (2 * math.e)
    vol_rel = abs(ci.solve_ivp(volterra_field, 0.0, 1.0, 1.0, cfg) - math.e) / math.e
    ok = ok and exp_rel <= 1e-9 and vol_rel <= 1e-9
    _report(
        "criterion 10",
        ok,
        f"worst semigroup gap/bound {worst:.3f}; closed-form rel errs "
        f"{exp_rel:.1e}, {vol_rel:.1e}",
    )


def test_criterion_11_cli_determinism_and_exit_codes(tmp_path):
    """Identical invocations emit byte-identical CSV; exit codes follow the
    documented map, one check per code."""
    args = [
        "converge", "--f", "exp(-s*t)", "--a", "0", "--b", "1", "--t", "1",
        "--n-min", "16", "--n-max", "2048", "--ref", "oracle", "--format", "csv",
    ]
    f1, f2 = tmp_path / "run1.csv", tmp_path / "run2.csv"
    code1 = main([*args, "--output", str(f1)])
    code2 = main([*args, "--output", str(f2)])
    deterministic = code1 == code2 == 0 and f1.read_bytes() == f2.read_bytes()

    codes = {
        0: main(["eval", "--f", "t", "--a", "0", "--b", "0", "--t", "3"]),
        2: main(["eval", "--f", "2*s + q", "--a", "0", "--b", "1", "--t", "1", "--n", "4"]),
        3: main(["eval", "--f", "log(s - 2)", "--a", "0", "--b", "1", "--t", "1", "--n", "8"]),
        4: main(["eval", "--f", "t*t", "--a", "0", "--b", "1", "--t", "3", "--n", "64"]),
        5: main(["eval", "--f", "exp(-s*t)", "--a", "0", "--b", "1", "--t", "1",
                 "--tol", "1e-12", "--n0", "16", "--n-max", "32"]),
        6: main(["group-check", "--f", "exp(-s*t)", "--a", "0", "--b", "1",
                 "--trials", "2", "--seed", "1", "--tol", "1e-12",
                 "--n0", "16", "--n-max", "32"]),
    }
    codes_ok = all(expected == actual for expected, actual in codes.items())
    ok = deterministic and codes_ok
    _report(
        "criterion 11",
        ok,
        f"byte-identical CSV: {deterministic}; exit codes: "
        + ", ".join(f"{k}->{v}" for k, v in codes.items()),
    )
