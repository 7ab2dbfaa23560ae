"""Request handlers: one function per endpoint, shared by the FastAPI app
and the CLI's in-process mode. Handlers take a request model, run the
library, and return a response model; library exceptions propagate and are
mapped to HTTP payloads / exit codes by the callers."""

from __future__ import annotations

import math

from ..closedforms import exact_value, make_case, product_limit_exp_k
from ..exprlang import compile_curve, compile_field, uses_var
from ..flow import (
    FlowSpec,
    compositional_integral,
    inverse_flow,
    riemann_composition,
    substituted_flow,
)
from ..harness import convergence_table, group_law_audit
from ..oracle import OracleConfig, solve_ivp
from ..partition import TagRule, uniform_partition
from . import models as m

ORACLE_REF = "oracle"
CASE_PREFIX = "case:"


def _spec(f_src: str, a: float, b: float, t_min: float | None, t_max: float | None) -> FlowSpec:
    lo = -math.inf if t_min is None else t_min
    hi = math.inf if t_max is None else t_max
    return FlowSpec(compile_field(f_src), a, b, (lo, hi))


def _rule(tags: str, seed: int) -> TagRule:
    return TagRule(tags, seed) if tags == "random" else TagRule(tags)


def _reference(
    label: str, spec: FlowSpec, t: float, p_src: str | None, k: int | None
) -> tuple[str, float]:
    """Resolve a reference descriptor to its value; provenance stays in the
    returned label."""
    if label == ORACLE_REF:
        return label, solve_ivp(spec.f, spec.a, spec.b, t, OracleConfig())
    if label.startswith(CASE_PREFIX):
        case_id = label[len(CASE_PREFIX):]
        p = None
        if p_src is not None:
            curve = compile_curve(p_src)
            p = curve
        case = make_case(case_id, p=p, k=k)
        return label, exact_value(case, spec.a, spec.b, t)
    raise ValueError(f'unknown reference {label!r}: use "oracle" or "case:<id>"')


def _finite_or_none(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return x


def handle_eval(req: m.EvalRequest) -> m.EvalResponse:
    spec = _spec(req.f, req.a, req.b, req.t_min, req.t_max)
    if req.n is not None:
        p = uniform_partition(req.a, req.b, req.n, _rule(req.tags, req.seed))
        res = riemann_composition(spec, req.t, p)
    else:
        res = compositional_integral(
            spec, req.t, req.tol, req.n0, req.n_max, _rule(req.tags, req.seed)
        )
    reference = reference_value = abs_err = rel_err = None
    if req.ref is not None:
        reference, reference_value = _reference(req.ref, spec, req.t, req.p, req.k)
        abs_err = abs(res.value - reference_value)
        rel_err = abs_err / abs(reference_value) if reference_value != 0.0 else None
    return m.EvalResponse(
        value=res.value,
        n=res.n,
        mesh=res.mesh,
        tags=req.tags,
        reference=reference,
        reference_value=reference_value,
        abs_error=abs_err,
        rel_error=_finite_or_none(rel_err),
    )


def handle_converge(req: m.ConvergeRequest) -> m.ConvergeResponse:
    spec = _spec(req.f, req.a, req.b, req.t_min, req.t_max)
    label, ref_value = _reference(req.ref, spec, req.t, req.p, req.k)
    n_list = []
    n = req.n_min
    while n <= req.n_max:
        n_list.append(n)
        n *= 2
    report = convergence_table(
        spec, req.t, _rule(req.tags, req.seed), n_list, ref_value, label
    )
    rows = [
        m.ConvergenceRowModel(
            n=r.n,
            mesh=r.mesh,
            value=r.value,
            abs_error=r.abs_error,
            rel_error=_finite_or_none(r.rel_error),
        )
        for r in report.rows
    ]
    ci = report.order_ci
    return m.ConvergeResponse(
        rows=rows,
        order=report.order,
        order_ci_low=None if ci is None else ci[0],
        order_ci_high=None if ci is None else ci[1],
        reference=label,
        reference_value=ref_value,
        diagnostic=report.diagnostic,
    )


def handle_group_check(req: m.GroupCheckRequest) -> m.GroupCheckResponse:
    spec = _spec(req.f, req.a, req.b, req.t_min, req.t_max)
    summary = group_law_audit(
        spec,
        req.trials,
        req.seed,
        req.tol,
        t_range=(req.t_low, req.t_high),
        n0=req.n0,
        n_max=req.n_max,
        max_cells=req.max_cells,
    )
    return m.GroupCheckResponse(
        trials=summary.trials,
        seed=summary.seed,
        tol=summary.tol,
        bitwise_passes=summary.bitwise_passes,
        chain_passes=summary.chain_passes,
        roundtrip_passes=summary.roundtrip_passes,
        worst_bitwise_gap=summary.worst_bitwise_gap,
        worst_chain_gap=summary.worst_chain_gap,
        worst_roundtrip_gap=summary.worst_roundtrip_gap,
        failures=list(summary.failures),
        all_passed=summary.all_passed,
    )


def handle_inverse(req: m.InverseRequest) -> m.InverseResponse:
    spec = _spec(req.f, req.a, req.b, req.t_min, req.t_max)
    value = inverse_flow(spec, req.t, req.tol, req.n0, req.n_max)
    return m.InverseResponse(value=value, tol=req.tol)


def handle_subst(req: m.SubstRequest) -> m.SubstResponse:
    spec = _spec(req.f, req.a, req.b, req.t_min, req.t_max)
    gamma = compile_curve(req.gamma)
    gamma_prime = compile_curve(req.gamma_prime)
    p = uniform_partition(req.alpha, req.beta, req.n, _rule(req.tags, req.seed))
    res = substituted_flow(
        spec, gamma, gamma_prime, req.alpha, req.beta, req.t, p
    )
    return m.SubstResponse(value=res.value, n=res.n, mesh=res.mesh)


def handle_closed_form(req: m.ClosedFormRequest) -> m.ClosedFormResponse:
    p = compile_curve(req.p) if req.p is not None else None
    if p is not None and uses_var(p.ast, "t"):
        raise ValueError("the scalar expression p may only use s")
    case = make_case(req.case, p=p, k=req.k)
    value = exact_value(case, req.a, req.b, req.t)
    product_value = None
    if req.product_n is not None:
        if req.case != "exp_power_k":
            raise ValueError("product_n applies only to exp_power_k")
        x = req.x if req.x is not None else req.b
        product_value = product_limit_exp_k(req.k, x, req.product_n)
    return m.ClosedFormResponse(
        case=req.case,
        value=value,
        oracle_backed=case.oracle_backed,
        product_value=product_value,
    )
