"""compint: Riemann compositions and compositional integrals.

The flow of a first-order ODE y' = f(x, y) from y(a) = t, built the way a
Riemann sum builds an integral: nested Euler cell maps
t -> t + f(s*, t) * ds over a tagged partition, refined to convergence.
The library evaluates these compositions, verifies the group, inversion,
and substitution laws they satisfy, and measures convergence against a
high-accuracy classical IVP solver and analytic closed forms.
"""

__version__ = "0.1.0"

from .errors import (
    DomainError,
    ExprSyntaxError,
    NoConvergenceError,
    OracleError,
    StateEscapeError,
)
from .exprlang import (
    CompiledCurve,
    CompiledField,
    compile_curve,
    compile_field,
    eval_expr,
    parse_expr,
    to_source,
)
from .partition import (
    LEFT,
    MIDPOINT,
    RIGHT,
    Partition,
    TagRule,
    concat,
    random_rule,
    refine_dyadic,
    uniform_partition,
)
from .flow import (
    FlowResult,
    FlowSpec,
    ReflectedField,
    SubstitutedField,
    compose_flows,
    compositional_integral,
    inverse_flow,
    riemann_composition,
    substituted_flow,
)
from .oracle import OracleConfig, solve_ivp
from .closedforms import (
    ClosedFormCase,
    constant_in_t_case,
    exact_value,
    exp_flow_case,
    exp_power_case,
    gauss_legendre,
    product_limit_exp_k,
    theorem2_case,
    volterra_case,
)
from .harness import (
    AuditSummary,
    ConvergenceReport,
    ConvergenceRow,
    convergence_table,
    fit_order,
    group_law_audit,
)
from .rng import SplitMix64

__all__ = [
    "__version__",
    "DomainError",
    "ExprSyntaxError",
    "NoConvergenceError",
    "OracleError",
    "StateEscapeError",
    "CompiledCurve",
    "CompiledField",
    "compile_curve",
    "compile_field",
    "eval_expr",
    "parse_expr",
    "to_source",
    "LEFT",
    "MIDPOINT",
    "RIGHT",
    "Partition",
    "TagRule",
    "concat",
    "random_rule",
    "refine_dyadic",
    "uniform_partition",
    "FlowResult",
    "FlowSpec",
    "ReflectedField",
    "SubstitutedField",
    "compose_flows",
    "compositional_integral",
    "inverse_flow",
    "riemann_composition",
    "substituted_flow",
    "OracleConfig",
    "solve_ivp",
    "ClosedFormCase",
    "constant_in_t_case",
    "exact_value",
    "exp_flow_case",
    "exp_power_case",
    "gauss_legendre",
    "product_limit_exp_k",
    "theorem2_case",
    "volterra_case",
    "AuditSummary",
    "ConvergenceReport",
    "ConvergenceRow",
    "convergence_table",
    "fit_order",
    "group_law_audit",
    "SplitMix64",
]
