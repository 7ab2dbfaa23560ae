"""Analytically known compositional integrals, used as exact references.

Each case pairs an integrand family with its closed-form flow value:

* ``constant_in_t``: f(s, t) = g(s) gives t + integral of g — the flow
  degenerates to ordinary integration.
* ``exp_flow``: f(s, t) = t gives t * e^(b-a).
* ``volterra``: f(s, t) = p(s) * t gives t * exp(integral of p), the
  multiplicative (product) integral of p.
* ``exp_power_k``: f(s, t) = k * s^(k-1) * t from 0 with t = 1 gives
  e^(b^k), whose Riemann composition is a finite product generalizing
  (1 + x/n)^n.
* ``theorem2_exp_neg_st``: f(s, t) = e^(-st) on [0, 1] x (0, inf). No
  elementary closed form exists; this case is explicitly oracle-backed and
  flagged as such so nothing mislabels it "exact".

Scalar integrals here are evaluated by fixed-order Gauss-Legendre
quadrature, deliberately not by the IVP oracle: the two reference paths
fail in different ways, which keeps reference errors independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .flow import ScalarField
from .oracle import OracleConfig, solve_ivp

__all__ = [
    "ClosedFormCase",
    "exact_value",
    "gauss_legendre",
    "product_limit_exp_k",
    "constant_in_t_case",
    "exp_flow_case",
    "volterra_case",
    "exp_power_case",
    "theorem2_case",
    "CASE_IDS",
]

CASE_IDS = (
    "constant_in_t",
    "exp_flow",
    "volterra",
    "exp_power_k",
    "theorem2_exp_neg_st",
)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


def gauss_legendre(g: Callable[[float], float], a: float, b: float) -> float:
    """64-node Gauss-Legendre integral of g over [a, b].

    Exact to machine precision for the smooth, desk-scale integrands the
    closed forms need.
    """
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    return half * float(sum(w * g(mid + half * x) for x, w in zip(_GL_NODES, _GL_WEIGHTS)))


@dataclass(frozen=True)
class ClosedFormCase:
    """A reference flow: its id, integrand, and exact value function.

    ``oracle_backed`` marks cases whose "exact" value is itself a
    high-accuracy solve rather than a formula.
    """

    case_id: str
    integrand: ScalarField = field(repr=False)
    exact: Callable[[float, float, float], float] = field(repr=False)
    oracle_backed: bool = False

    def exact_value(self, a: float, b: float, t: float) -> float:
        return self.exact(a, b, t)


def exact_value(case: ClosedFormCase, a: float, b: float, t: float) -> float:
    """The analytic flow value of the case at (a, b, t).

    Raises ValueError outside the case's stated parameter domain.
    """
    return case.exact(a, b, t)


def constant_in_t_case(g: Callable[[float], float]) -> ClosedFormCase:
    """f(s, t) = g(s): the flow is t + the ordinary integral of g."""

    def exact(a: float, b: float, t: float) -> float:
        if a > b:
            raise ValueError("need a <= b")
        return t + gauss_legendre(g, a, b)

    return ClosedFormCase("constant_in_t", lambda s, t: g(s), exact)


def exp_flow_case() -> ClosedFormCase:
    """f(s, t) = t: the flow is t * e^(b-a)."""

    def exact(a: float, b: float, t: float) -> float:
        if a > b:
            raise ValueError("need a <= b")
        return t * math.exp(b - a)

    return ClosedFormCase("exp_flow", lambda s, t: t, exact)


def volterra_case(p: Callable[[float], float]) -> ClosedFormCase:
    """f(s, t) = p(s) * t: the flow is t * exp(integral of p)."""

    def exact(a: float, b: float, t: float) -> float:
        if a > b:
            raise ValueError("need a <= b")
        return t * math.exp(gauss_legendre(p, a, b))

    return ClosedFormCase("volterra", lambda s, t: p(s) * t, exact)


def exp_power_case(k: int) -> ClosedFormCase:
    """f(s, t) = k * s^(k-1) * t from a = 0 with t = 1: the flow is e^(b^k)."""
    if k < 1 or k != int(k):
        raise ValueError(f"k must be a positive integer, got {k!r}")

    def exact(a: float, b: float, t: float) -> float:
        if a != 0.0:
            raise ValueError("exp_power_k is stated from a = 0")
        if t != 1.0:
            raise ValueError("exp_power_k is stated at t = 1")
        if b < 0.0:
            raise ValueError("need b >= 0")
        return math.exp(b**k)

    return ClosedFormCase(
        "exp_power_k", lambda s, t: k * s ** (k - 1) * t, exact
    )


def theorem2_case(cfg: OracleConfig = OracleConfig()) -> ClosedFormCase:
    """f(s, t) = e^(-st) on [0, 1] with t > 0. Oracle-backed: existence and
    uniqueness hold but there is no elementary formula."""

    def f(s: float, t: float) -> float:
        return math.exp(-s * t)

    def exact(a: float, b: float, t: float) -> float:
        if not (0.0 <= a <= b <= 1.0):
            raise ValueError("theorem2_exp_neg_st needs 0 <= a <= b <= 1")
        if not t > 0.0:
            raise ValueError("theorem2_exp_neg_st needs t > 0")
        return solve_ivp(f, a, b, t, cfg)

    return ClosedFormCase("theorem2_exp_neg_st", f, exact, oracle_backed=True)


def make_case(case_id: str, *, p: Callable[[float], float] | None = None, k: int | None = None) -> ClosedFormCase:
    """Construct a case by id; volterra/constant_in_t need ``p``,
    exp_power_k needs ``k``."""
    if case_id == "constant_in_t":
        if p is None:
            raise ValueError("constant_in_t needs the scalar integrand p")
        return constant_in_t_case(p)
    if case_id == "exp_flow":
        return exp_flow_case()
    if case_id == "volterra":
        if p is None:
            raise ValueError("volterra needs the scalar factor p")
        return volterra_case(p)
    if case_id == "exp_power_k":
        if k is None:
            raise ValueError("exp_power_k needs the exponent k")
        return exp_power_case(k)
    if case_id == "theorem2_exp_neg_st":
        return theorem2_case()
    raise ValueError(f"unknown closed-form case {case_id!r}")


def product_limit_exp_k(k: int, x: float, n: int) -> float:
    """The finite left-tag product for e^(x^k):

        prod_{i=0}^{n-1} (1 + k * i^(k-1) * (x/n)^k)

    computed sequentially in ascending i. Converges to e^(x^k) as n grows;
    for k = 1 this is exactly (1 + x/n)^n.
    """
    if k < 1 or k != int(k):
        raise ValueError(f"k must be a positive integer, got {k!r}")
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n!r}")
    if x < 0.0:
        raise ValueError(f"need x >= 0, got {x!r}")
    step_k = (x / n) ** k
    return math.prod(1.0 + k * float(i) ** (k - 1) * step_k for i in range(n))
