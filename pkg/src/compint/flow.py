"""The composition engine.

Evaluates Riemann compositions — the nested Euler cell maps
``t -> t + f(s*, t) * ds`` applied innermost-first from ``a`` — refines
them dyadically into a converged compositional integral, and exposes the
group-law, inversion, and substitution operations of the flow.

The composition is computed as a left fold over the ascending cell
sequence, which is exactly the sequential recurrence

    t_0 = t,   t_{k+1} = t_k + f(tag_k, t_k) * width_k,

rather than literal nested closures: identical semantics, O(1) memory, and
it makes the concatenation law hold bit-for-bit, because composing over a
concatenated partition performs the same floating-point operations in the
same order as composing the halves in turn.

Every step checks the new state against the spec's open state interval.
NaN and overflow to infinity fail that check too, so blow-up of the
underlying ODE is reported as a state escape rather than leaking
non-finite values. Integrand domain violations raise
:class:`~compint.errors.DomainError` instead.

All operations are pure functions of their inputs and safe to call
concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from numba.core.dispatcher import Dispatcher

from . import _kernels
from .errors import NoConvergenceError, StateEscapeError
from .partition import LEFT, Partition, TagRule, concat
from .rng import SplitMix64

__all__ = [
    "ScalarField",
    "FlowSpec",
    "FlowResult",
    "ReflectedField",
    "SubstitutedField",
    "riemann_composition",
    "compositional_integral",
    "compose_flows",
    "inverse_flow",
    "substituted_flow",
    "DEFAULT_N0",
    "DEFAULT_N_MAX",
]

ScalarField = Callable[[float, float], float]

DEFAULT_N0 = 16
DEFAULT_N_MAX = 1 << 28

_MODE = {"left": 0, "right": 1, "midpoint": 2, "random": 3}
_U64_MASK = (1 << 64) - 1
_NO_TRACE = np.empty(1)


@dataclass(frozen=True)
class FlowSpec:
    """An integrand together with its interval and open state domain.

    ``domain`` is the open interval of states on which compositions are
    meaningful; intermediate states are checked against it at every step.
    """

    f: ScalarField
    a: float
    b: float
    domain: tuple[float, float] = (-math.inf, math.inf)

    def __post_init__(self):
        if not self.a <= self.b:
            raise ValueError(f"need a <= b, got a={self.a!r}, b={self.b!r}")
        if not self.domain[0] < self.domain[1]:
            raise ValueError(f"empty state domain {self.domain!r}")


@dataclass(frozen=True, eq=False)
class FlowResult:
    """Value of one Riemann composition plus its mesh metadata.

    When requested, ``trace`` holds the ascending intermediate states
    t_0 ... t_n with t_0 the initial state and t_n the value; for generated
    uniform meshes ``mesh`` is the nominal cell width (b - a)/n.
    """

    value: float
    n: int
    mesh: float
    tag_rule: TagRule | None
    trace: np.ndarray | None = None


class ReflectedField:
    """The inverse flow's integrand: -f(c - s, t) with c = a + b.

    The engine evaluates it through the same compiled kernel as ``f`` by
    composing the reflection into the kernel's affine time transform, so
    inverting a flow never recompiles anything.
    """

    def __init__(self, inner: ScalarField, c: float):
        self.inner = inner
        self.c = c

    def __call__(self, s: float, t: float) -> float:
        return -self.inner(self.c - s, t)

    def __repr__(self) -> str:
        return f"ReflectedField({self.inner!r}, c={self.c!r})"


class SubstitutedField:
    """Pullback f(gamma(s), t) * gamma_prime(s) of f along a curve."""

    def __init__(
        self,
        inner: ScalarField,
        gamma: Callable[[float], float],
        gamma_prime: Callable[[float], float],
    ):
        self.inner = inner
        self.gamma = gamma
        self.gamma_prime = gamma_prime

    def __call__(self, s: float, t: float) -> float:
        return self.inner(self.gamma(s), t) * self.gamma_prime(s)


def _resolve(field: ScalarField):
    """Unwrap nested reflections into one affine transform.

    Returns (base, jit, sg, u0, u1) such that
    field(s, t) == sg * base(u0 + u1*s, t), with ``jit`` the numba
    dispatcher of ``base`` when it has one.
    """
    sg, u0, u1 = 1.0, 0.0, 1.0
    base = field
    while isinstance(base, ReflectedField):
        sg = -sg
        u0 = base.c - u0
        u1 = -u1
        base = base.inner
    jit = getattr(base, "jit", None)
    if jit is None and isinstance(base, Dispatcher):
        jit = base
    return base, jit, sg, u0, u1


def _check_initial(t: float, lo: float, hi: float) -> None:
    if not (lo < t < hi):
        raise StateEscapeError(
            -1, t, f"initial state {t!r} outside the open state domain ({lo!r}, {hi!r})"
        )


def _classify_failure(base, sg, u0, u1, tag, prior, width, step, bad_value):
    # Replay the failing step through the guarded evaluator: a DomainError
    # from the integrand propagates, anything else was a genuine escape.
    base(u0 + u1 * tag, prior)
    raise StateEscapeError(step, bad_value)


def _fold_arrays(field, t0, tags, widths, lo, hi, want_trace):
    base, jit, sg, u0, u1 = _resolve(field)
    _check_initial(t0, lo, hi)
    if jit is not None:
        trace = np.empty(len(widths) + 1) if want_trace else _NO_TRACE
        status, step, value, prior = _kernels.compose_arrays(
            jit, t0, tags, widths, sg, u0, u1, lo, hi, want_trace, trace
        )
        if status:
            _classify_failure(
                base, sg, u0, u1, tags[step], prior, widths[step], step, value
            )
        return value, (trace if want_trace else None)
    t = t0
    out = [t] if want_trace else None
    for i in range(len(widths)):
        t1 = t + sg * base(u0 + u1 * tags[i], t) * widths[i]
        if not (lo < t1 < hi):
            raise StateEscapeError(i, t1)
        t = t1
        if want_trace:
            out.append(t)
    return t, (np.asarray(out) if want_trace else None)


def _fold_uniform(field, t0, a, b, n, rule, lo, hi, want_trace):
    base, jit, sg, u0, u1 = _resolve(field)
    _check_initial(t0, lo, hi)
    mode = _MODE[rule.kind]
    seed = np.uint64((rule.seed or 0) & _U64_MASK)
    if jit is not None:
        trace = np.empty(n + 1) if want_trace else _NO_TRACE
        status, step, value, prior = _kernels.compose_uniform(
            jit, t0, a, b, n, mode, seed, sg, u0, u1, lo, hi, want_trace, trace
        )
        if status:
            tag = _uniform_tag(a, b, n, mode, rule.seed, step)
            w = _uniform_width(a, b, n, step)
            _classify_failure(base, sg, u0, u1, tag, prior, w, step, value)
        return value, (trace if want_trace else None)
    # pure-Python twin of _kernels.compose_uniform, same expressions
    t = t0
    out = [t] if want_trace else None
    if n == 0:
        return t, (np.asarray(out) if want_trace else None)
    h = (b - a) / n
    gen = SplitMix64(rule.seed or 0)
    s_lo = a
    for i in range(n):
        s_hi = b if i == n - 1 else a + (i + 1) * h
        w = s_hi - s_lo
        if mode == 0:
            tag = s_lo
        elif mode == 1:
            tag = s_hi
        elif mode == 2:
            tag = s_lo + 0.5 * w
        else:
            tag = s_lo + gen.next_float() * w
        t1 = t + sg * base(u0 + u1 * tag, t) * w
        if not (lo < t1 < hi):
            raise StateEscapeError(i, t1)
        t = t1
        if want_trace:
            out.append(t)
        s_lo = s_hi
    return t, (np.asarray(out) if want_trace else None)


def _uniform_width(a, b, n, i):
    h = (b - a) / n
    s_lo = a + i * h if i > 0 else a
    s_hi = b if i == n - 1 else a + (i + 1) * h
    return s_hi - s_lo


def _uniform_tag(a, b, n, mode, seed, i):
    h = (b - a) / n
    s_lo = a + i * h if i > 0 else a
    s_hi = b if i == n - 1 else a + (i + 1) * h
    if mode == 0:
        return s_lo
    if mode == 1:
        return s_hi
    if mode == 2:
        return s_lo + 0.5 * (s_hi - s_lo)
    gen = SplitMix64(seed or 0)
    u = 0.0
    for _ in range(i + 1):
        u = gen.next_float()
    return s_lo + u * (s_hi - s_lo)


def riemann_composition(
    spec: FlowSpec, t: float, p: Partition, want_trace: bool = False
) -> FlowResult:
    """Evaluate the nested composition of f over a tagged partition.

    The cell adjacent to ``a`` is applied first (innermost), matching the
    sequential t_0 ... t_n recurrence. Deterministic for fixed inputs.

    Raises :class:`StateEscapeError` if any intermediate state leaves the
    spec's open domain (reporting the cell index and offending value) and
    propagates :class:`DomainError` from the integrand.
    """
    if p.a != spec.a or p.b != spec.b:
        raise ValueError(
            f"partition spans [{p.a!r}, {p.b!r}], spec wants [{spec.a!r}, {spec.b!r}]"
        )
    lo, hi = spec.domain
    tags = np.asarray(p.tags, dtype=np.float64)
    widths = np.asarray(p.widths, dtype=np.float64)
    value, trace = _fold_arrays(spec.f, t, tags, widths, lo, hi, want_trace)
    return FlowResult(value, p.n, p.mesh, p.rule, trace)


def _uniform_value(spec: FlowSpec, t: float, n: int, rule: TagRule) -> float:
    lo, hi = spec.domain
    value, _ = _fold_uniform(spec.f, t, spec.a, spec.b, n, rule, lo, hi, False)
    return value


def compositional_integral(
    spec: FlowSpec,
    t: float,
    tol: float,
    n0: int = DEFAULT_N0,
    n_max: int = DEFAULT_N_MAX,
    rule: TagRule = LEFT,
) -> FlowResult:
    """Refine uniform-mesh Riemann compositions to convergence.

    Evaluates at n0, 2*n0, 4*n0, ... and returns the first value V_2n with
    ``|V_2n - V_n| <= tol * (1 + |V_2n|)``; the result carries the final
    cell count. Each level performs exactly the operations
    ``riemann_composition`` would on the matching uniform partition.

    Raises :class:`NoConvergenceError` once ``n_max`` (a power-of-two
    multiple of ``n0``) is exhausted.
    """
    if not tol > 0.0:
        raise ValueError(f"tolerance must be positive, got {tol!r}")
    if n0 < 1:
        raise ValueError(f"n0 must be at least 1, got {n0}")
    q, r = divmod(n_max, n0)
    if r != 0 or q & (q - 1) != 0:
        raise ValueError(f"n_max={n_max} is not a power-of-two multiple of n0={n0}")
    lo, hi = spec.domain
    if spec.a == spec.b:
        _check_initial(t, lo, hi)
        return FlowResult(t, 0, 0.0, rule)
    v_prev = _uniform_value(spec, t, n0, rule)
    gap = math.inf
    n = 2 * n0
    while n <= n_max:
        v = _uniform_value(spec, t, n, rule)
        gap = abs(v - v_prev)
        if gap <= tol * (1.0 + abs(v)):
            return FlowResult(v, n, (spec.b - spec.a) / n, rule)
        v_prev = v
        n *= 2
    raise NoConvergenceError(n_max, v_prev, gap)


def compose_flows(
    spec: FlowSpec,
    t: float,
    a: float,
    b: float,
    c: float,
    p_ab: Partition,
    p_bc: Partition,
) -> tuple[float, float]:
    """Chained versus direct composition across a split a <= b <= c.

    Returns ``(chained, direct)`` where chained applies the [b, c]
    composition to the [a, b] composition of t, and direct composes over
    the concatenated partition in one pass. The two are bit-identical by
    construction: the evaluation sequences are the same floating-point
    operations in the same order.
    """
    if not a <= b <= c:
        raise ValueError(f"need a <= b <= c, got {a!r}, {b!r}, {c!r}")
    mid = riemann_composition(replace(spec, a=a, b=b), t, p_ab)
    chained = riemann_composition(replace(spec, a=b, b=c), mid.value, p_bc).value
    direct = riemann_composition(replace(spec, a=a, b=c), t, concat(p_ab, p_bc)).value
    return chained, direct


def inverse_flow(
    spec: FlowSpec,
    t: float,
    tol: float,
    n0: int = DEFAULT_N0,
    n_max: int = DEFAULT_N_MAX,
    rule: TagRule = LEFT,
) -> float:
    """The inverse of the flow over [a, b], evaluated at t.

    Computes the compositional integral of the reflected, negated integrand
    g(s, t) = -f(b + a - s, t) over the same interval; composing it after
    the forward flow returns the initial state as tol -> 0.
    """
    g = ReflectedField(spec.f, spec.a + spec.b)
    return compositional_integral(replace(spec, f=g), t, tol, n0, n_max, rule).value


def substituted_flow(
    spec: FlowSpec,
    gamma: Callable[[float], float],
    gamma_prime: Callable[[float], float],
    alpha: float,
    beta: float,
    t: float,
    p: Partition,
    want_trace: bool = False,
) -> FlowResult:
    """Riemann composition of the pulled-back integrand over [alpha, beta].

    ``gamma`` must map [alpha, beta] onto [spec.a, spec.b] with
    ``gamma(alpha) == a`` and ``gamma(beta) == b`` (within 1e-12), and
    ``gamma_prime`` is its supplied derivative — supplied, not
    finite-differenced, so substitution does not contaminate convergence
    measurements. Converges to the same compositional integral as the
    direct form.
    """
    ga, gb = gamma(alpha), gamma(beta)
    if abs(ga - spec.a) > 1e-12 or abs(gb - spec.b) > 1e-12:
        raise ValueError(
            f"gamma endpoints ({ga!r}, {gb!r}) do not match the interval "
            f"[{spec.a!r}, {spec.b!r}]"
        )
    if p.a != alpha or p.b != beta:
        raise ValueError(
            f"partition spans [{p.a!r}, {p.b!r}], expected [{alpha!r}, {beta!r}]"
        )
    field = SubstitutedField(spec.f, gamma, gamma_prime)
    lo, hi = spec.domain
    tags = np.asarray(p.tags, dtype=np.float64)
    widths = np.asarray(p.widths, dtype=np.float64)
    value, trace = _fold_arrays(field, t, tags, widths, lo, hi, want_trace)
    return FlowResult(value, p.n, p.mesh, p.rule, trace)
