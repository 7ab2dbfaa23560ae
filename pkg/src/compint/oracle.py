"""High-accuracy reference solver for the scalar IVP y' = f(x, y), y(a) = t.

This is the ground truth the composition engine is measured against, so it
is implemented in-repo with fixed, documented constants: an explicit
Runge-Kutta-Fehlberg 4(5) embedded pair, propagating the fifth-order
solution (local extrapolation), with a PI step-size controller. At the
default tolerances it sits several orders beyond the first-order scheme
under test.

Controller constants (fixed per release for reproducibility):
safety = 0.9, PI exponents alpha = 0.14 = 0.7/5 and beta = 0.08 = 0.4/5,
step factor clamped to [0.2, 10.0], growth capped at 1.0 immediately after
a rejected step. The first step uses the standard curvature heuristic
unless ``init_step`` overrides it.

Pure function of its inputs; concurrent calls are safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import OracleError
from .flow import ScalarField

__all__ = ["OracleConfig", "solve_ivp"]

# Fehlberg 4(5) tableau
_C = (0.0, 0.25, 0.375, 12.0 / 13.0, 1.0, 0.5)
_A = (
    (),
    (0.25,),
    (3.0 / 32.0, 9.0 / 32.0),
    (1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0),
    (439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0),
    (-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0),
)
_B5 = (16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0)
# b5 - b4: local truncation error estimate of the fourth-order solution
_TR = (1.0 / 360.0, 0.0, -128.0 / 4275.0, -2197.0 / 75240.0, 1.0 / 50.0, 2.0 / 55.0)

_SAFETY = 0.9
_ALPHA = 0.7 / 5.0
_BETA = 0.4 / 5.0
_FACTOR_MIN = 0.2
_FACTOR_MAX = 10.0


@dataclass(frozen=True)
class OracleConfig:
    """Tolerances and budget for the reference solve.

    ``init_step`` of None selects the automatic first-step heuristic.
    """

    rtol: float = 1e-12
    atol: float = 1e-14
    max_steps: int = 100_000
    init_step: float | None = None

    def __post_init__(self):
        if not (self.rtol > 0.0 and self.atol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")
        if self.init_step is not None and not self.init_step > 0.0:
            raise ValueError("init_step must be positive")


def _initial_step(f: ScalarField, a: float, b: float, t: float, cfg: OracleConfig) -> float:
    scale = cfg.atol + cfg.rtol * abs(t)
    f0 = f(a, t)
    d0 = abs(t) / scale
    d1 = abs(f0) / scale
    h0 = 1e-6 if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, b - a)
    y1 = t + h0 * f0
    f1 = f(a + h0, y1)
    d2 = abs(f1 - f0) / scale / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100.0 * h0, h1, b - a)


def solve_ivp(
    f: ScalarField, a: float, b: float, t: float, cfg: OracleConfig = OracleConfig()
) -> float:
    """Return y(b) for y' = f(x, y), y(a) = t.

    Deterministic for a fixed config. Raises :class:`OracleError` when the
    step budget is exhausted (probable blow-up or stiffness) or the step
    size underflows; integrand domain errors propagate.
    """
    if a > b:
        raise ValueError(f"need a <= b, got a={a!r}, b={b!r}")
    if a == b:
        return t
    h = cfg.init_step if cfg.init_step is not None else _initial_step(f, a, b, t, cfg)
    h = min(h, b - a)
    x, y = a, t
    err_prev = 1.0
    rejected = False
    attempts = 0
    while x < b:
        attempts += 1
        if attempts > cfg.max_steps:
            raise OracleError(
                f"step budget {cfg.max_steps} exhausted at x = {x!r}: "
                "probable blow-up or stiffness"
            )
        if h < 1e-15 * max(1.0, abs(x)):
            raise OracleError(f"step size underflow at x = {x!r}")
        h = min(h, b - x)
        k = [f(x, y)]
        for i in range(1, 6):
            yi = y
            for aij, kj in zip(_A[i], k):
                yi += h * aij * kj
            k.append(f(x + _C[i] * h, yi))
        y5 = y
        for bi, ki in zip(_B5, k):
            y5 += h * bi * ki
        err = 0.0
        for ti, ki in zip(_TR, k):
            err += ti * ki
        err = abs(h * err)
        scale = cfg.atol + cfg.rtol * max(abs(y), abs(y5))
        ratio = err / scale
        if math.isfinite(y5) and ratio <= 1.0:
            x += h
            y = y5
            e = max(ratio, 1e-16)
            factor = _SAFETY * e**-_ALPHA * max(err_prev, 1e-16) ** _BETA
            if rejected:
                factor = min(factor, 1.0)
            err_prev = e
            rejected = False
        else:
            if not math.isfinite(y5):
                factor = _FACTOR_MIN
            else:
                factor = _SAFETY * ratio**-_ALPHA
            rejected = True
        h *= min(max(factor, _FACTOR_MIN), _FACTOR_MAX)
    return y
