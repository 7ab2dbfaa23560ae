"""Numba kernels for the composition engine.

One step of every kernel is ``t1 = t + sg*f(u0 + u1*tag, t)*w``: the plain
Euler cell map, optionally routed through an affine time transform
(sg, u0, u1) so flow inversion reuses the same compiled code instead of
recompiling a reflected integrand per call.

Kernels never raise for bad integrand values. Any step whose new state
falls outside the open interval (lo, hi) — which also catches NaN and
overflow to infinity — stops the loop and reports (status=1, step, value);
the Python wrapper replays that single step through the guarded evaluator
to tell an integrand domain error from a genuine state escape.

The same arithmetic, expression for expression, exists in pure Python in
``flow.py`` for integrands that are not numba-compiled. Random tags use the
SplitMix64 stream from ``rng.py``, re-implemented here on uint64 so both
paths draw identical sequences.
"""

from __future__ import annotations

import numba
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV_2_53 = 1.0 / 9007199254740992.0


@numba.njit(inline="always")
def cdiv(a, b):
    # division with C-style special values: zero divisor -> NaN, so the
    # composition loop classifies it instead of an unattributable exception
    if b == 0.0:
        return np.nan
    return a / b


@numba.njit(inline="always")
def _sm64_next(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return state, (z >> _S11) * _INV_2_53


@numba.njit
def compose_arrays(f, t0, tags, widths, sg, u0, u1, lo, hi, record, trace):
    """Fold over an explicit partition.

    Returns (status, step, value, prior): on failure, value is the state
    that left the domain and prior the state just before it.
    """
    t = t0
    if record:
        trace[0] = t
    for i in range(widths.shape[0]):
        t1 = t + sg * f(u0 + u1 * tags[i], t) * widths[i]
        if not (lo < t1 < hi):
            return 1, i, t1, t
        t = t1
        if record:
            trace[i + 1] = t
    return 0, -1, t, t


@numba.njit
def compose_uniform(f, t0, a, b, n, mode, seed, sg, u0, u1, lo, hi, record, trace):
    """Fold over a uniform n-cell mesh of [a, b] without materializing it.

    Node arithmetic matches partition.uniform_partition exactly: nodes are
    a + k*h with the last node forced to b, cell widths are node
    differences, and tags follow mode (0 left, 1 right, 2 midpoint,
    3 random via SplitMix64(seed), one draw per cell in ascending order).
    """
    t = t0
    if record:
        trace[0] = t
    if n == 0:
        return 0, -1, t, t
    h = (b - a) / n
    state = seed
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
            state, u = _sm64_next(state)
            tag = s_lo + u * w
        t1 = t + sg * f(u0 + u1 * tag, t) * w
        if not (lo < t1 < hi):
            return 1, i, t1, t
        t = t1
        if record:
            trace[i + 1] = t
        s_lo = s_hi
    return 0, -1, t, t
