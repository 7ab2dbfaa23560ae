"""Convergence measurement and law checking.

Produces error tables against a reference value, fits the empirical
convergence order by least squares on (log mesh, log error), and runs
seeded randomized audits of the flow's group structure. Everything here is
deterministic given its inputs: randomness comes exclusively from the
SplitMix64 stream documented in ``rng.py``, so any port of this library
reproduces the same trial sequences from the same seed.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, NoConvergenceError, OracleError, StateEscapeError
from .flow import (
    DEFAULT_N0,
    DEFAULT_N_MAX,
    FlowSpec,
    compose_flows,
    compositional_integral,
    inverse_flow,
    riemann_composition,
)
from .partition import Partition, TagRule, uniform_partition
from .rng import SplitMix64

__all__ = [
    "ConvergenceRow",
    "ConvergenceReport",
    "convergence_table",
    "AuditSummary",
    "group_law_audit",
    "fit_order",
    "ROUNDING_FLOOR",
]

# Rows at or below this absolute error are rounding noise and are excluded
# from the order fit.
ROUNDING_FLOOR = 100.0 * sys.float_info.epsilon

# two-sided 95% Student-t critical values by degrees of freedom
_T95 = {
    1: 12.706, 2: 4.303, 3: 3.182, 4: 2.776, 5: 2.571, 6: 2.447, 7: 2.365,
    8: 2.306, 9: 2.262, 10: 2.228, 11: 2.201, 12: 2.179, 13: 2.160,
    14: 2.145, 15: 2.131, 16: 2.120, 17: 2.110, 18: 2.101, 19: 2.093,
    20: 2.086, 21: 2.080, 22: 2.074, 23: 2.069, 24: 2.064, 25: 2.060,
    26: 2.056, 27: 2.052, 28: 2.048, 29: 2.045, 30: 2.042,
}


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    mesh: float
    value: float
    abs_error: float
    rel_error: float


@dataclass(frozen=True)
class ConvergenceReport:
    """Error table plus the fitted order with its 95% interval.

    ``order`` is None when fewer than two rows sit above the rounding
    floor; ``diagnostic`` is set when the table was cut short by a state
    escape (the rows computed so far are kept).
    """

    rows: tuple[ConvergenceRow, ...]
    order: float | None
    order_ci: tuple[float, float] | None
    reference_label: str
    reference_value: float
    diagnostic: str | None = None


def fit_order(
    rows: tuple[ConvergenceRow, ...]
) -> tuple[float | None, tuple[float, float] | None]:
    """Least-squares slope of log(abs_error) against log(mesh).

    Rows with abs_error <= 100*eps are rounding-level and excluded so they
    cannot corrupt the slope. Needs two surviving rows for a slope and
    three for an interval (Student-t on the slope's standard error).
    """
    pts = [(r.mesh, r.abs_error) for r in rows if r.abs_error > ROUNDING_FLOOR]
    if len(pts) < 2:
        return None, None
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    if len(pts) == 2:
        return float(slope), None
    resid = y - (slope * x + intercept)
    dof = len(pts) - 2
    sxx = float(np.sum((x - x.mean()) ** 2))
    se = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    tcrit = _T95.get(dof, 1.96)
    return float(slope), (float(slope - tcrit * se), float(slope + tcrit * se))


def convergence_table(
    spec: FlowSpec,
    t: float,
    rule: TagRule,
    n_list: list[int] | tuple[int, ...],
    reference: float,
    reference_label: str = "reference",
) -> ConvergenceReport:
    """One Riemann composition per cell count, with errors vs a reference.

    ``n_list`` must be strictly increasing with at least three entries and
    ``reference`` finite. A state escape at any n stops the table; the rows
    already computed are returned with a diagnostic.
    """
    if len(n_list) < 3:
        raise ValueError("need at least three cell counts")
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("cell counts must be strictly increasing")
    if not math.isfinite(reference):
        raise ValueError(f"reference must be finite, got {reference!r}")
    rows = []
    diagnostic = None
    for n in n_list:
        p = uniform_partition(spec.a, spec.b, n, rule)
        try:
            res = riemann_composition(spec, t, p)
        except StateEscapeError as exc:
            diagnostic = f"state escape at n = {n}: {exc}"
            break
        abs_err = abs(res.value - reference)
        rel_err = abs_err / abs(reference) if reference != 0.0 else math.inf
        rows.append(ConvergenceRow(n, res.mesh, res.value, abs_err, rel_err))
    rows = tuple(rows)
    order, ci = fit_order(rows)
    return ConvergenceReport(rows, order, ci, reference_label, reference, diagnostic)


@dataclass(frozen=True)
class AuditSummary:
    """Outcome of a randomized group-law audit. Failures are data here, not
    exceptions; ``failures`` holds one message per failed check (capped)."""

    trials: int
    seed: int
    tol: float
    bitwise_passes: int
    chain_passes: int
    roundtrip_passes: int
    worst_bitwise_gap: float
    worst_chain_gap: float
    worst_roundtrip_gap: float
    failures: tuple[str, ...]

    @property
    def all_passed(self) -> bool:
        return (
            self.bitwise_passes == self.trials
            and self.chain_passes == self.trials
            and self.roundtrip_passes == self.trials
        )


def _random_partition(
    gen: SplitMix64, a: float, b: float, n_cells: int
) -> Partition:
    """Random nodes and tags over [a, b]: n_cells - 1 interior points drawn
    uniformly and sorted, then one uniform tag per cell."""
    if b == a:
        return Partition(a, b, (a,), ())
    while True:
        interior = sorted(gen.next_in(a, b) for _ in range(n_cells - 1))
        nodes = (a, *interior, b)
        if all(x < y for x, y in zip(nodes, nodes[1:])):
            break
    tags = tuple(
        lo + gen.next_float() * (hi - lo) for lo, hi in zip(nodes, nodes[1:])
    )
    return Partition(a, b, nodes, tags)


def group_law_audit(
    spec: FlowSpec,
    trials: int,
    seed: int,
    tol: float,
    t_range: tuple[float, float] = (0.5, 3.0),
    n0: int = DEFAULT_N0,
    n_max: int = DEFAULT_N_MAX,
    max_cells: int = 32,
) -> AuditSummary:
    """Randomized check of the flow's group structure.

    Per trial, in this draw order: three uniforms in [spec.a, spec.b]
    sorted into a <= b <= c; one state t in ``t_range``; two cell counts in
    [1, max_cells]; then the random partitions of [a, b] and [b, c]. Three
    checks follow:

    (i)   chained == direct for the concatenated partitions, bit-exactly;
    (ii)  converged chained vs direct flows agree within 10*tol;
    (iii) the inverse flow returns the forward flow to t within 10*tol.

    Convergence or escape errors inside a trial count as failures of that
    trial's remaining checks rather than raising.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    gen = SplitMix64(seed)
    bitwise = chain = roundtrip = 0
    worst_bit = worst_chain = worst_round = 0.0
    failures: list[str] = []

    def fail(msg: str) -> None:
        if len(failures) < 20:
            failures.append(msg)

    for trial in range(trials):
        points = sorted(gen.next_in(spec.a, spec.b) for _ in range(3))
        a, b, c = points
        t = gen.next_in(*t_range)
        n1 = 1 + gen.next_below(max_cells)
        n2 = 1 + gen.next_below(max_cells)
        p_ab = _random_partition(gen, a, b, n1)
        p_bc = _random_partition(gen, b, c, n2)

        try:
            chained, direct = compose_flows(spec, t, a, b, c, p_ab, p_bc)
            gap = abs(chained - direct)
            worst_bit = max(worst_bit, gap)
            if chained == direct:
                bitwise += 1
            else:
                fail(f"trial {trial}: bitwise concatenation gap {gap!r}")
        except (StateEscapeError, DomainError) as exc:
            fail(f"trial {trial}: concatenation check errored: {exc}")

        try:
            v_ab = compositional_integral(replace(spec, a=a, b=b), t, tol, n0, n_max)
            v_chain = compositional_integral(
                replace(spec, a=b, b=c), v_ab.value, tol, n0, n_max
            ).value
            v_direct = compositional_integral(
                replace(spec, a=a, b=c), t, tol, n0, n_max
            ).value
            gap = abs(v_chain - v_direct)
            worst_chain = max(worst_chain, gap)
            if gap <= 10.0 * tol:
                chain += 1
            else:
                fail(f"trial {trial}: converged chain gap {gap:.3e} > {10 * tol:.1e}")
        except (StateEscapeError, DomainError, NoConvergenceError, OracleError) as exc:
            fail(f"trial {trial}: chained-flow check errored: {exc}")

        try:
            sub = replace(spec, a=a, b=b)
            forward = compositional_integral(sub, t, tol, n0, n_max).value
            back = inverse_flow(sub, forward, tol, n0, n_max)
            gap = abs(back - t)
            worst_round = max(worst_round, gap)
            if gap <= 10.0 * tol:
                roundtrip += 1
            else:
                fail(f"trial {trial}: inverse round-trip gap {gap:.3e} > {10 * tol:.1e}")
        except (StateEscapeError, DomainError, NoConvergenceError, OracleError) as exc:
            fail(f"trial {trial}: round-trip check errored: {exc}")

    return AuditSummary(
        trials,
        seed,
        tol,
        bitwise,
        chain,
        roundtrip,
        worst_bit,
        worst_chain,
        worst_round,
        tuple(failures),
    )
