"""Exception types shared across the library, the CLI, and the HTTP service.

Every error a caller can hit maps to exactly one machine-readable kind,
which the CLI turns into an exit code and the service into an HTTP payload.
"""

from __future__ import annotations


class ExprSyntaxError(ValueError):
    """Raised when an integrand expression fails to parse.

    Carries the 1-based column of the offending token in ``column``.
    """

    def __init__(self, message: str, column: int):
        super().__init__(f"{message} at column {column}")
        self.column = column


class DomainError(ArithmeticError):
    """An integrand was evaluated outside a function's domain.

    Hard error by design: log of a non-positive number, square root of a
    negative number, division by zero, or a fractional power of a negative
    base. Overflow is NOT a domain error; it yields an IEEE infinity and is
    caught by the composition engine as a state escape.
    """


class StateEscapeError(RuntimeError):
    """An intermediate composed state left the flow's state domain.

    ``step`` is the 0-based index of the cell whose application produced the
    offending state; ``value`` is that state (may be infinite or NaN).
    """

    def __init__(self, step: int, value: float, message: str | None = None):
        self.step = int(step)
        self.value = float(value)
        super().__init__(
            message
            or f"composition escaped the state domain at step {self.step} "
            f"(state = {self.value!r})"
        )


class NoConvergenceError(RuntimeError):
    """Dyadic refinement hit the cell-count cap without meeting tolerance."""

    def __init__(self, n_max: int, last_value: float, last_gap: float):
        self.n_max = n_max
        self.last_value = last_value
        self.last_gap = last_gap
        super().__init__(
            f"no convergence by n = {n_max}: last value {last_value!r}, "
            f"last refinement gap {last_gap:.3e}"
        )


class OracleError(RuntimeError):
    """The reference IVP solver exhausted its step budget.

    Usually indicates blow-up of the underlying solution or stiffness beyond
    what an explicit pair can handle.
    """


# One place that fixes the error -> (kind, CLI exit code) contract.
# Exit codes: 0 success, 2 flag/parse error, 3 integrand domain error,
# 4 state escape, 5 no convergence (incl. oracle failure), 6 audit failure.
ERROR_KINDS: list[tuple[type[BaseException], str, int]] = [
    (ExprSyntaxError, "parse", 2),
    (DomainError, "domain", 3),
    (StateEscapeError, "state_escape", 4),
    (NoConvergenceError, "no_convergence", 5),
    (OracleError, "oracle", 5),
    (ValueError, "invalid", 2),
]


def classify_error(exc: BaseException) -> tuple[str, int]:
    """Map an exception to its (kind, exit code) pair; unknown kinds -> ("internal", 1)."""
    for etype, kind, code in ERROR_KINDS:
        if isinstance(exc, etype):
            return kind, code
    return "internal", 1


def exit_code_for_kind(kind: str) -> int:
    for _, k, code in ERROR_KINDS:
        if k == kind:
            return code
    return 1
