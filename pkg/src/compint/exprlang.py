"""Parser and evaluator for integrand expressions f(s, t).

The grammar is a deliberately small recursive-descent target: numeric
literals, the two free variables ``s`` (time) and ``t`` (state), the binary
operators ``+ - * / ^``, a fixed function set (exp, log, sin, cos, sqrt,
abs, pow), and parentheses. No other identifiers are accepted.

::

    expr    := ["-"] term { ("+" | "-") term }
    term    := factor { ("*" | "/") factor }
    factor  := "-" negand | power
    negand  := "-" negand | atom          # atom must NOT be followed by "^"
    power   := atom [ "^" factor ]        # right-associative
    atom    := NUMBER | "s" | "t" | NAME "(" expr {"," expr} ")" | "(" expr ")"

Two precedence choices worth calling out:

* A minus at the start of an expression negates the whole leading term, so
  ``-s*t`` parses as ``-(s*t)``.
* A unary minus directly against an exponentiation base is a syntax error:
  ``-s^2`` must be written ``(-s)^2`` or ``-(s^2)``. This sidesteps the
  classic precedence trap rather than picking a silent winner.

Evaluation is IEEE-754 double precision and referentially transparent.
Domain violations (log of a non-positive value, square root of a negative,
division by zero, fractional powers of negative bases) raise
:class:`~compint.errors.DomainError` instead of propagating NaN. Overflow
is not a domain violation: it produces an IEEE infinity, which the flow
engine then reports as a state escape.

ASTs are immutable after construction; evaluation is stateless and safe to
call concurrently.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numba

from ._kernels import cdiv
from .errors import DomainError, ExprSyntaxError

__all__ = [
    "Const",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse_expr",
    "eval_expr",
    "to_source",
    "uses_var",
    "compile_field",
    "compile_curve",
    "CompiledField",
    "CompiledCurve",
]

FUNCTIONS = {"exp": 1, "log": 1, "sin": 1, "cos": 1, "sqrt": 1, "abs": 1, "pow": 2}


# --- AST -------------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    name: str  # "s" or "t"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str  # "+", "-", "*", "/", "^"
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Node", ...]


Node = Const | Var | Neg | BinOp | Call


# --- Lexer -----------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^(),])"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    """Return (kind, text, 1-based column) triples."""
    tokens = []
    pos = 0
    while pos < len(source):
        if source[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {source[pos]!r}", pos + 1)
        kind = m.lastgroup
        tokens.append((kind, m.group(), pos + 1))
        pos = m.end()
    return tokens


# --- Parser ----------------------------------------------------------------


class _Parser:
    def __init__(self, source: str):
        if not source or not source.strip():
            raise ExprSyntaxError("empty expression", 1)
        self.source = source
        self.tokens = _tokenize(source)
        self.i = 0

    def _peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def _next(self) -> tuple[str, str, int]:
        tok = self._peek()
        if tok is None:
            raise ExprSyntaxError("unexpected end of expression", len(self.source) + 1)
        self.i += 1
        return tok

    def _peek_op(self, *ops: str) -> str | None:
        tok = self._peek()
        if tok is not None and tok[0] == "op" and tok[1] in ops:
            return tok[1]
        return None

    def _expect_op(self, op: str) -> None:
        tok = self._peek()
        if tok is None or tok[0] != "op" or tok[1] != op:
            col = tok[2] if tok is not None else len(self.source) + 1
            found = f", found {tok[1]!r}" if tok is not None else ""
            raise ExprSyntaxError(f"expected {op!r}{found}", col)
        self.i += 1

    def parse(self) -> Node:
        node = self._expr()
        tok = self._peek()
        if tok is not None:
            raise ExprSyntaxError(f"unexpected token {tok[1]!r}", tok[2])
        return node

    def _expr(self) -> Node:
        if self._peek_op("-"):
            self._next()
            node: Node = Neg(self._term(after_minus=True))
        else:
            node = self._term()
        while (op := self._peek_op("+", "-")) is not None:
            self._next()
            node = BinOp(op, node, self._term())
        return node

    def _term(self, after_minus: bool = False) -> Node:
        # A leading expression-level minus negates the whole term, so its
        # first factor goes through the same '^' guard as any negand.
        node = self._negand() if after_minus else self._factor()
        while (op := self._peek_op("*", "/")) is not None:
            self._next()
            node = BinOp(op, node, self._factor())
        return node

    def _factor(self) -> Node:
        if self._peek_op("-"):
            self._next()
            return Neg(self._negand())
        return self._power()

    def _negand(self) -> Node:
        if self._peek_op("-"):
            self._next()
            return Neg(self._negand())
        node = self._atom()
        if self._peek_op("^"):
            _, _, col = self._peek()  # type: ignore[misc]
            raise ExprSyntaxError(
                "ambiguous unary minus before '^': write (-x)^y or -(x^y)", col
            )
        return node

    def _power(self) -> Node:
        base = self._atom()
        if self._peek_op("^"):
            self._next()
            return BinOp("^", base, self._factor())
        return base

    def _atom(self) -> Node:
        tok = self._next()
        kind, text, col = tok
        if kind == "num":
            return Const(float(text))
        if kind == "name":
            if text in ("s", "t"):
                return Var(text)
            if text in FUNCTIONS:
                self._expect_op("(")
                args = [self._expr()]
                while self._peek_op(","):
                    self._next()
                    args.append(self._expr())
                self._expect_op(")")
                arity = FUNCTIONS[text]
                if len(args) != arity:
                    raise ExprSyntaxError(
                        f"{text} takes {arity} argument{'s' if arity > 1 else ''}, "
                        f"got {len(args)}",
                        col,
                    )
                return Call(text, tuple(args))
            raise ExprSyntaxError(f"unknown identifier '{text}'", col)
        if kind == "op" and text == "(":
            node = self._expr()
            self._expect_op(")")
            return node
        raise ExprSyntaxError(f"unexpected token {text!r}", col)


def parse_expr(source: str) -> Node:
    """Parse an integrand expression into an AST.

    Raises :class:`ExprSyntaxError` (with a 1-based column) on malformed
    input, unknown identifiers, or wrong function arity.
    """
    return _Parser(source).parse()


def uses_var(node: Node, name: str) -> bool:
    """True if the variable ``name`` appears anywhere in the tree."""
    if isinstance(node, Var):
        return node.name == name
    if isinstance(node, Neg):
        return uses_var(node.operand, name)
    if isinstance(node, BinOp):
        return uses_var(node.left, name) or uses_var(node.right, name)
    if isinstance(node, Call):
        return any(uses_var(a, name) for a in node.args)
    return False


# --- Evaluation ------------------------------------------------------------


def _pow_guard(a: float, b: float) -> float:
    try:
        return math.pow(a, b)
    except ValueError:
        raise DomainError(f"invalid power: {float(a)!r} ^ {float(b)!r}") from None
    except OverflowError:
        neg = a < 0.0 and float(b).is_integer() and int(b) % 2 == 1
        return -math.inf if neg else math.inf


def _exp_guard(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _log_guard(x: float) -> float:
    if x <= 0.0:
        raise DomainError(f"log of non-positive value {float(x)!r}")
    return math.log(x)


def _sqrt_guard(x: float) -> float:
    if x < 0.0:
        raise DomainError(f"sqrt of negative value {float(x)!r}")
    return math.sqrt(x)


def eval_expr(node: Node, s: float, t: float) -> float:
    """Evaluate an AST at (s, t) in double precision.

    Deterministic: identical inputs give bit-identical output. Domain
    violations raise :class:`DomainError`.
    """
    if isinstance(node, Const):
        return node.value
    if isinstance(node, Var):
        return s if node.name == "s" else t
    if isinstance(node, Neg):
        return -eval_expr(node.operand, s, t)
    if isinstance(node, BinOp):
        a = eval_expr(node.left, s, t)
        b = eval_expr(node.right, s, t)
        op = node.op
        if op == "+":
            return a + b
        if op == "-":
            return a - b
        if op == "*":
            return a * b
        if op == "/":
            if b == 0.0:
                raise DomainError(f"division by zero: {float(a)!r} / 0")
            return a / b
        return _pow_guard(a, b)
    # Call
    args = [eval_expr(a, s, t) for a in node.args]
    f = node.func
    if f == "exp":
        return _exp_guard(args[0])
    if f == "log":
        return _log_guard(args[0])
    if f == "sin":
        return math.sin(args[0])
    if f == "cos":
        return math.cos(args[0])
    if f == "sqrt":
        return _sqrt_guard(args[0])
    if f == "abs":
        return abs(args[0])
    return _pow_guard(args[0], args[1])  # pow


# --- Canonical printing ----------------------------------------------------

# Printer contexts; whenever a node is parenthesized its inside restarts
# as _EXPR, so only the local grammar position matters.
_EXPR, _ADD_RHS, _MUL_LHS, _MUL_RHS, _POW_BASE, _POW_EXP = range(6)

_ATOMIC = (Const, Var, Call)


def _fmt_const(v: float) -> str:
    return repr(v)


def _print(node: Node, ctx: int) -> str:
    if isinstance(node, Const):
        return _fmt_const(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Call):
        return f"{node.func}({', '.join(_print(a, _EXPR) for a in node.args)})"
    if isinstance(node, Neg):
        if ctx in (_MUL_LHS, _POW_BASE):
            return f"(-{_print_neg_operand(node.operand)})"
        return f"-{_print_neg_operand(node.operand)}"
    if isinstance(node, BinOp):
        if node.op in ("+", "-"):
            if ctx != _EXPR:
                return f"({_print(node, _EXPR)})"
            left = _print(node.left, _EXPR)
            right = _print(node.right, _ADD_RHS)
            return f"{left} {node.op} {right}"
        if node.op in ("*", "/"):
            if ctx in (_POW_BASE, _POW_EXP) or ctx == _MUL_RHS:
                return f"({_print(node, _EXPR)})"
            left = _print(node.left, _MUL_LHS)
            right = _print(node.right, _MUL_RHS)
            return f"{left}{node.op}{right}"
        # "^": right-associative, bare in factor-like contexts
        if ctx == _POW_BASE:
            return f"({_print(node, _EXPR)})"
        base = _print(node.left, _POW_BASE)
        exponent = _print(node.right, _POW_EXP)
        return f"{base}^{exponent}"
    raise TypeError(f"not an AST node: {node!r}")


def _print_neg_operand(node: Node) -> str:
    # negand position: atoms and chained minus are bare, all else parenthesized
    if isinstance(node, _ATOMIC):
        return _print(node, _EXPR)
    if isinstance(node, Neg):
        return f"-{_print_neg_operand(node.operand)}"
    return f"({_print(node, _EXPR)})"


def to_source(node: Node) -> str:
    """Canonical text form with minimal parentheses.

    Re-parsing the output reproduces the tree exactly:
    ``parse_expr(to_source(parse_expr(x))) == parse_expr(x)``.
    """
    return _print(node, _EXPR)


# --- Compiled fields -------------------------------------------------------


def _codegen(node: Node) -> str:
    """Python source for the numba twin. Mirrors eval_expr's tree shape;
    division goes through cdiv so a zero divisor surfaces as NaN instead of
    a ZeroDivisionError the kernel could not attribute to a step."""
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-({_codegen(node.operand)}))"
    if isinstance(node, BinOp):
        a = _codegen(node.left)
        b = _codegen(node.right)
        if node.op == "/":
            return f"cdiv({a}, {b})"
        if node.op == "^":
            return f"({a} ** {b})"
        return f"({a} {node.op} {b})"
    if node.func == "pow":
        return f"({_codegen(node.args[0])} ** {_codegen(node.args[1])})"
    return f"{node.func}({', '.join(_codegen(a) for a in node.args)})"


_JIT_NAMESPACE = {
    "exp": math.exp,
    "log": math.log,
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    "abs": abs,
    "cdiv": cdiv,
}


class CompiledField:
    """A parsed integrand f(s, t), callable from Python with full domain
    checking, carrying a numba-compiled twin for the composition kernels.

    The twin follows C/IEEE special-value semantics inside subexpressions
    (log(-1) is NaN, exp(1000) is inf); the engine re-runs any step whose
    twin output is unusable through the guarded evaluator, so callers always
    see the guarded classification.
    """

    def __init__(self, ast: Node):
        self.ast = ast
        self.source = to_source(ast)
        ns = dict(_JIT_NAMESPACE)
        code = f"def _field(s, t):\n    return {_codegen(ast)}"
        exec(compile(code, "<compint-field>", "exec"), ns)
        self.jit = numba.njit(ns["_field"])

    def __call__(self, s: float, t: float) -> float:
        return eval_expr(self.ast, s, t)

    def __repr__(self) -> str:
        return f"CompiledField({self.source!r})"


class CompiledCurve:
    """A parsed one-variable function of ``s``, e.g. a reparameterization
    gamma or its derivative. The state variable ``t`` may not appear."""

    def __init__(self, ast: Node):
        if uses_var(ast, "t"):
            raise ValueError("curve expressions may only use the variable 's'")
        self.ast = ast
        self.source = to_source(ast)

    def __call__(self, s: float) -> float:
        return eval_expr(self.ast, s, 0.0)

    def __repr__(self) -> str:
        return f"CompiledCurve({self.source!r})"


def compile_field(source: str | Node) -> CompiledField:
    """Parse (if needed) and compile an integrand expression."""
    ast = parse_expr(source) if isinstance(source, str) else source
    return CompiledField(ast)


def compile_curve(source: str | Node) -> CompiledCurve:
    """Parse (if needed) and compile a one-variable curve expression."""
    ast = parse_expr(source) if isinstance(source, str) else source
    return CompiledCurve(ast)
