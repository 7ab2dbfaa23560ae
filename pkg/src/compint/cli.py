"""Command-line front end.

A thin client over the service layer: each subcommand builds the same
pydantic request model the HTTP API accepts and either runs it in-process
(default) or POSTs it to a running service via ``--server``. Output is
identical either way.

Exit codes: 0 success, 2 flag or expression parse error, 3 integrand
domain error, 4 state escape, 5 no convergence (including a failed oracle
reference), 6 audit failure.

CSV output is locale-independent (period decimal separator, LF newlines)
with the fixed columns ``n,mesh,value,abs_error,rel_error`` and a header
row always present; floats carry 17 significant digits so runs can be
diffed byte-for-byte. A ``converge`` table appends its fitted order as a
trailing ``#`` comment line. Repeated identical invocations produce
byte-identical output.
"""

from __future__ import annotations

import argparse
import math
import sys

import httpx
from pydantic import ValidationError

from .closedforms import CASE_IDS
from .errors import classify_error, exit_code_for_kind
from .service import handlers
from .service import models as m

CSV_HEADER = "n,mesh,value,abs_error,rel_error"

_ENDPOINTS = {
    "eval": ("/eval", m.EvalRequest, m.EvalResponse, handlers.handle_eval),
    "converge": ("/converge", m.ConvergeRequest, m.ConvergeResponse, handlers.handle_converge),
    "group-check": ("/group-check", m.GroupCheckRequest, m.GroupCheckResponse, handlers.handle_group_check),
    "inverse": ("/inverse", m.InverseRequest, m.InverseResponse, handlers.handle_inverse),
    "subst": ("/subst", m.SubstRequest, m.SubstResponse, handlers.handle_subst),
    "closed-form": ("/closed-form", m.ClosedFormRequest, m.ClosedFormResponse, handlers.handle_closed_form),
}


def _finite(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"{text!r} is not finite")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv"), default="table")
    common.add_argument("--output", metavar="PATH", help="write output to a file")
    common.add_argument("--server", metavar="URL", help="send the request to a running service")

    domain = argparse.ArgumentParser(add_help=False)
    domain.add_argument("--t-min", type=_finite, default=None, help="lower state-domain bound (open)")
    domain.add_argument("--t-max", type=_finite, default=None, help="upper state-domain bound (open)")

    parser = argparse.ArgumentParser(
        prog="compint",
        description="Riemann compositions and compositional integrals of "
        "first-order ODE flows y' = f(x, y).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", parents=[common, domain], help="evaluate one composition")
    p.add_argument("--f", required=True, metavar="EXPR", help="integrand f(s, t)")
    p.add_argument("--a", type=_finite, required=True)
    p.add_argument("--b", type=_finite, required=True)
    p.add_argument("--t", type=_finite, required=True)
    p.add_argument("--n", type=int, default=None, help="uniform cell count")
    p.add_argument("--tol", type=float, default=None, help="refine dyadically to this tolerance")
    p.add_argument("--tags", choices=m.TAG_KINDS, default="left")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n0", type=int, default=16)
    p.add_argument("--n-max", type=int, default=1 << 28)
    p.add_argument("--ref", default=None, help='"oracle" or "case:<id>" for error columns')
    p.add_argument("--p", default=None, metavar="EXPR", help="scalar expression for case refs")
    p.add_argument("--k", type=int, default=None)

    p = sub.add_parser("converge", parents=[common, domain], help="error table and fitted order")
    p.add_argument("--f", required=True, metavar="EXPR")
    p.add_argument("--a", type=_finite, required=True)
    p.add_argument("--b", type=_finite, required=True)
    p.add_argument("--t", type=_finite, required=True)
    p.add_argument("--n-min", type=int, default=16)
    p.add_argument("--n-max", type=int, default=4096)
    p.add_argument("--tags", choices=m.TAG_KINDS, default="left")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ref", required=True, help='"oracle" or "case:<id>"')
    p.add_argument("--p", default=None, metavar="EXPR")
    p.add_argument("--k", type=int, default=None)

    p = sub.add_parser("group-check", parents=[common, domain], help="randomized group-law audit")
    p.add_argument("--f", required=True, metavar="EXPR")
    p.add_argument("--a", type=_finite, required=True)
    p.add_argument("--b", type=_finite, required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--t-low", type=_finite, default=0.5)
    p.add_argument("--t-high", type=_finite, default=3.0)
    p.add_argument("--n0", type=int, default=16)
    p.add_argument("--n-max", type=int, default=1 << 28)
    p.add_argument("--max-cells", type=int, default=32)

    p = sub.add_parser("inverse", parents=[common, domain], help="inverse flow value")
    p.add_argument("--f", required=True, metavar="EXPR")
    p.add_argument("--a", type=_finite, required=True)
    p.add_argument("--b", type=_finite, required=True)
    p.add_argument("--t", type=_finite, required=True)
    p.add_argument("--tol", type=float, default=1e-7)
    p.add_argument("--n0", type=int, default=16)
    p.add_argument("--n-max", type=int, default=1 << 28)

    p = sub.add_parser("subst", parents=[common, domain], help="composition of the pulled-back integrand")
    p.add_argument("--f", required=True, metavar="EXPR")
    p.add_argument("--a", type=_finite, required=True)
    p.add_argument("--b", type=_finite, required=True)
    p.add_argument("--gamma", required=True, metavar="EXPR", help="gamma(s)")
    p.add_argument("--gamma-prime", required=True, metavar="EXPR", help="gamma'(s)")
    p.add_argument("--alpha", type=_finite, required=True)
    p.add_argument("--beta", type=_finite, required=True)
    p.add_argument("--t", type=_finite, required=True)
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--tags", choices=m.TAG_KINDS, default="left")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("closed-form", parents=[common], help="analytic reference values")
    p.add_argument("--case", required=True, choices=CASE_IDS)
    p.add_argument("--a", type=_finite, default=0.0)
    p.add_argument("--b", type=_finite, default=1.0)
    p.add_argument("--t", type=_finite, default=1.0)
    p.add_argument("--p", default=None, metavar="EXPR")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--x", type=_finite, default=None)
    p.add_argument("--product-n", type=int, default=None)

    return parser


def _build_request(args: argparse.Namespace):
    if args.command == "eval":
        n = args.n
        if n is None and args.tol is None and args.a == args.b:
            n = 0  # identity composition needs no mesh
        return m.EvalRequest(
            f=args.f, a=args.a, b=args.b, t=args.t, n=n, tol=args.tol,
            tags=args.tags, seed=args.seed, n0=args.n0, n_max=args.n_max,
            t_min=args.t_min, t_max=args.t_max, ref=args.ref, p=args.p, k=args.k,
        )
    if args.command == "converge":
        return m.ConvergeRequest(
            f=args.f, a=args.a, b=args.b, t=args.t, n_min=args.n_min,
            n_max=args.n_max, tags=args.tags, seed=args.seed, ref=args.ref,
            p=args.p, k=args.k, t_min=args.t_min, t_max=args.t_max,
        )
    if args.command == "group-check":
        return m.GroupCheckRequest(
            f=args.f, a=args.a, b=args.b, trials=args.trials, seed=args.seed,
            tol=args.tol, t_low=args.t_low, t_high=args.t_high, n0=args.n0,
            n_max=args.n_max, max_cells=args.max_cells,
            t_min=args.t_min, t_max=args.t_max,
        )
    if args.command == "inverse":
        return m.InverseRequest(
            f=args.f, a=args.a, b=args.b, t=args.t, tol=args.tol,
            n0=args.n0, n_max=args.n_max, t_min=args.t_min, t_max=args.t_max,
        )
    if args.command == "subst":
        return m.SubstRequest(
            f=args.f, a=args.a, b=args.b, gamma=args.gamma,
            gamma_prime=args.gamma_prime, alpha=args.alpha, beta=args.beta,
            t=args.t, n=args.n, tags=args.tags, seed=args.seed,
            t_min=args.t_min, t_max=args.t_max,
        )
    return m.ClosedFormRequest(
        case=args.case, a=args.a, b=args.b, t=args.t, p=args.p, k=args.k,
        x=args.x, product_n=args.product_n,
    )


class _RemoteFailure(Exception):
    def __init__(self, kind: str, detail: str):
        self.kind = kind
        super().__init__(detail)


def _dispatch(args: argparse.Namespace, request):
    path, _, resp_type, handler = _ENDPOINTS[args.command]
    if not args.server:
        return handler(request)
    url = args.server.rstrip("/") + path
    reply = httpx.post(url, json=request.model_dump(), timeout=600.0)
    if reply.status_code == 200:
        return resp_type.model_validate(reply.json())
    try:
        body = reply.json()
    except ValueError:
        raise _RemoteFailure("internal", f"HTTP {reply.status_code}: {reply.text!r}")
    kind = body.get("kind", "invalid")
    detail = body.get("detail", str(body))
    raise _RemoteFailure(kind, str(detail))


# --- rendering ---------------------------------------------------------------


def _g17(x) -> str:
    """17-significant-digit float formatting for CSV; None becomes nan."""
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def _csv_row(n, mesh, value, abs_error, rel_error) -> str:
    return f"{n},{_g17(mesh)},{_g17(value)},{_g17(abs_error)},{_g17(rel_error)}"


def _render_eval(resp: m.EvalResponse, fmt: str) -> str:
    if fmt == "csv":
        return "\n".join(
            [CSV_HEADER, _csv_row(resp.n, resp.mesh, resp.value, resp.abs_error, resp.rel_error)]
        )
    lines = [f"value = {resp.value!r}", f"n = {resp.n}", f"mesh = {resp.mesh!r}"]
    if resp.reference is not None:
        lines.append(f"reference ({resp.reference}) = {resp.reference_value!r}")
        lines.append(f"abs_error = {resp.abs_error!r}")
        lines.append(f"rel_error = {resp.rel_error!r}")
    return "\n".join(lines)


def _render_converge(resp: m.ConvergeResponse, fmt: str) -> str:
    if fmt == "csv":
        lines = [CSV_HEADER]
        for r in resp.rows:
            lines.append(_csv_row(r.n, r.mesh, r.value, r.abs_error, r.rel_error))
        lines.append(
            f"# order={_g17(resp.order)} ci_low={_g17(resp.order_ci_low)} "
            f"ci_high={_g17(resp.order_ci_high)} reference={resp.reference}"
        )
        if resp.diagnostic:
            lines.append(f"# diagnostic={resp.diagnostic}")
        return "\n".join(lines)
    header = f"{'n':>8}  {'mesh':>22}  {'value':>22}  {'abs_error':>22}  {'rel_error':>22}"
    lines = [header]
    for r in resp.rows:
        lines.append(
            f"{r.n:>8}  {_g17(r.mesh):>22}  {_g17(r.value):>22}  "
            f"{_g17(r.abs_error):>22}  {_g17(r.rel_error):>22}"
        )
    if resp.order is None:
        lines.append("fitted order: skipped (all rows at rounding level)")
    else:
        ci = ""
        if resp.order_ci_low is not None:
            ci = f" (95% CI [{resp.order_ci_low:.3f}, {resp.order_ci_high:.3f}])"
        lines.append(f"fitted order = {resp.order:.4f}{ci}")
    lines.append(f"reference ({resp.reference}) = {resp.reference_value!r}")
    if resp.diagnostic:
        lines.append(f"diagnostic: {resp.diagnostic}")
    return "\n".join(lines)


def _render_group_check(resp: m.GroupCheckResponse, fmt: str) -> str:
    lines = [
        f"trials = {resp.trials}  seed = {resp.seed}  tol = {resp.tol!r}",
        f"bitwise concatenation : {resp.bitwise_passes}/{resp.trials}"
        f" (worst gap {resp.worst_bitwise_gap!r})",
        f"converged chain       : {resp.chain_passes}/{resp.trials}"
        f" (worst gap {resp.worst_chain_gap!r})",
        f"inverse round-trip    : {resp.roundtrip_passes}/{resp.trials}"
        f" (worst gap {resp.worst_roundtrip_gap!r})",
        "PASS" if resp.all_passed else "FAIL",
    ]
    lines.extend(f"  {msg}" for msg in resp.failures)
    return "\n".join(lines)


def _render_inverse(resp: m.InverseResponse, fmt: str) -> str:
    return f"value = {resp.value!r}"


def _render_subst(resp: m.SubstResponse, fmt: str) -> str:
    if fmt == "csv":
        return "\n".join(
            [CSV_HEADER, _csv_row(resp.n, resp.mesh, resp.value, None, None)]
        )
    return "\n".join([f"value = {resp.value!r}", f"n = {resp.n}", f"mesh = {resp.mesh!r}"])


def _render_closed_form(resp: m.ClosedFormResponse, fmt: str) -> str:
    lines = [f"value = {resp.value!r}"]
    if resp.oracle_backed:
        lines.append("note: oracle-backed reference (no elementary closed form)")
    if resp.product_value is not None:
        lines.append(f"product = {resp.product_value!r}")
    return "\n".join(lines)


_RENDERERS = {
    "eval": _render_eval,
    "converge": _render_converge,
    "group-check": _render_group_check,
    "inverse": _render_inverse,
    "subst": _render_subst,
    "closed-form": _render_closed_form,
}


def _emit(text: str, output: str | None) -> None:
    data = text if text.endswith("\n") else text + "\n"
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        request = _build_request(args)
    except ValidationError as exc:
        first = exc.errors()[0]
        print(f"compint: invalid: {first.get('msg', exc)}", file=sys.stderr)
        return 2
    try:
        response = _dispatch(args, request)
    except _RemoteFailure as exc:
        print(f"compint: {exc.kind}: {exc}", file=sys.stderr)
        return exit_code_for_kind(exc.kind)
    except Exception as exc:  # noqa: BLE001 - mapped to documented exit codes
        kind, code = classify_error(exc)
        if kind == "internal":
            raise
        print(f"compint: {kind}: {exc}", file=sys.stderr)
        return code
    _emit(_RENDERERS[args.command](response, args.format), args.output)
    if args.command == "group-check" and not response.all_passed:
        return 6
    if args.command == "converge" and response.diagnostic:
        return 4
    return 0


def entrypoint() -> None:
    sys.exit(main())
