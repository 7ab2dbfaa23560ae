"""FastAPI application exposing the composition engine.

Run with::

    uvicorn compint.service.app:app

Library errors map to structured JSON: 400 with kind "parse"/"invalid" for
bad requests, 422 with kind "domain", "state_escape", "no_convergence", or
"oracle" for evaluations that fail. The CLI maps the same kinds to its
exit codes, so a remote invocation behaves exactly like a local one.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..errors import (
    DomainError,
    ExprSyntaxError,
    NoConvergenceError,
    OracleError,
    StateEscapeError,
    classify_error,
)
from . import handlers
from . import models as m

_LIBRARY_ERRORS = (
    ExprSyntaxError,
    DomainError,
    StateEscapeError,
    NoConvergenceError,
    OracleError,
    ValueError,
)

_HTTP_STATUS = {"parse": 400, "invalid": 400}  # evaluation failures get 422


def create_app() -> FastAPI:
    app = FastAPI(
        title="compint",
        description="Riemann compositions and compositional integrals of "
        "first-order ODE flows",
        version=__version__,
    )

    @app.exception_handler(Exception)
    async def _library_error(request: Request, exc: Exception):
        if not isinstance(exc, _LIBRARY_ERRORS):
            raise exc
        kind, _ = classify_error(exc)
        status = _HTTP_STATUS.get(kind, 422)
        payload = m.ErrorResponse(kind=kind, detail=str(exc))
        return JSONResponse(status_code=status, content=payload.model_dump())

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        payload = m.ErrorResponse(kind="invalid", detail=str(exc.errors()[0].get("msg", exc)))
        return JSONResponse(status_code=400, content=payload.model_dump())

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/eval", response_model=m.EvalResponse)
    def eval_endpoint(req: m.EvalRequest):
        return handlers.handle_eval(req)

    @app.post("/converge", response_model=m.ConvergeResponse)
    def converge_endpoint(req: m.ConvergeRequest):
        return handlers.handle_converge(req)

    @app.post("/group-check", response_model=m.GroupCheckResponse)
    def group_check_endpoint(req: m.GroupCheckRequest):
        return handlers.handle_group_check(req)

    @app.post("/inverse", response_model=m.InverseResponse)
    def inverse_endpoint(req: m.InverseRequest):
        return handlers.handle_inverse(req)

    @app.post("/subst", response_model=m.SubstResponse)
    def subst_endpoint(req: m.SubstRequest):
        return handlers.handle_subst(req)

    @app.post("/closed-form", response_model=m.ClosedFormResponse)
    def closed_form_endpoint(req: m.ClosedFormRequest):
        return handlers.handle_closed_form(req)

    return app


app = create_app()
