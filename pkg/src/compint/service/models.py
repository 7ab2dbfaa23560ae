"""Request/response models for the HTTP service and the CLI thin client.

The CLI builds these same models and either dispatches them in-process or
POSTs them to a running service, so the wire format and the command line
cannot drift apart. Responses never carry NaN or infinities (strict JSON);
missing quantities are null.
"""

from __future__ import annotations

from pydantic import BaseModel, Field, model_validator

TAG_KINDS = ("left", "right", "midpoint", "random")


class EvalRequest(BaseModel):
    f: str = Field(description="integrand expression f(s, t)")
    a: float
    b: float
    t: float
    n: int | None = Field(default=None, ge=0, description="fixed uniform cell count")
    tol: float | None = Field(default=None, gt=0, description="refine to this tolerance")
    tags: str = "left"
    seed: int = 0
    n0: int = Field(default=16, ge=1)
    n_max: int = Field(default=1 << 28, ge=1)
    t_min: float | None = None
    t_max: float | None = None
    ref: str | None = Field(
        default=None, description='error reference: "oracle" or "case:<id>"'
    )
    p: str | None = Field(default=None, description="scalar expression for case refs")
    k: int | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.b < self.a:
            raise ValueError("need b >= a")
        if self.tags not in TAG_KINDS:
            raise ValueError(f"tags must be one of {TAG_KINDS}")
        if (self.n is None) == (self.tol is None):
            raise ValueError("exactly one of n and tol must be given")
        return self


class EvalResponse(BaseModel):
    value: float
    n: int
    mesh: float
    tags: str
    reference: str | None = None
    reference_value: float | None = None
    abs_error: float | None = None
    rel_error: float | None = None


class ConvergeRequest(BaseModel):
    f: str
    a: float
    b: float
    t: float
    n_min: int = Field(default=16, ge=1)
    n_max: int = Field(default=4096, ge=1)
    tags: str = "left"
    seed: int = 0
    ref: str = Field(description='"oracle" or "case:<id>"')
    p: str | None = None
    k: int | None = None
    t_min: float | None = None
    t_max: float | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.b < self.a:
            raise ValueError("need b >= a")
        if self.tags not in TAG_KINDS:
            raise ValueError(f"tags must be one of {TAG_KINDS}")
        if self.n_max < 4 * self.n_min:
            raise ValueError("need n_max >= 4*n_min (at least three dyadic levels)")
        return self


class ConvergenceRowModel(BaseModel):
    n: int
    mesh: float
    value: float
    abs_error: float
    rel_error: float | None


class ConvergeResponse(BaseModel):
    rows: list[ConvergenceRowModel]
    order: float | None
    order_ci_low: float | None
    order_ci_high: float | None
    reference: str
    reference_value: float
    diagnostic: str | None = None


class GroupCheckRequest(BaseModel):
    f: str
    a: float
    b: float
    trials: int = Field(default=100, ge=1)
    seed: int = 0
    tol: float = Field(default=1e-6, gt=0)
    t_low: float = 0.5
    t_high: float = 3.0
    n0: int = Field(default=16, ge=1)
    n_max: int = Field(default=1 << 28, ge=1)
    max_cells: int = Field(default=32, ge=1)
    t_min: float | None = None
    t_max: float | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.b < self.a:
            raise ValueError("need b >= a")
        if self.t_high < self.t_low:
            raise ValueError("need t_high >= t_low")
        return self


class GroupCheckResponse(BaseModel):
    trials: int
    seed: int
    tol: float
    bitwise_passes: int
    chain_passes: int
    roundtrip_passes: int
    worst_bitwise_gap: float
    worst_chain_gap: float
    worst_roundtrip_gap: float
    failures: list[str]
    all_passed: bool


class InverseRequest(BaseModel):
    f: str
    a: float
    b: float
    t: float
    tol: float = Field(default=1e-7, gt=0)
    n0: int = Field(default=16, ge=1)
    n_max: int = Field(default=1 << 28, ge=1)
    t_min: float | None = None
    t_max: float | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.b < self.a:
            raise ValueError("need b >= a")
        return self


class InverseResponse(BaseModel):
    value: float
    tol: float


class SubstRequest(BaseModel):
    f: str
    a: float
    b: float
    gamma: str = Field(description="reparameterization gamma(s)")
    gamma_prime: str = Field(description="its derivative, supplied not differenced")
    alpha: float
    beta: float
    t: float
    n: int = Field(default=1024, ge=0)
    tags: str = "left"
    seed: int = 0
    t_min: float | None = None
    t_max: float | None = None

    @model_validator(mode="after")
    def _check(self):
        if self.b < self.a:
            raise ValueError("need b >= a")
        if self.beta < self.alpha:
            raise ValueError("need beta >= alpha")
        if self.tags not in TAG_KINDS:
            raise ValueError(f"tags must be one of {TAG_KINDS}")
        return self


class SubstResponse(BaseModel):
    value: float
    n: int
    mesh: float


class ClosedFormRequest(BaseModel):
    case: str
    a: float = 0.0
    b: float = 1.0
    t: float = 1.0
    p: str | None = None
    k: int | None = None
    x: float | None = None
    product_n: int | None = Field(default=None, ge=1)


class ClosedFormResponse(BaseModel):
    case: str
    value: float
    oracle_backed: bool
    product_value: float | None = None


class ErrorResponse(BaseModel):
    kind: str
    detail: str
