"""Pydantic request/response models for the pricing service."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class ModelSpec(BaseModel):
    a: float
    b: float
    c: float
    r: float = 0.0


class GridSpec(BaseModel):
    halfwidth: float | None = Field(default=None, gt=0)
    nodes: int = Field(default=4001, ge=101)


class QuadSpec(BaseModel):
    kmax_mult: float = Field(default=40.0, gt=0)
    nodes: int = Field(default=400, ge=8)


class McSpec(BaseModel):
    paths: int = Field(default=100_000, ge=1)
    steps: int | None = Field(default=None, ge=1)
    seed: int = 12345


class ClassifyRequest(BaseModel):
    model: ModelSpec


class ClassifyResponse(BaseModel):
    regime: Literal["hyperbolic", "euclidean", "spherical"]
    discriminant: float
    roots: list[float] | None
    description: str


class SpectrumRequest(BaseModel):
    model: ModelSpec
    grid: GridSpec = GridSpec()
    quad: QuadSpec = QuadSpec()
    include_profile: bool = False


class FitInfo(BaseModel):
    lam: float
    alpha: float
    v0: float
    residual: float
    exact: bool


class BoundLevel(BaseModel):
    n: int
    energy_closed_form: float | None = None
    energy_numerical: float | None = None
    rel_diff: float | None = None


class SpectrumResponse(BaseModel):
    regime: str
    message: str | None = None
    fit: FitInfo | None = None
    bound: list[BoundLevel] = []
    n_continuum: int = 0
    spectrum_csv: str | None = None
    profile_csv: str | None = None


class ContractSpec(BaseModel):
    kind: Literal["call", "put", "digital_call", "custom"]
    strike: float = 0.0
    maturity: float = Field(gt=0)
    table: list[tuple[float, float]] | None = None


class PriceRequest(BaseModel):
    model: ModelSpec
    contract: ContractSpec
    methods: list[Literal["spectral", "crank_nicolson", "monte_carlo"]] = [
        "spectral", "crank_nicolson", "monte_carlo",
    ]
    spots: list[float] | None = None
    grid: GridSpec = GridSpec()
    quad: QuadSpec = QuadSpec()
    mc: McSpec = McSpec()


class PriceRow(BaseModel):
    spot: float
    price_spectral: float | None = None
    price_cn: float | None = None
    price_mc: float | None = None
    mc_se: float | None = None


class PriceResponse(BaseModel):
    rows: list[PriceRow]
    diagnostics: dict = {}


class KernelRequest(BaseModel):
    model: ModelSpec | None = None
    pt: FitInfo | None = None  # residual/exact ignored on input
    tau: float = Field(ge=0)
    grid: GridSpec = GridSpec(nodes=401)
    quad: QuadSpec = QuadSpec()
    stride: int = Field(default=1, ge=1)


class KernelResponse(BaseModel):
    n_states: int
    n_grid: int
    kernel_csv: str


class ValidateRequest(BaseModel):
    criteria: list[str] | None = None
    seed: int = 12345
    grid_nodes: int = 4001
    k_nodes: int = 400
    kmax_mult: float = 40.0
    tolerance_overrides: dict[str, float] = {}


class CriterionRow(BaseModel):
    cid: str
    description: str
    passed: bool
    measured: float
    detail: str
    seconds: float


class ValidateResponse(BaseModel):
    results: list[CriterionRow]
    all_passed: bool
    report: str
