"""FastAPI application exposing the pricing engine."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import ConfigError
from ..geometry import GeometryError
from ..kernel import KernelError
from ..model import ModelError
from ..pricing import PricingError
from ..specfun import SpecialFunctionError
from ..spectral import SpectralError
from . import handlers
from . import schemas as sc

_DOMAIN_ERRORS = (
    ModelError, GeometryError, SpectralError, KernelError,
    PricingError, SpecialFunctionError, ConfigError, ValueError,
)


def create_app() -> FastAPI:
    app = FastAPI(
        title="smilekernel",
        version=__version__,
        description=(
            "Spectral option pricing for quadratic normal volatility models, "
            "with finite-difference and Monte Carlo cross-checks."
        ),
    )

    def run(handler, req):
        try:
            return handler(req)
        except _DOMAIN_ERRORS as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.post("/v1/classify", response_model=sc.ClassifyResponse)
    def classify(req: sc.ClassifyRequest) -> sc.ClassifyResponse:
        return run(handlers.handle_classify, req)

    @app.post("/v1/spectrum", response_model=sc.SpectrumResponse)
    def spectrum(req: sc.SpectrumRequest) -> sc.SpectrumResponse:
        return run(handlers.handle_spectrum, req)

    @app.post("/v1/price", response_model=sc.PriceResponse)
    def price(req: sc.PriceRequest) -> sc.PriceResponse:
        return run(handlers.handle_price, req)

    @app.post("/v1/kernel", response_model=sc.KernelResponse)
    def kernel(req: sc.KernelRequest) -> sc.KernelResponse:
        return run(handlers.handle_kernel, req)

    @app.post("/v1/validate", response_model=sc.ValidateResponse)
    def validate(req: sc.ValidateRequest) -> sc.ValidateResponse:
        return run(handlers.handle_validate, req)

    return app
