"""Service handlers: framework-free functions from request to response.

The FastAPI app routes to these, and the CLI calls them in-process, so
both front ends share one code path. Spectral decompositions are cached
per (model, grid, quadrature): they are immutable and their construction
dominates request latency on repeated pricing of the same model.
"""

from __future__ import annotations

import math
import threading
from collections import OrderedDict

import numpy as np

from .. import geometry
from ..config import RunConfig
from ..kernel import assemble
from ..model import ModelError, QnvModel, Regime, classify
from ..pricing import (
    OptionContract,
    PayoffKind,
    PricingError,
    default_spots,
    price_crank_nicolson,
    price_monte_carlo,
    price_spectral,
)
from ..spectral import (
    KQuadratureSpec,
    SpectralError,
    closed_form_spectrum,
    fd_bound_energies,
    numerical_spectrum,
)
from ..validation import format_report, run_battery
from . import schemas as sc

_CACHE_MAX = 8
_decomp_cache: OrderedDict[tuple, object] = OrderedDict()
_cache_lock = threading.Lock()


def _to_model(spec: sc.ModelSpec) -> QnvModel:
    return QnvModel(spec.a, spec.b, spec.c, spec.r)


def _to_contract(spec: sc.ContractSpec) -> OptionContract:
    table = None
    if spec.table is not None:
        arr = np.asarray(spec.table, dtype=float)
        table = (arr[:, 0].copy(), arr[:, 1].copy())
    return OptionContract(
        kind=PayoffKind(spec.kind),
        strike=spec.strike,
        maturity=spec.maturity,
        table=table,
    )


def handle_classify(req: sc.ClassifyRequest) -> sc.ClassifyResponse:
    geo = classify(_to_model(req.model))
    roots = None
    if geo.regime is Regime.HYPERBOLIC:
        roots = [geo.s_lower, geo.s_upper]
    elif geo.regime is Regime.EUCLIDEAN and geo.s_lower is not None:
        roots = [geo.s_lower]
    return sc.ClassifyResponse(
        regime=geo.regime.value,
        discriminant=geo.discriminant,
        roots=roots,
        description=geo.describe(),
    )


def handle_spectrum(req: sc.SpectrumRequest) -> sc.SpectrumResponse:
    model = _to_model(req.model)
    geo = classify(model)
    if geo.regime is not Regime.HYPERBOLIC:
        return sc.SpectrumResponse(
            regime=geo.regime.value,
            message="closed-form spectrum unavailable; numerical path only",
        )
    grid = geometry.default_grid(model, req.grid.halfwidth, req.grid.nodes)
    profile = geometry.potential(model, grid)
    fit = geometry.fit_poschl_teller(profile)
    fd = fd_bound_energies(profile)
    levels: list[sc.BoundLevel] = []
    n_cont = 0
    spectrum_csv = None
    if fit.exact:
        from ..pricing import _degenerate_alpha

        alpha = fit.alpha
        if fit.lam == 0.0:
            alpha = _degenerate_alpha(float(grid[-1]), req.quad.nodes, req.quad.kmax_mult)
        dec = closed_form_spectrum(
            fit.lam, alpha, fit.v0, KQuadratureSpec(req.quad.kmax_mult, req.quad.nodes)
        )
        n_cont = len(dec.continuum)
        spectrum_csv = dec.to_csv()
        for b in dec.bound:
            e_num = float(fd[b.n]) if b.n < fd.size else None
            rel = (
                abs(b.energy - e_num) / max(abs(e_num), 1e-300)
                if e_num is not None
                else None
            )
            levels.append(sc.BoundLevel(
                n=b.n, energy_closed_form=b.energy, energy_numerical=e_num, rel_diff=rel,
            ))
        message = None
    else:
        for n, e in enumerate(fd):
            levels.append(sc.BoundLevel(n=n, energy_numerical=float(e)))
        message = (
            "potential is not a sech^2 well at tolerance "
            f"(fit residual {fit.residual:.3e}); numerical spectrum only"
        )
    return sc.SpectrumResponse(
        regime=geo.regime.value,
        message=message,
        fit=sc.FitInfo(
            lam=fit.lam, alpha=fit.alpha, v0=fit.v0,
            residual=fit.residual, exact=fit.exact,
        ),
        bound=levels,
        n_continuum=n_cont,
        spectrum_csv=spectrum_csv,
        profile_csv=profile.to_csv() if req.include_profile else None,
    )


def _decomposition_for(model: QnvModel, grid_spec: sc.GridSpec, quad: sc.QuadSpec):
    key = (
        model.a, model.b, model.c, model.r,
        grid_spec.halfwidth, grid_spec.nodes, quad.kmax_mult, quad.nodes,
    )
    with _cache_lock:
        if key in _decomp_cache:
            _decomp_cache.move_to_end(key)
            return _decomp_cache[key]
    grid = geometry.default_grid(model, grid_spec.halfwidth, grid_spec.nodes)
    profile = geometry.potential(model, grid)
    fit = geometry.fit_poschl_teller(profile)
    if fit.exact:
        from ..pricing import _degenerate_alpha

        alpha = fit.alpha
        if fit.lam == 0.0:
            alpha = _degenerate_alpha(float(grid[-1]), quad.nodes, quad.kmax_mult)
        dec = closed_form_spectrum(
            fit.lam, alpha, fit.v0, KQuadratureSpec(quad.kmax_mult, quad.nodes)
        )
        entry = (dec, grid)
    else:
        dec = numerical_spectrum(profile)
        entry = (dec, dec.grid)
    with _cache_lock:
        _decomp_cache[key] = entry
        while len(_decomp_cache) > _CACHE_MAX:
            _decomp_cache.popitem(last=False)
    return entry


def handle_price(req: sc.PriceRequest) -> sc.PriceResponse:
    model = _to_model(req.model)
    contract = _to_contract(req.contract)
    geo = classify(model)
    if req.spots is not None:
        spots = np.asarray(req.spots, dtype=float)
    elif geo.regime is Regime.HYPERBOLIC:
        spots = default_spots(model)
    else:
        raise PricingError("non-hyperbolic models need explicit spots")

    rows = [sc.PriceRow(spot=float(s)) for s in spots]
    diagnostics: dict = {"regime": geo.regime.value}

    if "spectral" in req.methods:
        grid = geometry.default_grid(model, req.grid.halfwidth, req.grid.nodes)
        res = price_spectral(
            model, contract, spots=spots, grid=grid,
            k_spec=KQuadratureSpec(req.quad.kmax_mult, req.quad.nodes),
        )
        for row, p in zip(rows, res.prices):
            row.price_spectral = float(p)
        diagnostics["spectral"] = {
            "spectrum": res.diagnostics.get("spectrum"),
            "fit_residual": res.diagnostics.get("fit_residual"),
            "n_states": res.diagnostics.get("n_states"),
        }
    if "crank_nicolson" in req.methods:
        res = price_crank_nicolson(model, contract, spots=spots)
        for row, p in zip(rows, res.prices):
            row.price_cn = float(p)
        diagnostics["crank_nicolson"] = res.diagnostics
    if "monte_carlo" in req.methods:
        for row in rows:
            res = price_monte_carlo(
                model, contract, row.spot,
                paths=req.mc.paths, steps=req.mc.steps, seed=req.mc.seed,
            )
            row.price_mc = float(res.prices[0])
            row.mc_se = float(res.stderr[0])
        diagnostics["monte_carlo"] = {"paths": req.mc.paths, "seed": req.mc.seed}
    return sc.PriceResponse(rows=rows, diagnostics=diagnostics)


def handle_kernel(req: sc.KernelRequest) -> sc.KernelResponse:
    if (req.model is None) == (req.pt is None):
        raise PricingError("kernel request needs exactly one of 'model' or 'pt'")
    quad = KQuadratureSpec(req.quad.kmax_mult, req.quad.nodes)
    if req.pt is not None:
        alpha = req.pt.alpha
        dec = closed_form_spectrum(req.pt.lam, alpha, req.pt.v0, quad)
        halfwidth = req.grid.halfwidth or 20.0 * alpha
        grid = np.linspace(-halfwidth, halfwidth, req.grid.nodes)
    else:
        model = _to_model(req.model)
        dec, grid = _decomposition_for(model, req.grid, req.quad)
    kern = assemble(dec, req.tau, grid)
    stride = req.stride
    if stride == 1 and grid.size > 401:
        stride = int(math.ceil(grid.size / 401))
    return sc.KernelResponse(
        n_states=kern.n_states,
        n_grid=int(grid.size),
        kernel_csv=kern.to_csv(stride=stride),
    )


def handle_validate(req: sc.ValidateRequest) -> sc.ValidateResponse:
    config = RunConfig(
        seed=req.seed,
        grid_nodes=req.grid_nodes,
        k_nodes=req.k_nodes,
        kmax_mult=req.kmax_mult,
        tolerance_overrides=dict(req.tolerance_overrides),
    )
    results = run_battery(config, req.criteria)
    return sc.ValidateResponse(
        results=[
            sc.CriterionRow(
                cid=r.cid, description=r.description, passed=r.passed,
                measured=r.measured, detail=r.detail, seconds=r.seconds,
            )
            for r in results
        ],
        all_passed=all(r.passed for r in results),
        report=format_report(results),
    )
