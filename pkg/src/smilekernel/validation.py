"""Acceptance battery: nine numbered criteria, each with a pinned tolerance.

Every criterion reports the worst tolerance-normalized error ratio
(measured/tolerance, so pass means ratio <= 1) plus a human-readable
detail string with the raw numbers. The battery is deterministic for a
fixed seed and is shared verbatim by the test suite and the ``validate``
CLI command.

Independence notes
------------------
- AC-1 checks the closed-form coordinate map against adaptive quadrature
  of the defining integral.
- AC-3 checks closed-form bound levels against the Richardson-sharpened
  finite-difference solver.
- AC-7 triangulates the spectral prices against a direct PDE solve in
  price space and a seeded Monte Carlo simulation.
- AC-9 checks the series hypergeometric against its Euler integral and
  log-gamma against an independent reference implementation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from . import geometry, specfun
from .config import RunConfig
from .kernel import apply_kernel, assemble
from .model import QnvModel
from .pricing import (
    CnGridSpec,
    OptionContract,
    PayoffKind,
    affine_chord,
    default_spots,
    price_crank_nicolson,
    price_monte_carlo,
    price_spectral,
)
from .spectral import KQuadratureSpec, _ScatterFamily, closed_form_spectrum, fd_bound_energies

__all__ = ["CriterionResult", "CRITERIA", "run_battery", "format_report"]

# Interior margin for the windowed Chapman-Kolmogorov check: composing an
# infinite-line propagator over a finite window loses the probability
# mass that exits through the walls, so rows within a few diffusion
# lengths of the boundary cannot satisfy the semigroup identity for any
# discretization. sqrt(2 * 1.5) * 4 < 8 covers the battery maturities.
SEMIGROUP_MARGIN = 8.0


@dataclass
class CriterionResult:
    cid: str
    description: str
    passed: bool
    measured: float  # worst error / tolerance (pass iff <= 1)
    detail: str
    seconds: float = 0.0


def _tol(config: RunConfig, cid: str, default: float) -> float:
    return config.tolerance_overrides.get(cid, default)


# ---------------------------------------------------------------------------

def ac1_lamperti(config: RunConfig) -> CriterionResult:
    """Closed-form coordinate map vs adaptive quadrature; round trip."""
    tol_quad = _tol(config, "AC-1", 1e-8)
    tol_round = 1e-10
    model = QnvModel(1.0, 0.0, -1.0, 0.0)
    rng = np.random.default_rng(config.seed + 1)
    s_samples = rng.uniform(-0.99, 0.99, 100)
    worst_quad = 0.0
    worst_round = 0.0
    for s in s_samples:
        x_closed = geometry.lamperti_forward(model, float(s))
        x_quad, _ = integrate.quad(lambda u: 1.0 / (1.0 - u * u), 0.0, float(s),
                                   epsabs=1e-13, epsrel=1e-12)
        worst_quad = max(worst_quad, abs(x_closed - x_quad) / max(1e-30, abs(x_quad)))
        s_back = geometry.lamperti_inverse(model, x_closed)
        worst_round = max(worst_round, abs(s_back - s))
    ratio = max(worst_quad / tol_quad, worst_round / tol_round)
    return CriterionResult(
        "AC-1", "coordinate map: closed form vs quadrature, round trip",
        ratio <= 1.0, ratio,
        f"closed-vs-quad rel {worst_quad:.3e} (tol {tol_quad:.0e}); "
        f"round-trip {worst_round:.3e} (tol {tol_round:.0e})",
    )


def ac2_potential_identity(config: RunConfig) -> CriterionResult:
    """Stated identity W = 1/2 - sech^2 and fit (1, 1, 0.5) for (1,0,-1), r=0.

    With the derivative of the same factored volatility that defines the
    coordinate map, the r = 0 potential of this model is the constant
    1/2 and the fitted well strength is 0; the sech^2 well would require
    mixing the polynomial derivative into the drift, which empirically
    breaks the PDE oracle agreement checked by AC-7. The criterion is
    asserted as stated and reports its failure honestly.
    """
    tol_w = _tol(config, "AC-2", 1e-10)
    tol_fit = 1e-6
    model = QnvModel(1.0, 0.0, -1.0, 0.0)
    grid = np.linspace(-10.0, 10.0, 2001)
    prof = geometry.potential(model, grid)
    target = 0.5 - 1.0 / np.cosh(grid) ** 2
    w_err = float(np.max(np.abs(prof.w - target)))
    fit = geometry.fit_poschl_teller(prof)
    fit_err = max(abs(fit.lam - 1.0), abs(fit.alpha - 1.0), abs(fit.v0 - 0.5))
    ratio = max(w_err / tol_w, fit_err / tol_fit)
    return CriterionResult(
        "AC-2", "potential identity W = 1/2 - sech^2 with fit (1, 1, 0.5)",
        ratio <= 1.0, ratio,
        f"max|W - (1/2 - sech^2)| = {w_err:.3e} (tol {tol_w:.0e}); "
        f"fit ({fit.lam:.6g}, {fit.alpha:.6g}, {fit.v0:.6g}) vs (1, 1, 0.5), "
        f"worst param err {fit_err:.3e} (tol {tol_fit:.0e})",
    )


def ac3_spectrum_agreement(config: RunConfig) -> CriterionResult:
    """Closed-form levels vs finite-difference solver; bound counts."""
    tol = _tol(config, "AC-3", 1e-4)
    worst = 0.0
    counts_ok = True
    lines = []
    for lam in (0.5, 1.8, 2.5):
        for alpha in (0.7, 1.0):
            dec = closed_form_spectrum(lam, alpha, 0.0, KQuadratureSpec(nodes=16))
            grid = np.linspace(-20 * alpha, 20 * alpha, config.grid_nodes)
            prof = geometry.synthetic_pt_profile(lam, alpha, 0.0, grid)
            fd = fd_bound_energies(prof)
            expect = math.floor(lam) + 1
            got = len(dec.bound)
            if got != expect or len(fd) != expect:
                counts_ok = False
                lines.append(f"lam={lam} a={alpha}: count {got}/{len(fd)} != {expect}")
                continue
            rel = float(np.max(np.abs(dec.bound_energies - fd) / np.abs(fd)))
            worst = max(worst, rel)
            lines.append(f"lam={lam} a={alpha}: rel {rel:.2e}")
    ratio = worst / tol if counts_ok else math.inf
    return CriterionResult(
        "AC-3", "bound spectrum: closed form vs tridiagonal solver + counts",
        counts_ok and ratio <= 1.0, ratio,
        "; ".join(lines) + f" (tol {tol:.0e})",
    )


def ac4_eigenfunction_quality(config: RunConfig) -> CriterionResult:
    """Gram matrix, Legendre-ODE residuals, scattering ODE residuals."""
    tol_gram = 1e-6
    tol_leg = 1e-5
    tol_scatter = _tol(config, "AC-4", 1e-4)
    lam, alpha = 2.5, 1.0
    dec = closed_form_spectrum(lam, alpha, 0.0, KQuadratureSpec(config.kmax_mult, 64))
    grid = np.linspace(-20.0, 20.0, config.grid_nodes)
    h = grid[1] - grid[0]
    wtr = np.full(grid.size, h)
    wtr[0] = wtr[-1] = 0.5 * h
    basis = np.vstack([b.eval(grid) for b in dec.bound])
    gram = (basis * wtr) @ basis.T
    gram_err = float(np.max(np.abs(gram - np.eye(len(dec.bound)))))

    leg_err = 0.0
    us = np.linspace(-0.9, 0.9, 37)
    hu = 1e-4
    for b in dec.bound:
        w0 = b.eval(np.arctanh(us))
        wp = b.eval(np.arctanh(us + hu))
        wm = b.eval(np.arctanh(us - hu))
        d1 = (wp - wm) / (2 * hu)
        d2 = (wp - 2 * w0 + wm) / hu**2
        res = (1 - us**2) * d2 - 2 * us * d1 + (lam * (lam + 1) - b.mu**2 / (1 - us**2)) * w0
        scale = float(np.max(np.abs(w0))) * (lam * (lam + 1) + b.mu**2 / (1 - 0.81))
        leg_err = max(leg_err, float(np.max(np.abs(res))) / scale)

    scatter_err = 0.0
    k_max = config.kmax_mult / alpha
    ks = np.linspace(k_max / 20.0, k_max, 20)
    ys = np.linspace(-15.0, 15.0, 301)
    pot = lam * (lam + 1) / 2.0 / np.cosh(ys) ** 2
    for k in ks:
        fam = _ScatterFamily(lam, float(k))
        hf = 0.05 / max(1.0, k)
        for par in ("even", "odd"):
            f0 = fam.values(par, ys)
            f1p = fam.values(par, ys + hf)
            f1m = fam.values(par, ys - hf)
            f2p = fam.values(par, ys + 2 * hf)
            f2m = fam.values(par, ys - 2 * hf)
            d2 = (-f2p + 16 * f1p - 30 * f0 + 16 * f1m - f2m) / (12 * hf * hf)
            res = -0.5 * d2 - pot * f0 - 0.5 * k * k * f0
            scale = (0.5 * k * k + lam * (lam + 1) / 2) * float(np.max(np.abs(f0)))
            scatter_err = max(scatter_err, float(np.max(np.abs(res))) / scale)

    ratio = max(gram_err / tol_gram, leg_err / tol_leg, scatter_err / tol_scatter)
    return CriterionResult(
        "AC-4", "eigenfunction quality: Gram, Legendre ODE, scattering ODE",
        ratio <= 1.0, ratio,
        f"gram {gram_err:.2e} (tol {tol_gram:.0e}); legendre-ODE {leg_err:.2e} "
        f"(tol {tol_leg:.0e}); scattering-ODE {scatter_err:.2e} (tol {tol_scatter:.0e})",
    )


def ac5_kernel_properties(config: RunConfig) -> CriterionResult:
    """Free kernel vs Gaussian; Chapman-Kolmogorov; tau -> 0 delta."""
    tol_gauss = _tol(config, "AC-5", 1e-4)
    tol_semi = 1e-4
    tol_delta = 1e-3
    grid = np.linspace(-20.0, 20.0, 2001)
    free = closed_form_spectrum(0.0, 1.0, 0.0, KQuadratureSpec(config.kmax_mult, config.k_nodes))

    k05 = assemble(free, 0.5, grid)
    diff = grid[:, None] - grid[None, :]
    gauss = np.exp(-(diff**2) / 1.0) / math.sqrt(2 * math.pi * 0.5)
    gauss_err = float(np.max(np.abs(k05.matrix - gauss)))

    wtr = k05.trapezoid_weights()
    inner = np.abs(grid) <= 20.0 - SEMIGROUP_MARGIN
    semi_err = 0.0
    for tau1, tau2 in ((0.1, 0.1), (0.5, 1.0)):
        ka = assemble(free, tau1, grid)
        kb = assemble(free, tau2, grid) if tau2 != tau1 else ka
        kc = assemble(free, tau1 + tau2, grid)
        comp = ka.matrix @ (wtr[:, None] * kb.matrix)
        defect = np.abs(comp - kc.matrix)[np.ix_(inner, inner)]
        semi_err = max(semi_err, float(defect.max()))

    k0 = assemble(free, 0.0, grid)
    delta_err = 0.0
    for width, center in ((0.6, 0.0), (1.0, 3.0), (0.8, -5.0)):
        f = np.exp(-((grid - center) ** 2) / (2 * width**2))
        delta_err = max(delta_err, float(np.max(np.abs(apply_kernel(k0, f) - f))))

    ratio = max(gauss_err / tol_gauss, semi_err / tol_semi, delta_err / tol_delta)
    return CriterionResult(
        "AC-5", "kernel: Gaussian match, semigroup, delta property",
        ratio <= 1.0, ratio,
        f"free-vs-Gauss {gauss_err:.2e} (tol {tol_gauss:.0e}); semigroup "
        f"{semi_err:.2e} (tol {tol_semi:.0e}, interior margin {SEMIGROUP_MARGIN:g}); "
        f"delta {delta_err:.2e} (tol {tol_delta:.0e})",
    )


def ac6_bond_reproduction(config: RunConfig) -> CriterionResult:
    """Unit payoff prices to 1 at all 21 spots through the spectral path.

    Checked twice: through ``price_spectral`` (the shipped path, whose
    affine split makes the bond exact by construction) and through the
    raw transform -> kernel -> inverse-transform chain, which exercises
    every sign convention in the machinery.
    """
    tol = _tol(config, "AC-6", 1e-3)
    model = QnvModel(1.0, 0.0, -1.0, 0.0)
    bond = OptionContract(
        PayoffKind.CUSTOM, maturity=1.0,
        table=(np.array([-1.0, 1.0]), np.array([1.0, 1.0])),
    )
    res = price_spectral(model, bond)
    err_split = float(np.max(np.abs(res.prices - 1.0)))

    from .pricing import _degenerate_alpha, transform_payoff

    grid = geometry.default_grid(model, nodes=config.grid_nodes)
    psi0 = transform_payoff(bond, model, grid)
    prof = geometry.potential(model, grid)
    fit = geometry.fit_poschl_teller(prof)
    alpha = _degenerate_alpha(float(grid[-1]), config.k_nodes, config.kmax_mult)
    dec = closed_form_spectrum(fit.lam, alpha, fit.v0,
                               KQuadratureSpec(config.kmax_mult, config.k_nodes))
    kern = assemble(dec, bond.maturity, grid)
    c_raw = np.exp(np.asarray(geometry.gauge_log(model, grid))) * apply_kernel(kern, psi0)
    x_spots = np.array([geometry.lamperti_forward(model, s) for s in default_spots(model)])
    err_raw = float(np.max(np.abs(np.interp(x_spots, grid, c_raw) - 1.0)))

    err = max(err_split, err_raw)
    return CriterionResult(
        "AC-6", "bond reproduction at 21 spots via the spectral path",
        err / tol <= 1.0, err / tol,
        f"split-path {err_split:.2e}, raw-chain {err_raw:.2e} (tol {tol:.0e})",
    )


def _battery_contracts() -> list[tuple[str, PayoffKind]]:
    return [("call", PayoffKind.CALL), ("put", PayoffKind.PUT),
            ("digital", PayoffKind.DIGITAL_CALL)]


def ac7_oracle_triangle(config: RunConfig) -> CriterionResult:
    """Spectral vs Crank-Nicolson (rel 1e-3) and vs Monte Carlo (3 SE)."""
    tol_cn = _tol(config, "AC-7", 1e-3)
    worst_cn = 0.0
    worst_z = 0.0
    lines = []
    for coeffs in ((1.0, 0.0, -1.0), (2.0, -6.0, 4.0)):
        for r in (0.0, 0.03):
            model = QnvModel(*coeffs, r)
            s_l, s_u = geometry._hyper(model).s_l, geometry._hyper(model).s_u
            mid = 0.5 * (s_l + s_u)
            spots = default_spots(model)
            for t in (0.5, 2.0):
                contracts = {
                    name: OptionContract(kind, strike=mid, maturity=t)
                    for name, kind in _battery_contracts()
                }
                for name, contract in contracts.items():
                    rs = price_spectral(model, contract, spots=spots)
                    rc = price_crank_nicolson(model, contract, spots=spots)
                    rel = float(np.max(
                        np.abs(rs.prices - rc.prices)
                        / np.maximum(1.0, np.abs(rc.prices))
                    ))
                    worst_cn = max(worst_cn, rel)
                    rm = price_monte_carlo(model, contract, mid, paths=100_000,
                                           seed=config.seed)
                    sm = price_spectral(model, contract, spots=np.array([mid]))
                    z = abs(rm.prices[0] - sm.prices[0]) / max(rm.stderr[0], 1e-15)
                    worst_z = max(worst_z, z)
                    lines.append(
                        f"{coeffs}/r={r}/{name}/T={t}: cn {rel:.1e} z {z:.2f}"
                    )
    ratio = max(worst_cn / tol_cn, worst_z / 3.0)
    detail = (
        f"worst spectral-vs-CN rel {worst_cn:.2e} (tol {tol_cn:.0e}); worst "
        f"|z| {worst_z:.2f} (limit 3); " + " | ".join(lines)
    )
    return CriterionResult(
        "AC-7", "oracle triangle over the model/payoff/maturity battery",
        ratio <= 1.0, ratio, detail,
    )


def ac8_bachelier(config: RunConfig) -> CriterionResult:
    """Constant-volatility degenerate check against the Bachelier formula."""
    tol = _tol(config, "AC-8", 1e-4)
    c_vol, t = 0.2, 1.0
    model = QnvModel(0.0, 0.0, c_vol, 0.0)
    spot = 1.0
    contract = OptionContract(PayoffKind.CALL, strike=spot, maturity=t)
    res = price_crank_nicolson(model, contract, spots=np.array([spot]))
    exact = c_vol * math.sqrt(t / (2.0 * math.pi))
    err = abs(float(res.prices[0]) - exact)
    return CriterionResult(
        "AC-8", "Bachelier degenerate check (a = b = 0)",
        err / tol <= 1.0, err / tol,
        f"CN {res.prices[0]:.8f} vs closed form {exact:.8f}, diff {err:.2e} (tol {tol:.0e})",
    )


def ac9_special_functions(config: RunConfig) -> CriterionResult:
    """2F1 vs Euler integral; contiguous relation; log-gamma reference."""
    tol_euler = _tol(config, "AC-9", 1e-10)
    tol_contig = 1e-9
    tol_lg = 1e-13
    rng = np.random.default_rng(config.seed + 9)

    worst_euler = 0.0
    n_done = 0
    while n_done < 50:
        a = rng.uniform(-2.0, 3.0)
        b = rng.uniform(0.1, 3.0)
        c = b + rng.uniform(0.1, 3.0)  # ensures c > b > 0
        z = rng.uniform(-0.9, 0.9)
        if abs((c - a - b) - round(c - a - b)) < 2e-2 and z > 0.7:
            continue
        series = specfun.hyp2f1(a, b, c, z)
        val, _ = integrate.quad(
            lambda u: u ** (b - 1.0) * (1.0 - u) ** (c - b - 1.0) * (1.0 - u * z) ** (-a),
            0.0, 1.0, epsabs=1e-14, epsrel=1e-13, limit=200,
        )
        lg = specfun.log_gamma(c) - specfun.log_gamma(b) - specfun.log_gamma(c - b)
        euler = math.exp(lg) * val
        worst_euler = max(worst_euler, abs(series - euler) / max(1.0, abs(euler)))
        n_done += 1

    worst_contig = 0.0
    for _ in range(50):
        a = rng.uniform(-2.0, 3.0)
        b = rng.uniform(-2.0, 3.0)
        c = rng.uniform(0.3, 4.0)
        z = rng.uniform(-0.6, 0.6)
        f_m = specfun.hyp2f1(a - 1.0, b, c, z)
        f_0 = specfun.hyp2f1(a, b, c, z)
        f_p = specfun.hyp2f1(a + 1.0, b, c, z)
        lhs = (c - a) * f_m + (2 * a - c + (b - a) * z) * f_0 + a * (z - 1.0) * f_p
        scale = max(abs(f_m), abs(f_0), abs(f_p), 1.0) * max(abs(a) + abs(c), 1.0)
        worst_contig = max(worst_contig, abs(lhs) / scale)

    worst_lg = 0.0
    for _ in range(200):
        x = rng.uniform(0.05, 60.0)
        ref = float(special.gammaln(x))
        worst_lg = max(worst_lg, abs(specfun.log_gamma(x) - ref) / max(1.0, abs(ref)))

    ratio = max(worst_euler / tol_euler, worst_contig / tol_contig, worst_lg / tol_lg)
    return CriterionResult(
        "AC-9", "special functions: Euler integral, contiguous relation, log-gamma",
        ratio <= 1.0, ratio,
        f"series-vs-Euler {worst_euler:.2e} (tol {tol_euler:.0e}); contiguous "
        f"{worst_contig:.2e} (tol {tol_contig:.0e}); log-gamma {worst_lg:.2e} (tol {tol_lg:.0e})",
    )


CRITERIA = {
    "AC-1": ac1_lamperti,
    "AC-2": ac2_potential_identity,
    "AC-3": ac3_spectrum_agreement,
    "AC-4": ac4_eigenfunction_quality,
    "AC-5": ac5_kernel_properties,
    "AC-6": ac6_bond_reproduction,
    "AC-7": ac7_oracle_triangle,
    "AC-8": ac8_bachelier,
    "AC-9": ac9_special_functions,
}


def run_battery(config: RunConfig | None = None, ids: list[str] | None = None) -> list[CriterionResult]:
    config = config or RunConfig()
    ids = ids or list(CRITERIA)
    results = []
    for cid in ids:
        if cid not in CRITERIA:
            raise ValueError(f"unknown criterion id {cid!r}; known: {sorted(CRITERIA)}")
        start = time.perf_counter()
        try:
            res = CRITERIA[cid](config)
        except Exception as exc:  # a blown-up criterion is a failure, not a crash
            res = CriterionResult(
                cid, CRITERIA[cid].__doc__.splitlines()[0] if CRITERIA[cid].__doc__ else cid,
                False, math.inf, f"criterion raised {type(exc).__name__}: {exc}",
            )
        res.seconds = time.perf_counter() - start
        results.append(res)
    return results


def format_report(results: list[CriterionResult]) -> str:
    lines = []
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        lines.append(
            f"[{status}] {res.cid} {res.description}: measured/tol = {res.measured:.3e}"
        )
        lines.append(f"       {res.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} criteria passed")
    return "\n".join(lines)
