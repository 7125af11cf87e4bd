"""European option valuation: spectral route plus PDE and Monte Carlo oracles.

Spectral route (hyperbolic models)
----------------------------------
    C(S, 0) = e^{-rT} g(x(S)) [K_T psi_0](x(S)),  psi_0 = payoff(S(x))/g(x)

with K_T the propagator of the effective Hamiltonian. The implementation
splits the payoff into the affine chord through its values at the two
volatility roots plus a remainder h that vanishes at both roots:

    f(S) = A + B S + h(S).

The affine part prices exactly (bond = e^{-rT}, share = spot: both solve
the pricing PDE identically), and the transformed remainder
h(S(x))/g(x) decays at the grid ends instead of growing like the raw
payoff state, which keeps the kernel quadrature conditioned.

Boundary convention at the volatility roots
-------------------------------------------
sigma vanishes at the roots. For r = 0 they are unattainable and no
condition is needed. For r != 0 the drift pushes the price through a
root in finite time and the PDE needs exit data; this package uses the
affine-hedge convention: an exiting position is settled into the chord
portfolio (A bonds + B shares), so the Dirichlet data is

    C(root, tau) = A e^{-r tau} + B root.

This is the unique convention that keeps statically replicable payoffs
(bond, forward) at their model-free values, and it is applied
identically by all three methods, so the oracle triangle closes:
spectral and Monte Carlo inherit it through the same payoff split, and
Crank-Nicolson imposes it as boundary data.

Monte Carlo runs in the unit-diffusion coordinate (dx = nu dt + dW) so
the state-dependent volatility never enters the discretization; paths
that reach the coordinate cap are settled by the same affine convention.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded

from . import geometry
from .geometry import GeometryError, fit_poschl_teller, potential
from .kernel import STATE_CUTOFF_EXP, apply_kernel, assemble
from .model import ModelError, QnvModel, Regime, classify
from .spectral import (
    KQuadratureSpec,
    SpectralDecomposition,
    closed_form_spectrum,
    numerical_spectrum,
)

__all__ = [
    "PricingError",
    "PayoffKind",
    "OptionContract",
    "PriceResult",
    "default_spots",
    "payoff_values",
    "affine_chord",
    "transform_payoff",
    "price_spectral",
    "price_crank_nicolson",
    "price_monte_carlo",
]

log = logging.getLogger("smilekernel")


class PricingError(ValueError):
    """Contract/model mismatch or an accuracy guard failure."""


class PayoffKind(enum.Enum):
    CALL = "call"
    PUT = "put"
    DIGITAL_CALL = "digital_call"
    CUSTOM = "custom"


@dataclass(frozen=True)
class OptionContract:
    """European claim: payoff kind, strike, maturity, optional node table."""

    kind: PayoffKind
    strike: float = 0.0
    maturity: float = 1.0
    table: tuple[np.ndarray, np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.maturity <= 0.0 or not math.isfinite(self.maturity):
            raise PricingError(f"maturity T={self.maturity} must be > 0")
        if self.kind is PayoffKind.CUSTOM:
            if self.table is None:
                raise PricingError("custom contracts need a (nodes, payoffs) table")
            s, p = self.table
            if len(s) < 2 or len(s) != len(p):
                raise PricingError("payoff table needs matching nodes/values, >= 2 rows")
            if not np.all(np.diff(s) > 0):
                raise PricingError("payoff table nodes must be strictly increasing")
        elif not math.isfinite(self.strike):
            raise PricingError("strike must be finite")


def payoff_values(contract: OptionContract, s: np.ndarray) -> np.ndarray:
    """Terminal payoff evaluated at price levels s (vectorized)."""
    s = np.asarray(s, dtype=float)
    k = contract.strike
    if contract.kind is PayoffKind.CALL:
        return np.maximum(s - k, 0.0)
    if contract.kind is PayoffKind.PUT:
        return np.maximum(k - s, 0.0)
    if contract.kind is PayoffKind.DIGITAL_CALL:
        return np.where(s > k, 1.0, 0.0)
    nodes, vals = contract.table  # type: ignore[misc]
    return np.interp(s, nodes, vals)


@dataclass
class PriceResult:
    """Prices on a spot ladder plus method diagnostics."""

    spots: np.ndarray
    prices: np.ndarray
    method: str
    stderr: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        cols = "spot,price" + (",stderr" if self.stderr is not None else "")
        lines = [cols]
        for i, (s, p) in enumerate(zip(self.spots, self.prices)):
            row = f"{s:.17g},{p:.17g}"
            if self.stderr is not None:
                row += f",{self.stderr[i]:.17g}"
            lines.append(row)
        return "\n".join(lines) + "\n"


def default_spots(model: QnvModel, count: int = 21) -> np.ndarray:
    """count spots equally spaced strictly inside the root interval."""
    s_l, s_u = geometry._hyper(model).s_l, geometry._hyper(model).s_u
    step = (s_u - s_l) / (count + 1)
    return s_l + step * np.arange(1, count + 1)


def affine_chord(contract: OptionContract, s_l: float, s_u: float) -> tuple[float, float]:
    """(A, B) of the chord A + B S matching the payoff at both roots."""
    f_l = float(payoff_values(contract, np.array([s_l]))[0])
    f_u = float(payoff_values(contract, np.array([s_u]))[0])
    b = (f_u - f_l) / (s_u - s_l)
    a = f_l - b * s_l
    return a, b


def _warn_strike_range(contract: OptionContract, s_l: float, s_u: float) -> None:
    if contract.kind is not PayoffKind.CUSTOM and not s_l < contract.strike < s_u:
        log.warning(
            "strike %.6g outside the attainable interval (%.6g, %.6g); "
            "the claim is affine there", contract.strike, s_l, s_u,
        )


def transform_payoff(
    contract: OptionContract, model: QnvModel, grid: np.ndarray
) -> np.ndarray:
    """Raw transformed state psi(x, 0) = payoff(S(x)) / g(x) on the grid.

    This is the untreated state; it generally grows toward the grid ends
    (1/g is cosh-like for r = 0), which the kernel's boundary-mass
    diagnostic will flag. ``price_spectral`` avoids that growth via the
    affine split and is the supported pricing entry point.
    """
    s = np.array([geometry.lamperti_inverse(model, float(x)) for x in np.asarray(grid)])
    f = payoff_values(contract, s)
    if not np.all(np.isfinite(f)):
        raise PricingError("payoff evaluates non-finite inside the root interval")
    lng = np.asarray(geometry.gauge_log(model, np.asarray(grid, dtype=float)))
    psi = f * np.exp(-lng)
    if not np.all(np.isfinite(psi)):
        raise PricingError(
            "transformed payoff overflows: payoff mass too close to a root "
            "for this grid (psi = payoff/g is unbounded there)"
        )
    return psi


# ---------------------------------------------------------------------------
# Spectral route
# ---------------------------------------------------------------------------

def _degenerate_alpha(halfwidth: float, k_nodes: int, k_mult: float) -> float:
    """Length scale for a flat potential, where alpha is unidentifiable.

    Chosen so the k rule resolves oscillations across the working window:
    node spacing k_mult/(alpha^2 n) matched to the Nyquist-like limit
    pi/(2 L).
    """
    return math.sqrt(2.0 * k_mult * halfwidth / (math.pi * k_nodes))


def price_spectral(
    model: QnvModel,
    contract: OptionContract,
    spots: np.ndarray | None = None,
    grid: np.ndarray | None = None,
    k_spec: KQuadratureSpec | None = None,
) -> PriceResult:
    """Spectral price on a spot ladder.

    Uses the closed-form sech^2 spectrum when the fitted potential is
    exact at tolerance; otherwise falls back to the finite-difference
    spectrum transparently (recorded in diagnostics, as happens for
    r != 0 where the drift term r S / sigma is not a sech^2 shape).
    """
    geo = classify(model)
    if geo.regime is not Regime.HYPERBOLIC:
        raise PricingError(
            f"spectral pricing needs the hyperbolic regime, model is {geo.regime.value}"
        )
    h = geometry._hyper(model)
    _warn_strike_range(contract, h.s_l, h.s_u)
    spots = default_spots(model) if spots is None else np.asarray(spots, dtype=float)
    if np.any((spots <= h.s_l) | (spots >= h.s_u)):
        raise PricingError("spots must lie strictly inside the root interval")
    if grid is None:
        grid = geometry.default_grid(model)
    k_spec = k_spec or KQuadratureSpec()

    profile = potential(model, grid)
    fit = fit_poschl_teller(profile)
    diag: dict = {"fit_residual": fit.residual, "fit_exact": fit.exact}

    if fit.exact:
        alpha = fit.alpha
        if fit.lam == 0.0:
            alpha = _degenerate_alpha(float(grid[-1]), k_spec.nodes, k_spec.k_max_mult)
        decomp = closed_form_spectrum(fit.lam, alpha, fit.v0, k_spec)
        kernel_grid = np.asarray(grid, dtype=float)
        diag["spectrum"] = "closed_form"
        diag["pt_fit"] = {"lam": fit.lam, "alpha": alpha, "v0": fit.v0}
    else:
        decomp = numerical_spectrum(profile)
        kernel_grid = decomp.grid
        diag["spectrum"] = "numerical_fallback"

    t = contract.maturity
    a_coef, b_coef = affine_chord(contract, h.s_l, h.s_u)
    s_of_x = h.mid + h.half * np.tanh(h.kappa * kernel_grid)
    f_vals = payoff_values(contract, s_of_x)
    if contract.kind is PayoffKind.DIGITAL_CALL and h.s_l < contract.strike < h.s_u:
        # Cell-average the jump in x: trapezoid quadrature of a raw
        # indicator carries an O(h) bias from the node straddling it.
        x_jump = geometry.lamperti_forward(model, contract.strike)
        hx = float(kernel_grid[1] - kernel_grid[0])
        frac = np.clip((kernel_grid + 0.5 * hx - x_jump) / hx, 0.0, 1.0)
        cells = np.abs(kernel_grid - x_jump) <= hx
        f_vals = np.where(cells, frac, f_vals)
    h_vals = f_vals - a_coef - b_coef * s_of_x
    lng = np.asarray(geometry.gauge_log(model, kernel_grid))
    psi_h = h_vals * np.exp(-lng)
    if not fit.exact:
        # Columns where the potential towers over the spectrum cutoff are
        # annihilated by e^{-H tau} at double precision; zeroing the state
        # there avoids spurious overflow and false tail warnings from the
        # superexponential growth of 1/g on the rate side.
        w_int = profile.w[1:-1]
        dead = (w_int - float(np.min(w_int))) * t > 4.0 * STATE_CUTOFF_EXP
        psi_h = np.where(dead, 0.0, psi_h)

    kern = assemble(decomp, t, kernel_grid)
    propagated = apply_kernel(kern, psi_h)
    disc = math.exp(-model.r * t)
    c_h_grid = disc * np.exp(lng) * propagated

    # Bound/continuum attribution of the remainder part.
    wq = kern.trapezoid_weights()
    bound_part = np.zeros_like(kernel_grid)
    for b in decomp.bound:
        phi = b.eval(kernel_grid)
        bound_part += math.exp(-b.energy * t) * phi * float(np.sum(wq * phi * psi_h))
    bound_grid = disc * np.exp(lng) * bound_part

    x_spots = np.array([geometry.lamperti_forward(model, float(s)) for s in spots])
    spline = CubicSpline(kernel_grid, c_h_grid)
    spline_b = CubicSpline(kernel_grid, bound_grid)
    inside = (x_spots >= kernel_grid[0]) & (x_spots <= kernel_grid[-1])
    if not np.all(inside):
        raise PricingError("a requested spot maps outside the working grid")
    affine = a_coef * disc + b_coef * spots
    h_at = spline(x_spots)
    prices = affine + h_at
    diag["affine_part"] = affine
    diag["bound_part"] = spline_b(x_spots)
    diag["continuum_part"] = h_at - diag["bound_part"]
    diag["n_states"] = kern.n_states
    return PriceResult(spots=spots, prices=prices, method="spectral", diagnostics=diag)


# ---------------------------------------------------------------------------
# Crank-Nicolson oracle, solved directly in (S, tau)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CnGridSpec:
    n_space: int = 2001
    n_time: int = 2000
    richardson_check: bool = True
    accuracy_tol: float = 1e-4


def _cell_average_payoff(
    contract: OptionContract, s: np.ndarray, h: float
) -> np.ndarray:
    """Payoff averaged over [s - h/2, s + h/2]; smooths kinks and jumps.

    Closed forms for the built-in payoffs; custom tables are sampled
    directly (their kinks sit on table nodes, typically coarser than the
    grid).
    """
    k = contract.strike
    lo, hi = s - 0.5 * h, s + 0.5 * h
    if contract.kind in (PayoffKind.CALL, PayoffKind.PUT):
        sgn = 1.0 if contract.kind is PayoffKind.CALL else -1.0
        return _kink_cell_avg(sgn, k, lo, hi, h)
    if contract.kind is PayoffKind.DIGITAL_CALL:
        return np.clip((hi - k) / h, 0.0, 1.0)
    return payoff_values(contract, s)


def _kink_cell_avg(sgn: float, k: float, lo: np.ndarray, hi: np.ndarray, h: float) -> np.ndarray:
    # exact cell average of max(sgn(S-K),0): quadratic around the kink
    if sgn > 0:
        a = np.maximum(lo, k)
        out = np.where(hi <= k, 0.0, 0.5 * (hi - a) * (np.maximum(hi - k, 0.0) + np.maximum(a - k, 0.0)) / h)
    else:
        b = np.minimum(hi, k)
        out = np.where(lo >= k, 0.0, 0.5 * (b - lo) * (np.maximum(k - lo, 0.0) + np.maximum(k - b, 0.0)) / h)
    return out


def _cn_domain(
    model: QnvModel, contract: OptionContract, spots: np.ndarray
) -> tuple[float, float, tuple[float, float] | None]:
    geo = classify(model)
    if geo.regime is Regime.HYPERBOLIC:
        return geo.s_lower, geo.s_upper, (geo.s_lower, geo.s_upper)
    # Far-field domain for flat/spherical regimes: wide enough that the
    # boundary is unreachable at ~10 standard deviations.
    anchors = list(spots)
    if contract.kind is not PayoffKind.CUSTOM:
        anchors.append(contract.strike)
    lo, hi = min(anchors), max(anchors)
    span = np.linspace(lo, hi, 101)
    sig = float(np.max(np.abs(model.sigma_poly(span)))) + 1e-12
    growth = math.exp(abs(model.r) * contract.maturity)
    w = 10.0 * sig * math.sqrt(contract.maturity) * growth + 0.1 * (hi - lo + 1.0)
    return lo - w, hi + w, None


def price_crank_nicolson(
    model: QnvModel,
    contract: OptionContract,
    spots: np.ndarray | None = None,
    grid_spec: CnGridSpec | None = None,
) -> PriceResult:
    """theta = 1/2 finite-difference solve of the pricing PDE in (S, tau).

    Rannacher start (four implicit half-steps) suppresses the scheme's
    ringing on kinked and digital payoffs; the payoff is cell-averaged
    onto the grid for the same reason. Dirichlet data: the affine-hedge
    convention at volatility roots, discounted far-field asymptotes on
    unbounded domains. A Richardson self-check re-solves on a halved
    grid and flags accuracy failures.
    """
    spec = grid_spec or CnGridSpec()
    geo = classify(model)
    if spots is None:
        if geo.regime is not Regime.HYPERBOLIC:
            raise PricingError("non-hyperbolic models need explicit spots")
        spots = default_spots(model)
    spots = np.asarray(spots, dtype=float)

    price = _cn_solve(model, contract, spots, spec.n_space, spec.n_time)
    diag: dict = {"n_space": spec.n_space, "n_time": spec.n_time}
    if spec.richardson_check:
        half = _cn_solve(
            model, contract, spots, spec.n_space // 2 + 1, max(spec.n_time // 2, 16)
        )
        drift = float(np.max(np.abs(price - half)))
        diag["refinement_drift"] = drift
        if drift > 10.0 * spec.accuracy_tol * max(1.0, float(np.max(np.abs(price)))):
            raise PricingError(
                f"finite-difference accuracy failure: halving the grid moves "
                f"prices by {drift:.3e} (> 10x tolerance {spec.accuracy_tol:.0e})"
            )
    return PriceResult(spots=spots, prices=price, method="crank_nicolson", diagnostics=diag)


def _cn_solve(
    model: QnvModel,
    contract: OptionContract,
    spots: np.ndarray,
    n_space: int,
    n_time: int,
) -> np.ndarray:
    s_lo, s_hi, roots_pair = _cn_domain(model, contract, spots)
    if np.any((spots < s_lo) | (spots > s_hi)):
        raise PricingError("spots outside the pricing domain")
    s = np.linspace(s_lo, s_hi, n_space)
    hs = s[1] - s[0]
    t = contract.maturity
    dt = t / n_time
    r = model.r

    sig2 = model.sigma_poly(s) ** 2
    if roots_pair is not None:
        # exact zeros at the walls keep the degenerate rows clean
        sig2[0] = sig2[-1] = 0.0

    si = s[1:-1]
    sig2_i = sig2[1:-1]
    # interior operator L = 1/2 sig^2 D2 + r S D1 - r I
    lower = 0.5 * sig2_i / hs**2 - 0.5 * r * si / hs
    upper = 0.5 * sig2_i / hs**2 + 0.5 * r * si / hs
    main = -sig2_i / hs**2 - r

    if roots_pair is not None:
        a_coef, b_coef = affine_chord(contract, s_lo, s_hi)

        def dirichlet(tau: float) -> tuple[float, float]:
            disc = math.exp(-r * tau)
            return a_coef * disc + b_coef * s_lo, a_coef * disc + b_coef * s_hi
    else:
        f_lo = float(payoff_values(contract, np.array([s_lo]))[0])
        f_lo2 = float(payoff_values(contract, np.array([s_lo + hs]))[0])
        f_hi = float(payoff_values(contract, np.array([s_hi]))[0])
        f_hi2 = float(payoff_values(contract, np.array([s_hi - hs]))[0])
        b_lo = (f_lo2 - f_lo) / hs
        b_hi = (f_hi - f_hi2) / hs

        def dirichlet(tau: float) -> tuple[float, float]:
            disc = math.exp(-r * tau)
            return (
                b_lo * s_lo + (f_lo - b_lo * s_lo) * disc,
                b_hi * s_hi + (f_hi - b_hi * s_hi) * disc,
            )

    u = _cell_average_payoff(contract, s, hs)[1:-1]
    n = si.size

    def step_matrices(theta: float, dt_eff: float):
        # banded (ab) form for solve_banded, implicit side
        ab = np.zeros((3, n))
        ab[0, 1:] = -theta * dt_eff * upper[:-1]
        ab[1, :] = 1.0 - theta * dt_eff * main
        ab[2, :-1] = -theta * dt_eff * lower[1:]
        return ab

    def explicit_apply(v: np.ndarray, theta_c: float, dt_eff: float) -> np.ndarray:
        out = v + theta_c * dt_eff * (main * v)
        out[1:] += theta_c * dt_eff * lower[1:] * v[:-1]
        out[:-1] += theta_c * dt_eff * upper[:-1] * v[1:]
        return out

    tau = 0.0
    # Rannacher: four fully implicit half steps
    n_rann = min(4, 2 * n_time)
    ab_half = step_matrices(1.0, 0.5 * dt)
    for _ in range(n_rann):
        rhs = u.copy()
        tau_next = tau + 0.5 * dt
        d_lo, d_hi = dirichlet(tau_next)
        rhs[0] += 0.5 * dt * lower[0] * d_lo
        rhs[-1] += 0.5 * dt * upper[-1] * d_hi
        u = solve_banded((1, 1), ab_half, rhs)
        tau = tau_next

    n_full = n_time - math.ceil(n_rann / 2)
    ab_cn = step_matrices(0.5, dt)
    for _ in range(n_full):
        d_lo0, d_hi0 = dirichlet(tau)
        tau_next = tau + dt
        d_lo1, d_hi1 = dirichlet(tau_next)
        rhs = explicit_apply(u, 0.5, dt)
        rhs[0] += 0.5 * dt * lower[0] * (d_lo0 + d_lo1)
        rhs[-1] += 0.5 * dt * upper[-1] * (d_hi0 + d_hi1)
        u = solve_banded((1, 1), ab_cn, rhs)
        tau = tau_next

    full = np.empty(n_space)
    full[1:-1] = u
    full[0], full[-1] = dirichlet(tau)
    return CubicSpline(s, full)(spots)


# ---------------------------------------------------------------------------
# Monte Carlo oracle (unit-diffusion coordinate)
# ---------------------------------------------------------------------------

def price_monte_carlo(
    model: QnvModel,
    contract: OptionContract,
    spot: float,
    paths: int = 100_000,
    steps: int | None = None,
    seed: int = 12345,
    batch: int = 200_000,
) -> PriceResult:
    """Euler simulation of dx = nu(x) dt + dW from x(spot); seeded.

    Paths crossing the coordinate cap (price within a vanishing distance
    of a root, or the gauge-safety limit when r != 0) are settled by the
    affine-hedge convention: terminal-equivalent payout
    A + B root e^{r (T - t_hit)}. For r = 0 the roots are unattainable
    and the cap is effectively never hit.

    Degenerate a = b = 0 models are simulated exactly (the terminal
    price is Gaussian); other non-hyperbolic regimes are not supported
    by this oracle.
    """
    if paths < 1:
        raise PricingError("paths must be positive")
    if paths < 10_000:
        log.warning("paths=%d below the 1e4 reporting floor; results are noisy", paths)
    t = contract.maturity
    geo = classify(model)
    rng = np.random.default_rng(seed)

    if geo.regime is not Regime.HYPERBOLIC:
        if model.a == 0.0 and model.b == 0.0:
            # dS = r S dt + c dW: linear SDE, exact Gaussian terminal law
            mean = spot * math.exp(model.r * t)
            if model.r == 0.0:
                var = model.c**2 * t
            else:
                var = model.c**2 * (math.exp(2.0 * model.r * t) - 1.0) / (2.0 * model.r)
            s_t = mean + math.sqrt(var) * rng.standard_normal(paths)
            pay = payoff_values(contract, s_t) * math.exp(-model.r * t)
            return PriceResult(
                spots=np.array([spot]),
                prices=np.array([float(np.mean(pay))]),
                method="monte_carlo",
                stderr=np.array([float(np.std(pay, ddof=1) / math.sqrt(paths))]),
                diagnostics={"paths": paths, "exact_gaussian": True, "seed": seed},
            )
        raise PricingError(
            f"Monte Carlo supports hyperbolic and constant-volatility models, "
            f"not {geo.regime.value}"
        )

    h = geometry._hyper(model)
    if not h.s_l < spot < h.s_u:
        raise PricingError(f"spot {spot} outside the root interval")
    if steps is None:
        steps = max(256, int(math.ceil(256 * t)))
    dt = t / steps
    sq = math.sqrt(dt)
    x0 = geometry.lamperti_forward(model, spot)
    x_cap = 18.0 / h.q
    if model.r != 0.0:
        x_cap = min(x_cap, geometry.max_safe_halfwidth(model, 250.0))
    a_coef, b_coef = affine_chord(contract, h.s_l, h.s_u)

    total = 0.0
    total_sq = 0.0
    n_absorbed = 0
    done = 0
    while done < paths:
        m = min(batch, paths - done)
        x = np.full(m, x0)
        alive = np.ones(m, dtype=bool)
        payout = np.zeros(m)
        for j in range(steps):
            xa = x[alive]
            if xa.size == 0:
                break
            # Heun predictor-corrector on the drift: removes the O(dt)
            # weak bias of plain Euler (diffusion is unit, so no Milstein
            # term exists in this coordinate).
            dw = sq * rng.standard_normal(xa.size)
            nu0 = np.asarray(geometry.drift_nu(model, xa))
            x_pred = np.clip(xa + nu0 * dt + dw, -x_cap, x_cap)
            nu1 = np.asarray(geometry.drift_nu(model, x_pred))
            xa = xa + 0.5 * (nu0 + nu1) * dt + dw
            hit = np.abs(xa) >= x_cap
            if np.any(hit):
                idx = np.flatnonzero(alive)
                hit_idx = idx[hit]
                root = np.where(xa[hit] > 0, h.s_u, h.s_l)
                t_remain = t - (j + 1) * dt
                payout[hit_idx] = a_coef + b_coef * root * np.exp(model.r * t_remain)
                n_absorbed += hit_idx.size
                keep = ~hit
                x[idx[keep]] = xa[keep]
                alive[hit_idx] = False
            else:
                x[alive] = xa
        if np.any(alive):
            s_t = h.mid + h.half * np.tanh(h.kappa * x[alive])
            payout[alive] = payoff_values(contract, s_t)
        disc = math.exp(-model.r * t)
        pv = disc * payout
        total += float(np.sum(pv))
        total_sq += float(np.sum(pv * pv))
        done += m

    mean = total / paths
    var = max(total_sq / paths - mean * mean, 0.0) * paths / max(paths - 1, 1)
    se = math.sqrt(var / paths)
    return PriceResult(
        spots=np.array([spot]),
        prices=np.array([mean]),
        method="monte_carlo",
        stderr=np.array([se]),
        diagnostics={
            "paths": paths,
            "steps": steps,
            "seed": seed,
            "absorbed_fraction": n_absorbed / paths,
        },
    )
