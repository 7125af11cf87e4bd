"""Coordinate, gauge, and potential machinery for hyperbolic QNV models.

Transformation chain (time-to-maturity tau = T - t, discounted price
v = e^{r tau} C):

1. Unit-diffusion coordinate  x(S) = integral dS'/sigma(S'), which for the
   factored quadratic evaluates to
       x(S) = ln((S - S_l)/(S_u - S)) / (abar (S_u - S_l)),
   mapping (S_l, S_u) onto the whole real line. Inverse:
       S(x) = m + d tanh(kappa x),
   with m the root midpoint, d the half-distance, kappa = abar*d.
2. In x the PDE reads v_tau = (1/2) v_xx + nu(x) v_x with drift
       nu(x) = r S(x)/sigma(S(x)) - (1/2) sigma'(S(x)),
   where sigma is the positive factored form and sigma' its derivative
   with respect to S. Writing out the symmetric part:
       nu(x) = r S/sigma + kappa tanh(kappa x).
3. The gauge scaling v = g psi with g = exp(-integral nu dy) removes the
   drift and yields psi_tau = -H psi for the self-adjoint Hamiltonian
       H = -(1/2) d^2/dx^2 + W(x),    W = (1/2)(nu^2 + nu').

Derivative convention
---------------------
sigma' here is the derivative of the same factored sigma that defines the
coordinate map. Using the raw polynomial's derivative instead flips the
sign of the symmetric drift term; that variant makes W a sech^2 well but
propagates mirrored dynamics, and its prices disagree with a direct
finite-difference solve of the pricing PDE for any asymmetric payoff. The
consistent convention is kept throughout; with it, the r = 0 potential of
every hyperbolic model is the constant kappa^2/2 (well strength zero) and
the gauge is g = sech(kappa x) dressed with the rate term.

For r != 0 the drift term r S/sigma diverges exponentially at the roots,
so |ln g| eventually exceeds the floating-point exponent range;
``max_safe_halfwidth`` returns the usable half-width for a given budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize

from .model import ModelError, QnvModel, Regime, classify

__all__ = [
    "GeometryError",
    "CoordinateMap",
    "PoschlTellerFit",
    "PotentialProfile",
    "coordinate_map",
    "lamperti_forward",
    "lamperti_inverse",
    "drift_nu",
    "drift_nu_prime",
    "gauge_log",
    "default_grid",
    "potential",
    "synthetic_pt_profile",
    "fit_poschl_teller",
    "max_safe_halfwidth",
]

# exp() overflows just above 709; stay clear of it so downstream products
# of g and 1/g remain representable.
GAUGE_LOG_LIMIT = 700.0
# Max |ln g| allowed on a pricing grid; keeps g * K * psi products finite.
GAUGE_LOG_BUDGET = 280.0
EXACT_FIT_RTOL = 1e-8


class GeometryError(ValueError):
    """Domain violations or numerical-guard trips in the coordinate chain."""


@dataclass(frozen=True)
class _Hyperbolic:
    """Cached factored-form constants of a hyperbolic model."""

    s_l: float
    s_u: float
    mid: float
    half: float
    abar: float
    kappa: float  # abar * half

    @property
    def q(self) -> float:
        return 2.0 * self.kappa


def _hyper(model: QnvModel) -> _Hyperbolic:
    geo = classify(model)
    if geo.regime is not Regime.HYPERBOLIC:
        raise GeometryError(
            f"model is {geo.regime.value}; the coordinate chain needs two real roots"
        )
    s_l, s_u = geo.s_lower, geo.s_upper
    assert s_l is not None and s_u is not None
    half = 0.5 * (s_u - s_l)
    abar = abs(model.a)
    return _Hyperbolic(s_l, s_u, 0.5 * (s_l + s_u), half, abar, abar * half)


def lamperti_forward(model: QnvModel, s: float) -> float:
    """x(S) for S strictly inside the root interval."""
    h = _hyper(model)
    if not h.s_l < s < h.s_u:
        raise GeometryError(
            f"S={s} outside the open interval ({h.s_l}, {h.s_u})"
        )
    return (math.log(s - h.s_l) - math.log(h.s_u - s)) / h.q


def lamperti_inverse(model: QnvModel, x: float) -> float:
    """S(x); total on the real line, saturating toward the roots."""
    h = _hyper(model)
    return h.mid + h.half * math.tanh(h.kappa * x)


def _sigma_of_x(h: _Hyperbolic, x: np.ndarray | float) -> np.ndarray | float:
    sech2 = 1.0 / np.cosh(h.kappa * np.asarray(x, dtype=float)) ** 2
    out = h.abar * h.half**2 * sech2
    return float(out) if np.isscalar(x) else out


def drift_nu(model: QnvModel, x: np.ndarray | float) -> np.ndarray | float:
    """Drift nu(x) = r S/sigma + kappa tanh(kappa x) of the x-coordinate PDE."""
    h = _hyper(model)
    xv = np.asarray(x, dtype=float)
    sym = h.kappa * np.tanh(h.kappa * xv)
    if model.r == 0.0:
        out = sym
    else:
        kx = h.kappa * xv
        s = h.mid + h.half * np.tanh(kx)
        # 1/sigma = cosh^2(kappa x)/(abar d^2), computed through log-cosh so
        # the overflow is a clean exception instead of an inf/NaN cascade
        log_cosh = np.abs(kx) + np.log1p(np.exp(-2.0 * np.abs(kx))) - math.log(2.0)
        with np.errstate(over="raise"):
            try:
                inv_sigma = np.exp(2.0 * log_cosh) / (h.abar * h.half**2)
                out = model.r * s * inv_sigma + sym
            except FloatingPointError as exc:
                raise GeometryError(
                    f"drift overflow at |x| ~ {float(np.max(np.abs(xv))):.3g}; "
                    "r S / sigma exceeds double range near the roots"
                ) from exc
    return float(out) if np.isscalar(x) else out


def drift_nu_prime(model: QnvModel, x: np.ndarray | float) -> np.ndarray | float:
    """Analytic nu'(x) = (d nu/dS) sigma(S(x)), using dS/dx = sigma.

    Avoids finite differencing inside the potential, where grid noise
    would be amplified by the square in W.
    """
    h = _hyper(model)
    xv = np.asarray(x, dtype=float)
    tanh = np.tanh(h.kappa * xv)
    sig = h.abar * h.half**2 * (1.0 - tanh**2)
    out = h.abar * sig  # symmetric part: kappa^2 sech^2
    if model.r != 0.0:
        s = h.mid + h.half * tanh
        sig_prime = -2.0 * h.abar * (s - h.mid)
        out = model.r - model.r * s * sig_prime / sig + h.abar * sig
    return float(out) if np.isscalar(x) else out


def _rate_gauge_term(h: _Hyperbolic, x: np.ndarray) -> np.ndarray:
    """integral_0^x r S/sigma dy, divided by r (closed form, r-independent).

    Substituting S(y) reduces the integral to S/sigma^2 in price space,
    whose partial fractions integrate to logs plus simple poles:

        (1/abar^2) [ F(S(x)) - F(m) ],
        F(S) = m/(4 d^3) ln((S-S_l)/(S_u-S))
             - S_l/(4 d^2 (S-S_l)) + S_u/(4 d^2 (S_u-S)).

    Using S - S_l = d(1+tanh), S_u - S = d(1-tanh) keeps everything in
    exponentials of kappa*x with no cancellation at large |x|.
    """
    kx = h.kappa * x
    log_ratio = 2.0 * kx  # ln((S-S_l)/(S_u-S)) = q x
    # 1/(S-S_l) = (1+e^{-2 kx})/(2d), 1/(S_u-S) = (1+e^{+2 kx})/(2d)
    inv_lo = (1.0 + np.exp(-2.0 * kx)) / (2.0 * h.half)
    inv_hi = (1.0 + np.exp(2.0 * kx)) / (2.0 * h.half)
    f_at_x = (
        h.mid / (4.0 * h.half**3) * log_ratio
        - h.s_l / (4.0 * h.half**2) * inv_lo
        + h.s_u / (4.0 * h.half**2) * inv_hi
    )
    f_at_mid = (-h.s_l + h.s_u) / (4.0 * h.half**3)
    return (f_at_x - f_at_mid) / h.abar**2


def gauge_log(model: QnvModel, x: np.ndarray | float) -> np.ndarray | float:
    """ln g(x) = -integral_0^x nu(y) dy, anchored at g(0) = 1.

    Closed form: the symmetric part integrates to ln cosh(kappa x), the
    rate part to the partial-fraction expression in ``_rate_gauge_term``.
    Adaptive quadrature of nu reproduces this to 1e-10 and serves as the
    independent oracle in the test suite.
    """
    h = _hyper(model)
    xv = np.asarray(x, dtype=float)
    # ln cosh without overflow: |kx| + log1p(e^{-2|kx|}) - ln 2
    kx = h.kappa * xv
    log_cosh = np.abs(kx) + np.log1p(np.exp(-2.0 * np.abs(kx))) - math.log(2.0)
    out = -log_cosh
    if model.r != 0.0:
        out = out - model.r * _rate_gauge_term(h, xv)
    if np.any(np.abs(out) > GAUGE_LOG_LIMIT):
        raise GeometryError(
            "gauge factor exceeds double-precision range; restrict the grid "
            f"to |x| <= {max_safe_halfwidth(model):.4g}"
        )
    return float(out) if np.isscalar(x) else out


def gauge_log_quadrature(model: QnvModel, x: float) -> float:
    """Oracle path: -integral_0^x nu dy via adaptive quadrature."""
    val, err = integrate.quad(
        lambda y: drift_nu(model, y), 0.0, x, limit=200, epsabs=1e-13, epsrel=1e-12
    )
    if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
        raise GeometryError(f"gauge quadrature failed to converge at x={x} (err={err})")
    return -val


def max_safe_halfwidth(model: QnvModel, budget: float = GAUGE_LOG_BUDGET) -> float:
    """Largest half-width L with |ln g| <= budget on [-L, L]."""
    h = _hyper(model)
    if model.r == 0.0:
        # ln cosh(kappa L) = budget
        return (budget + math.log(2.0)) / h.kappa

    def over(xv: float) -> float:
        return max(abs(float(gauge_log_unchecked(model, xv))),
                   abs(float(gauge_log_unchecked(model, -xv)))) - budget

    lo, hi = 0.0, 1.0 / h.kappa
    while over(hi) < 0.0 and hi < 1e6:
        lo, hi = hi, 2.0 * hi
    if over(hi) < 0.0:
        return hi
    return optimize.brentq(over, lo, hi, xtol=1e-9)


def gauge_log_unchecked(model: QnvModel, x: np.ndarray | float) -> np.ndarray | float:
    """gauge_log without the overflow guard (internal, for the guard itself)."""
    h = _hyper(model)
    xv = np.asarray(x, dtype=float)
    kx = h.kappa * xv
    log_cosh = np.abs(kx) + np.log1p(np.exp(-2.0 * np.abs(kx))) - math.log(2.0)
    out = -log_cosh
    if model.r != 0.0:
        out = out - model.r * _rate_gauge_term(h, xv)
    return float(out) if np.isscalar(x) else out


@dataclass(frozen=True)
class CoordinateMap:
    """Forward/inverse Lamperti pair for one hyperbolic model."""

    model: QnvModel
    s_lower: float
    s_upper: float
    forward: Callable[[float], float]
    inverse: Callable[[float], float]


def coordinate_map(model: QnvModel) -> CoordinateMap:
    h = _hyper(model)
    return CoordinateMap(
        model=model,
        s_lower=h.s_l,
        s_upper=h.s_u,
        forward=lambda s: lamperti_forward(model, s),
        inverse=lambda x: lamperti_inverse(model, x),
    )


@dataclass(frozen=True)
class PoschlTellerFit:
    """Fitted well parameters for W ~ v0 - lam(lam+1)/(2 alpha^2) sech^2(x/alpha)."""

    lam: float
    alpha: float
    v0: float
    residual: float

    @property
    def exact(self) -> bool:
        return math.isfinite(self.residual) and self.residual <= self._scale_tol

    @property
    def _scale_tol(self) -> float:
        depth = abs(self.lam * (self.lam + 1.0)) / (2.0 * self.alpha**2)
        return EXACT_FIT_RTOL * max(abs(self.v0) + depth, 1e-8)


@dataclass(frozen=True)
class PotentialProfile:
    """Effective potential, drift, and gauge sampled on a uniform x grid."""

    grid: np.ndarray
    w: np.ndarray
    nu: np.ndarray | None = None
    lng: np.ndarray | None = None
    pt_fit: PoschlTellerFit | None = None
    derivative_check: float | None = None

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def to_csv(self) -> str:
        """Plot-ready CSV with columns x, nu, lng, W."""
        lines = ["x,nu,lng,W"]
        nu = self.nu if self.nu is not None else np.full_like(self.grid, math.nan)
        lng = self.lng if self.lng is not None else np.full_like(self.grid, math.nan)
        for xi, ni, li, wi in zip(self.grid, nu, lng, self.w):
            lines.append(f"{xi:.17g},{ni:.17g},{li:.17g},{wi:.17g}")
        return "\n".join(lines) + "\n"


def default_grid(model: QnvModel, halfwidth: float | None = None, nodes: int = 4001) -> np.ndarray:
    """Uniform grid, |x| <= 20 * alpha_guess with alpha_guess = 1/(abar(S_u-S_l)).

    For r != 0 the half-width is clipped so the gauge factor stays inside
    the floating-point budget.
    """
    h = _hyper(model)
    if nodes < 101 or nodes % 2 == 0:
        raise GeometryError(f"grid nodes must be odd and >= 101, got {nodes}")
    if halfwidth is None:
        halfwidth = 20.0 / h.q
    if model.r != 0.0:
        halfwidth = min(halfwidth, max_safe_halfwidth(model))
    return np.linspace(-halfwidth, halfwidth, nodes)


def potential(model: QnvModel, grid: np.ndarray) -> PotentialProfile:
    """W = (1/2)(nu^2 + nu') on the grid, with nu and ln g alongside.

    nu' is analytic (chain rule through S); a central-difference probe of
    nu validates the grid resolution and is stored as
    ``derivative_check`` (max scaled mismatch on interior nodes).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 11:
        raise GeometryError("potential grid must be a 1-d array with >= 11 nodes")
    nu = np.asarray(drift_nu(model, grid))
    nu_p = np.asarray(drift_nu_prime(model, grid))
    w = 0.5 * (nu**2 + nu_p)
    lng = np.asarray(gauge_log(model, grid))
    h = grid[1] - grid[0]
    fd = (nu[2:] - nu[:-2]) / (2.0 * h)
    scale = np.maximum(np.abs(nu_p[1:-1]), 1.0)
    # Central differences of nu carry a relative O((kappa h)^2) truncation
    # error; a mismatch beyond 5% means the grid does not resolve the
    # drift's curvature at all.
    check = float(np.max(np.abs(fd - nu_p[1:-1]) / scale))
    if check > 0.05:
        raise GeometryError(
            f"grid too coarse: analytic nu' and central differences disagree "
            f"(relative mismatch {check:.3g}); refine the grid"
        )
    return PotentialProfile(grid=grid, w=w, nu=nu, lng=lng, derivative_check=check)


def synthetic_pt_profile(
    lam: float, alpha: float, v0: float, grid: np.ndarray
) -> PotentialProfile:
    """Profile whose W is exactly the sech^2 well; for spectrum testing."""
    grid = np.asarray(grid, dtype=float)
    w = v0 - lam * (lam + 1.0) / (2.0 * alpha**2) / np.cosh(grid / alpha) ** 2
    return PotentialProfile(grid=grid, w=w)


def fit_poschl_teller(profile: PotentialProfile) -> PoschlTellerFit:
    """Least-squares fit of v0 - lam(lam+1)/(2 alpha^2) sech^2(x/alpha) to W.

    Returns residual = max|fit - W|. A flat profile (well strength
    indistinguishable from zero) short-circuits to lam = 0 with alpha set
    from the grid scale, since alpha is unidentifiable there. A fit that
    fails to converge reports residual = inf.
    """
    x = profile.grid
    w = profile.w
    scale = float(np.max(np.abs(w)))
    v0_guess = 0.5 * (float(w[0]) + float(w[-1]))
    depth_guess = v0_guess - float(np.min(w))
    span = float(x[-1] - x[0])
    if depth_guess <= max(1e-12 * max(scale, 1.0), 1e-14):
        v0 = float(np.mean(w))
        residual = float(np.max(np.abs(w - v0)))
        return PoschlTellerFit(lam=0.0, alpha=span / 40.0, v0=v0, residual=residual)

    # Half-width at half depth fixes the initial alpha: sech^2 = 1/2 at
    # x/alpha = arccosh(sqrt(2)) ~ 0.8814.
    below = np.where(v0_guess - w > 0.5 * depth_guess)[0]
    halfw = 0.5 * (x[below[-1]] - x[below[0]]) if below.size >= 2 else span / 8.0
    alpha0 = max(halfw / 0.8814, 1e-3 * span)
    strength0 = 2.0 * depth_guess * alpha0**2  # lam(lam+1)
    lam0 = 0.5 * (math.sqrt(1.0 + 4.0 * strength0) - 1.0)

    def residuals(p: np.ndarray) -> np.ndarray:
        lam, alpha, v0 = p
        return v0 - lam * (lam + 1.0) / (2.0 * alpha**2) / np.cosh(x / alpha) ** 2 - w

    try:
        sol = optimize.least_squares(
            residuals,
            x0=np.array([lam0, alpha0, v0_guess]),
            bounds=(np.array([0.0, 1e-8, -np.inf]), np.array([np.inf, np.inf, np.inf])),
            xtol=3e-16,
            ftol=3e-16,
            gtol=1e-15,
        )
    except Exception:
        return PoschlTellerFit(lam=math.nan, alpha=math.nan, v0=math.nan, residual=math.inf)
    if not sol.success:
        return PoschlTellerFit(lam=math.nan, alpha=math.nan, v0=math.nan, residual=math.inf)
    lam, alpha, v0 = (float(v) for v in sol.x)
    residual = float(np.max(np.abs(residuals(sol.x))))
    return PoschlTellerFit(lam=lam, alpha=alpha, v0=v0, residual=residual)
