"""Spectral decomposition of the pricing Hamiltonian H = -1/2 d^2/dx^2 + W.

Two routes produce a :class:`SpectralDecomposition`:

``closed_form_spectrum``
    Exact spectrum of the hyperbolic sech^2 well
        W(x) = V0 - lam(lam+1)/(2 alpha^2) sech^2(x/alpha).
    Bound levels (y = x/alpha, mu = lam - n):
        E_n = V0 - (lam - n)^2 / (2 alpha^2),   n = 0 .. floor(lam),
    with eigenfunctions sech^mu(y) * Gegenbauer_n^(mu+1/2)(tanh y),
    proportional to the Ferrers function P_lam^mu(tanh y). The continuum
    E = V0 + k^2/(2 alpha^2) is doubly degenerate; real even/odd standing
    waves come from the substitution t = -sinh^2(y), which turns the
    stationary equation into a hypergeometric equation with conjugate
    parameters:
        phi_even = cosh^-lam(y) 2F1((ik-lam)/2, (-ik-lam)/2; 1/2; t)
        phi_odd  = cosh^-lam(y) sinh(y) *
                   2F1((1+ik-lam)/2, (1-ik-lam)/2; 3/2; t)
    Conjugate parameters make the series real term by term. Large |t|
    uses the Pfaff map t -> tanh^2(y) and the 1/t connection formula,
    with complex arithmetic internally and exactly real results.

``numerical_spectrum``
    Symmetric three-point finite differences with Dirichlet walls; the
    general-regime path and the independent oracle for the closed forms.

Continuum normalization
-----------------------
Standing waves are scaled to asymptotic amplitude 1/sqrt(alpha pi) (in
y), which makes the even+odd family delta-orthonormal; the amplitude is
exact, 2 |Gamma(c) Gamma(-ik) / (Gamma(b) Gamma(c-a))|, read off the 1/t
connection coefficients already needed for far-field evaluation. The
tau -> 0 delta property of the assembled kernel is the acceptance check
on this constant, and the test suite also re-extracts the amplitude by a
least-squares fit of the far tail.
"""

from __future__ import annotations

import enum
import math
from cmath import exp as cexp
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import eigh_tridiagonal

from .geometry import PotentialProfile
from .specfun import SpecialFunctionError, hyp2f1_series_c, log_gamma_c

__all__ = [
    "SpectralError",
    "SpectrumSource",
    "KQuadratureSpec",
    "BoundState",
    "ContinuumBlock",
    "SpectralDecomposition",
    "closed_form_spectrum",
    "numerical_spectrum",
    "normalize",
]

# Threshold state at integer lam (mu ~ 0) is not normalizable; drop it.
INTEGER_LAM_TOL = 1e-9
_SERIES_MAX = 400
_SERIES_RTOL = 1e-14


class SpectralError(ValueError):
    """Invalid spectral construction or a failed resolution check."""


class SpectrumSource(enum.Enum):
    CLOSED_FORM = "closed_form"
    NUMERICAL_GRID = "numerical_grid"


@dataclass(frozen=True)
class KQuadratureSpec:
    """Gauss-Legendre rule on (0, k_max] with k_max = k_max_mult / alpha."""

    k_max_mult: float = 40.0
    nodes: int = 400

    def rule(self, alpha: float) -> tuple[np.ndarray, np.ndarray]:
        if self.nodes < 8:
            raise SpectralError(f"k quadrature needs >= 8 nodes, got {self.nodes}")
        k_max = self.k_max_mult / alpha
        xi, wi = np.polynomial.legendre.leggauss(self.nodes)
        return 0.5 * k_max * (xi + 1.0), 0.5 * k_max * wi


@dataclass(frozen=True)
class BoundState:
    """Discrete level: quantum number, energy, unit-L2 eigenfunction."""

    n: int
    energy: float
    mu: float
    eval: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ContinuumBlock:
    """Quadrature-discretized continuum: sum_j weights[j] phi_j(x) phi_j(x')."""

    energies: np.ndarray
    weights: np.ndarray
    eval_matrix: Callable[[np.ndarray], np.ndarray]  # (n_states, n_x)
    labels: tuple[str, ...]  # per-state tag for CSV export

    def __len__(self) -> int:
        return int(self.energies.size)


@dataclass
class SpectralDecomposition:
    """Bound levels plus discretized continuum of one Hamiltonian."""

    bound: list[BoundState]
    continuum: ContinuumBlock
    source: SpectrumSource
    lam: float | None = None
    alpha: float | None = None
    v0: float | None = None
    grid: np.ndarray | None = None  # native grid of the numerical path
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def bound_energies(self) -> np.ndarray:
        return np.array([b.energy for b in self.bound])

    def matrices(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(bound, continuum) state-value matrices on x, cached per grid."""
        key = (x.shape, float(x[0]), float(x[-1]), x.tobytes()[:64])
        hit = self._cache.get("matrices")
        if hit is not None and hit[0] == key:
            return hit[1], hit[2]
        phi_b = (
            np.vstack([b.eval(x) for b in self.bound])
            if self.bound
            else np.zeros((0, x.size))
        )
        phi_c = self.continuum.eval_matrix(x)
        self._cache["matrices"] = (key, phi_b, phi_c)
        return phi_b, phi_c

    def to_csv(self) -> str:
        """Spectrum table: kind, index/k label, energy, weight."""
        lines = ["kind,label,energy,weight"]
        for b in self.bound:
            lines.append(f"bound,{b.n},{b.energy:.17g},1")
        for lab, e, w in zip(
            self.continuum.labels, self.continuum.energies, self.continuum.weights
        ):
            lines.append(f"continuum,{lab},{e:.17g},{w:.17g}")
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Closed-form path
# ---------------------------------------------------------------------------

def _bound_quantum_numbers(lam: float) -> list[int]:
    if lam <= 0.0:
        return []
    return [n for n in range(int(math.floor(lam)) + 1) if lam - n > INTEGER_LAM_TOL]


def _gegenbauer_column(n: int, alpha_g: float, u: np.ndarray) -> np.ndarray:
    """C_n^(alpha_g)(u) by the standard three-term recurrence."""
    if n == 0:
        return np.ones_like(u)
    c_prev = np.ones_like(u)
    c_cur = 2.0 * alpha_g * u
    for m in range(1, n):
        c_next = (2.0 * (m + alpha_g) * u * c_cur - (m + 2.0 * alpha_g - 1.0) * c_prev) / (m + 1.0)
        c_prev, c_cur = c_cur, c_next
    return c_cur


def _bound_state_values(lam: float, n: int, alpha: float, x: np.ndarray) -> np.ndarray:
    """Unnormalized phi_n on x: sech^mu(y) C_n^(mu+1/2)(tanh y), y = x/alpha."""
    mu = lam - n
    y = np.asarray(x, dtype=float) / alpha
    # sech^mu without overflow at large |y|
    log_sech = -(np.abs(y) + np.log1p(np.exp(-2.0 * np.abs(y))) - math.log(2.0))
    vals = np.exp(mu * log_sech) * _gegenbauer_column(n, mu + 0.5, np.tanh(y))
    return vals


def _norm_grid(alpha: float, mu_min: float) -> np.ndarray:
    # Wide enough that the slowest tail e^{-mu_min |y|} is below ~1e-15
    # in the squared norm; near-threshold states (tiny mu) get a capped
    # width and correspondingly more nodes.
    spread = min(36.0 / max(mu_min, 1e-3), 2.0e4)
    halfwidth = alpha * max(25.0, spread)
    nodes = 8001 if spread <= 100.0 else 32001
    return np.linspace(-halfwidth, halfwidth, nodes)


@dataclass
class _ScatterFamily:
    """Vectorized even/odd scattering evaluation for one (lam, k)."""

    lam: float
    k: float
    _near_cache: dict = field(default_factory=dict, repr=False, compare=False)

    # Above this k the direct series near the origin loses digits to
    # cancellation (peak terms ~ e^{k sqrt|t|}); switch to Numerov there.
    NUMEROV_K = 20.0
    NEAR_SINH2 = 0.35

    def _series_real(self, shift: float, c: float, t: np.ndarray) -> np.ndarray:
        """2F1 with conjugate parameters: real term recurrence.

        (a+n)(b+n) = (n + shift)^2 + (k/2)^2 with shift = -lam/2 (even)
        or (1-lam)/2 (odd).
        """
        k2 = 0.25 * self.k * self.k
        term = np.ones_like(t)
        acc = np.ones_like(t)
        for n in range(_SERIES_MAX):
            num = (n + shift) ** 2 + k2
            term = term * (num / ((n + c) * (n + 1.0))) * t
            acc += term
            if np.max(np.abs(term)) <= _SERIES_RTOL * max(1.0, float(np.max(np.abs(acc)))):
                return acc
        raise SpecialFunctionError("scattering series (direct) did not converge")

    def _series_complex(
        self, a: complex, b: complex, c: complex, z: np.ndarray
    ) -> np.ndarray:
        term = np.ones(z.shape, dtype=complex)
        acc = np.ones(z.shape, dtype=complex)
        for n in range(_SERIES_MAX):
            term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0))) * z
            acc += term
            if np.max(np.abs(term)) <= _SERIES_RTOL * max(1.0, float(np.max(np.abs(acc)))):
                return acc
        raise SpecialFunctionError("scattering series (complex) did not converge")

    def _near_numerov(self, parity: str) -> CubicSpline:
        """Dense solution on [0, y_seam] for large k, where the direct
        series cancels catastrophically. Fourth-order Numerov on
        phi'' + (k^2 + lam(lam+1) sech^2 y) phi = 0 from exact Taylor
        initial data; the mesh resolves the oscillation to ~(kh)^4.
        """
        hit = self._near_cache.get(parity)
        if hit is not None:
            return hit
        lam, k = self.lam, self.k
        strength = lam * (lam + 1.0)
        y_seam = math.asinh(math.sqrt(self.NEAR_SINH2)) + 1e-3
        h = min(1e-3, 0.01 / k)
        n = int(math.ceil(y_seam / h)) + 1
        y = np.arange(n + 1) * h
        g = k * k + strength / np.cosh(y) ** 2
        g0 = float(g[0])
        phi = np.empty(n + 1)
        if parity == "even":
            phi[0] = 1.0
            phi[1] = 1.0 - g0 * h**2 / 2.0 + (g0 * g0 + 2.0 * strength) * h**4 / 24.0
        else:
            phi[0] = 0.0
            phi[1] = h - g0 * h**3 / 6.0 + (g0 * g0 + 6.0 * strength) * h**5 / 120.0
        c = 1.0 + h * h * g / 12.0
        b = 2.0 * (1.0 - 5.0 * h * h * g / 12.0)
        for j in range(1, n):
            phi[j + 1] = (b[j] * phi[j] - c[j - 1] * phi[j - 1]) / c[j + 1]
        sp = CubicSpline(y, phi)
        self._near_cache[parity] = sp
        return sp

    def connection_coefficient(self, parity: str) -> complex:
        """C = Gamma(c) Gamma(b-a) / (Gamma(b) Gamma(c-a)) of the 1/t formula."""
        lam, k = self.lam, self.k
        if parity == "even":
            c = 0.5
            b = complex(-lam / 2.0, -k / 2.0)
            c_minus_a = complex((1.0 + lam) / 2.0, -k / 2.0)
        else:
            c = 1.5
            b = complex((1.0 - lam) / 2.0, -k / 2.0)
            c_minus_a = complex((2.0 + lam) / 2.0, -k / 2.0)
        log_c = (
            log_gamma_c(complex(c))
            + log_gamma_c(complex(0.0, -k))
            - log_gamma_c(b)
            - log_gamma_c(c_minus_a)
        )
        return cexp(log_c)

    def amplitude(self, parity: str) -> float:
        """Asymptotic amplitude of the unnormalized wave: 2 |C|."""
        return 2.0 * abs(self.connection_coefficient(parity))

    def values(self, parity: str, y: np.ndarray) -> np.ndarray:
        """Real standing wave on an arbitrary y array.

        Near the origin (sinh^2 y <= 0.35) the direct real series in
        t = -sinh^2 y is used. Everywhere else the 1/(1-t) connection
        expresses the wave as 2 Re[C e^{-ik ln cosh y} 2F1(...; sech^2 y)],
        the running-wave split: its series denominators carry |n + 1 + ik|,
        which keeps the terms bounded for large k where the direct and
        Pfaff series lose precision to cancellation.
        """
        lam, k = self.lam, self.k
        y = np.asarray(y, dtype=float)
        ay = np.abs(y)
        sgn = np.sign(y)
        out = np.empty_like(ay)
        sinh2 = np.sinh(np.minimum(ay, 350.0)) ** 2
        near = sinh2 <= self.NEAR_SINH2
        outer = ~near

        a_e = complex(-lam / 2.0, k / 2.0)

        if np.any(near):
            t = -sinh2[near]
            yv = ay[near]
            if k > self.NUMEROV_K:
                out[near] = self._near_numerov(parity)(yv)
            elif parity == "even":
                s = self._series_real(-lam / 2.0, 0.5, t)
                out[near] = np.cosh(yv) ** (-lam) * s
            else:
                s = self._series_real((1.0 - lam) / 2.0, 1.5, t)
                out[near] = np.cosh(yv) ** (-lam) * np.sinh(yv) * s

        if np.any(outer):
            yv = ay[outer]
            log_cosh = yv + np.log1p(np.exp(-2.0 * yv)) - math.log(2.0)
            zeta = np.exp(-2.0 * log_cosh)  # sech^2 y, <= 0.74 here
            coef = self.connection_coefficient(parity)
            phase = np.exp(-1j * k * log_cosh)
            if parity == "even":
                # F(a, c-b; a-b+1; zeta) with c = 1/2
                f = self._series_complex(
                    a_e, complex((1.0 + lam) / 2.0, k / 2.0), complex(1.0, k),
                    zeta.astype(complex),
                )
                out[outer] = 2.0 * np.real(coef * phase * f)
            else:
                ap = a_e + 0.5
                # c = 3/2: c - b' = (2 + lam + ik)/2
                f = self._series_complex(
                    ap, complex((2.0 + lam) / 2.0, k / 2.0), complex(1.0, k),
                    zeta.astype(complex),
                )
                # prefactor: cosh^-lam sinh (1-t)^-a' = tanh * e^{-ik ln cosh}
                out[outer] = np.tanh(yv) * 2.0 * np.real(coef * phase * f)

        if parity == "odd":
            out = out * np.where(sgn == 0.0, 0.0, sgn)
        return out


def closed_form_spectrum(
    lam: float,
    alpha: float,
    v0: float,
    k_spec: KQuadratureSpec | None = None,
) -> SpectralDecomposition:
    """Exact sech^2-well spectrum with a Gauss-Legendre continuum rule.

    lam = 0 is the free case: no bound states, plane-wave continuum.
    Negative lam is rejected; alpha must be positive.
    """
    if lam < 0.0 or not math.isfinite(lam):
        raise SpectralError(f"well strength lam={lam} must be >= 0")
    if alpha <= 0.0 or not math.isfinite(alpha):
        raise SpectralError(f"length scale alpha={alpha} must be > 0")
    k_spec = k_spec or KQuadratureSpec()

    bound: list[BoundState] = []
    ns = _bound_quantum_numbers(lam)
    if ns:
        grid = _norm_grid(alpha, mu_min=lam - max(ns))
        for n in ns:
            mu = lam - n
            energy = v0 - mu * mu / (2.0 * alpha * alpha)
            raw = _bound_state_values(lam, n, alpha, grid)
            nrm = math.sqrt(float(np.trapezoid(raw * raw, grid)))
            if nrm == 0.0:
                raise SpectralError(f"bound state n={n} evaluated to zero")
            scale = 1.0 / nrm

            def make_eval(nn: int, sc: float) -> Callable[[np.ndarray], np.ndarray]:
                return lambda x: sc * _bound_state_values(lam, nn, alpha, np.asarray(x, dtype=float))

            bound.append(BoundState(n=n, energy=energy, mu=mu, eval=make_eval(n, scale)))

    ks, ws = k_spec.rule(alpha)
    families = [_ScatterFamily(lam, float(k)) for k in ks]
    norms = np.array(
        [
            [1.0 / (fam.amplitude("even") * math.sqrt(alpha * math.pi)) for fam in families],
            [1.0 / (fam.amplitude("odd") * math.sqrt(alpha * math.pi)) for fam in families],
        ]
    )
    energies = v0 + ks * ks / (2.0 * alpha * alpha)

    def eval_matrix(x: np.ndarray) -> np.ndarray:
        xv = np.asarray(x, dtype=float)
        y = xv / alpha
        rows = np.empty((2 * len(families), xv.size))
        for j, fam in enumerate(families):
            rows[2 * j] = norms[0, j] * fam.values("even", y)
            rows[2 * j + 1] = norms[1, j] * fam.values("odd", y)
        return rows

    cont = ContinuumBlock(
        energies=np.repeat(energies, 2),
        weights=np.repeat(ws, 2),
        eval_matrix=eval_matrix,
        labels=tuple(
            f"k={k:.12g}:{par}" for k in ks for par in ("even", "odd")
        ),
    )
    return SpectralDecomposition(
        bound=bound, continuum=cont, source=SpectrumSource.CLOSED_FORM,
        lam=lam, alpha=alpha, v0=v0,
    )


# ---------------------------------------------------------------------------
# Numerical (finite-difference) path
# ---------------------------------------------------------------------------

def numerical_spectrum(
    profile: PotentialProfile,
    n_grid: int | None = None,
    domain: tuple[float, float] | None = None,
    check_resolution: bool = False,
    resolution_rtol: float = 1e-3,
) -> SpectralDecomposition:
    """All eigenpairs of the three-point discretized H with Dirichlet walls.

    Levels below the potential at the walls are tagged bound, the rest
    form the box-discretized continuum with unit weights (the grid
    eigenbasis is already orthonormal under the trapezoid inner product,
    so no quadrature weights are needed).

    ``check_resolution`` re-solves on a doubled grid and raises when any
    bound level drifts by more than ``resolution_rtol`` relative.
    """
    x, w = _profile_on(profile, n_grid, domain)
    decomp = _fd_decomposition(x, w)
    if check_resolution:
        x2, w2 = _profile_on(profile, 2 * x.size - 1, (float(x[0]), float(x[-1])))
        coarse_e = decomp.bound_energies
        fine_e = _fd_eigenvalues(x2, w2, bound_only=True)
        m = min(coarse_e.size, fine_e.size)
        if m:
            drift = np.max(
                np.abs(coarse_e[:m] - fine_e[:m]) / np.maximum(np.abs(fine_e[:m]), 1e-12)
            )
            if drift > resolution_rtol or coarse_e.size != fine_e.size:
                raise SpectralError(
                    f"grid resolution insufficient: bound-level drift {drift:.3e} "
                    f"(tolerance {resolution_rtol:.1e}) between n and 2n grids"
                )
    return decomp


def fd_bound_energies(profile: PotentialProfile, richardson: bool = True) -> np.ndarray:
    """Bound levels of the discretized H, optionally Richardson-sharpened.

    The three-point stencil carries an O(h^2) eigenvalue bias that is the
    accuracy floor when this solver serves as the oracle for closed-form
    levels; solving on the grid and its doubled refinement and combining
    (4 E_fine - E_coarse)/3 cancels the h^2 term.
    """
    coarse = _fd_eigenvalues(profile.grid, profile.w, bound_only=True)
    if not richardson:
        return coarse
    x2, w2 = _profile_on(profile, 2 * profile.grid.size - 1, None)
    fine = _fd_eigenvalues(x2, w2, bound_only=True)
    m = min(coarse.size, fine.size)
    out = (4.0 * fine[:m] - coarse[:m]) / 3.0
    if fine.size > m:
        out = np.concatenate([out, fine[m:]])
    return out


def _fd_eigenvalues(x: np.ndarray, w: np.ndarray, bound_only: bool = False) -> np.ndarray:
    h = float(x[1] - x[0])
    diag = 1.0 / h**2 + w[1:-1]
    off = np.full(x.size - 3, -0.5 / h**2)
    if bound_only:
        w_wall = min(float(w[0]), float(w[-1]))
        vals = eigh_tridiagonal(
            diag, off, eigvals_only=True, select="v",
            select_range=(-np.inf, w_wall - 1e-12 * max(1.0, abs(w_wall))),
        )
        return vals
    return eigh_tridiagonal(diag, off, eigvals_only=True)


def _profile_on(
    profile: PotentialProfile,
    n_grid: int | None,
    domain: tuple[float, float] | None,
) -> tuple[np.ndarray, np.ndarray]:
    x0 = profile.grid
    w0 = profile.w
    if n_grid is None and domain is None:
        return x0, w0
    lo, hi = domain if domain is not None else (float(x0[0]), float(x0[-1]))
    n = n_grid if n_grid is not None else x0.size
    if lo < x0[0] - 1e-12 or hi > x0[-1] + 1e-12:
        raise SpectralError("requested domain extends beyond the profile grid")
    x = np.linspace(lo, hi, n)
    w = CubicSpline(x0, w0)(x)
    return x, w


def _fd_decomposition(x: np.ndarray, w: np.ndarray) -> SpectralDecomposition:
    n = x.size
    if n < 31:
        raise SpectralError("numerical spectrum needs at least 31 grid nodes")
    h = float(x[1] - x[0])
    xi = x[1:-1]
    diag = 1.0 / h**2 + w[1:-1]
    off = np.full(n - 3, -0.5 / h**2)
    energies, vecs = eigh_tridiagonal(diag, off)
    # Unit Euclidean eigenvectors -> unit L2 on the grid.
    vecs = vecs / math.sqrt(h)

    w_wall = min(float(w[0]), float(w[-1]))
    n_bound = int(np.searchsorted(energies, w_wall - 1e-12 * max(1.0, abs(w_wall))))

    splines = [CubicSpline(xi, vecs[:, j], bc_type="natural") for j in range(n_bound)]

    bound = []
    for j in range(n_bound):
        def make_eval(sp: CubicSpline) -> Callable[[np.ndarray], np.ndarray]:
            def ev(xq: np.ndarray) -> np.ndarray:
                xq = np.asarray(xq, dtype=float)
                vals = sp(xq)
                return np.where((xq >= xi[0]) & (xq <= xi[-1]), vals, 0.0)
            return ev
        bound.append(
            BoundState(n=j, energy=float(energies[j]), mu=math.nan, eval=make_eval(splines[j]))
        )

    cont_idx = np.arange(n_bound, energies.size)

    def eval_matrix(xq: np.ndarray) -> np.ndarray:
        xq = np.asarray(xq, dtype=float)
        if xq.size == xi.size and xq[0] == xi[0] and xq[-1] == xi[-1]:
            return vecs[:, cont_idx].T.copy()
        out = np.empty((cont_idx.size, xq.size))
        inside = (xq >= xi[0]) & (xq <= xi[-1])
        for row, j in enumerate(cont_idx):
            sp = CubicSpline(xi, vecs[:, j], bc_type="natural")
            out[row] = np.where(inside, sp(xq), 0.0)
        return out

    cont = ContinuumBlock(
        energies=energies[cont_idx],
        weights=np.ones(cont_idx.size),
        eval_matrix=eval_matrix,
        labels=tuple(f"box:{j}" for j in cont_idx),
    )
    return SpectralDecomposition(
        bound=bound,
        continuum=cont,
        source=SpectrumSource.NUMERICAL_GRID,
        grid=xi,
    )


def normalize(values: np.ndarray, grid: np.ndarray) -> np.ndarray:
    """Scale a grid-sampled state to unit L2 norm (trapezoid quadrature)."""
    values = np.asarray(values, dtype=float)
    nrm2 = float(np.trapezoid(values * values, grid))
    if nrm2 <= 0.0:
        raise SpectralError("cannot normalize a zero state")
    return values / math.sqrt(nrm2)
