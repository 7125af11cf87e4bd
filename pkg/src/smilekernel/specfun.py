"""Special functions: log-gamma, Pochhammer, Gauss 2F1, associated Legendre.

Self-contained double-precision implementations with no runtime dependency
on external special-function libraries. Test suites validate them against
arbitrary-precision oracles (mpmath) and against the defining ODEs.

Conventions
-----------
- ``legendre_p`` evaluates the Ferrers function (real branch on the cut
  -1 < z < 1) with the Condon-Shortley phase, so P_1^1(0) = -1.
- ``hyp2f1`` uses the direct power series where it converges well and the
  1-z linear transformation near z = 1; arguments z < 0 go through the
  same connection after mapping the Legendre-style calls, and through the
  z/(z-1) Pfaff transform for the generic real case.
- Private helpers with a ``_c`` suffix accept complex arguments; they are
  internal machinery for scattering-state evaluation and are not part of
  the public surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "SpecialFunctionError",
    "Hyp2F1Params",
    "LegendreParams",
    "log_gamma",
    "pochhammer",
    "hyp2f1",
    "hyp2f1_regularized",
    "legendre_p",
]

_MAX_TERMS = 100_000
_TAIL_RTOL = 1e-15
# Lanczos approximation, g = 7, 9 coefficients. Good for ~15 significant
# digits over the right half-plane; the reflection formula covers the rest.
_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class SpecialFunctionError(ValueError):
    """Raised for pole hits, invalid parameter ranges, or non-convergence."""


@dataclass(frozen=True)
class Hyp2F1Params:
    """Parameter bundle for the Gauss hypergeometric function 2F1(a,b;c;z)."""

    a: float
    b: float
    c: float
    z: float

    def __post_init__(self) -> None:
        if _is_nonpositive_integer(self.c):
            raise SpecialFunctionError(
                f"hyp2f1: c={self.c} is a non-positive integer (series pole)"
            )


@dataclass(frozen=True)
class LegendreParams:
    """Degree nu, order mu and on-cut argument z for the Ferrers function."""

    nu: float
    mu: float
    z: float

    def __post_init__(self) -> None:
        if not -1.0 < self.z < 1.0:
            raise SpecialFunctionError(
                f"legendre_p: argument z={self.z} must lie strictly inside (-1, 1)"
            )


def _is_nonpositive_integer(x: float, tol: float = 1e-12) -> bool:
    return x <= 0.5 and abs(x - round(x)) < tol


def log_gamma(x: float) -> float:
    """Natural log of |Gamma(x)| for real x away from the poles.

    For x > 0 this is ln Gamma(x). Negative non-integer arguments go
    through the reflection formula and return the log of the absolute
    value (the sign is never needed by callers here).
    """
    if x != x or math.isinf(x):
        raise SpecialFunctionError(f"log_gamma: invalid argument {x}")
    if _is_nonpositive_integer(x):
        raise SpecialFunctionError(f"log_gamma: pole at non-positive integer x={x}")
    if x < 0.5:
        # Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return (
            math.log(math.pi)
            - math.log(abs(math.sin(math.pi * x)))
            - log_gamma(1.0 - x)
        )
    xm1 = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (xm1 + i)
    t = xm1 + _LANCZOS_G + 0.5
    return _LN_SQRT_2PI + (xm1 + 0.5) * math.log(t) - t + math.log(acc)


def gamma_signed(x: float) -> tuple[float, float]:
    """Return (ln|Gamma(x)|, sign of Gamma(x)) for real non-pole x."""
    if _is_nonpositive_integer(x):
        raise SpecialFunctionError(f"gamma: pole at non-positive integer x={x}")
    if x > 0.0:
        return log_gamma(x), 1.0
    # Sign from the reflection formula: Gamma(x) has the sign of sin(pi x)
    # for x < 0 (Gamma(1-x) > 0 there).
    sign = 1.0 if math.sin(math.pi * x) > 0 else -1.0
    return log_gamma(x), sign


def pochhammer(q: float, n: int) -> float:
    """Rising factorial (q)_n = q (q+1) ... (q+n-1), with (q)_0 = 1."""
    if n < 0:
        raise SpecialFunctionError(f"pochhammer: n={n} must be >= 0")
    acc = 1.0
    for k in range(n):
        acc *= q + k
    return acc


def _hyp2f1_series(a: float, b: float, c: float, z: float) -> float:
    """Direct power series; caller guarantees convergence (|z| < 1)."""
    term = 1.0
    acc = 1.0
    for n in range(_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        acc += term
        if abs(term) <= _TAIL_RTOL * max(1.0, abs(acc)):
            # One extra term guards against accidental zero crossings.
            nxt = term * (a + n + 1) * (b + n + 1) / ((c + n + 1) * (n + 2.0)) * z
            if abs(nxt) <= _TAIL_RTOL * max(1.0, abs(acc)):
                return acc
    raise SpecialFunctionError(
        f"hyp2f1: series did not converge for a={a}, b={b}, c={c}, z={z}"
    )


def _hyp2f1_one_minus_z(a: float, b: float, c: float, z: float) -> float:
    """Linear 15.8.4-style connection in terms of argument 1-z.

    Requires c-a-b away from the integers (the logarithmic degenerate
    case is rejected with a diagnostic; no caller in this package needs
    it).
    """
    cab = c - a - b
    if abs(cab - round(cab)) < 1e-8:
        raise SpecialFunctionError(
            "hyp2f1: c-a-b within 1e-8 of an integer; the 1-z connection "
            f"formula degenerates (a={a}, b={b}, c={c})"
        )
    w = 1.0 - z
    t1_log, t1_sign = _gamma_ratio_signed([c, cab], [c - a, c - b])
    t2_log, t2_sign = _gamma_ratio_signed([c, -cab], [a, b])
    term1 = t1_sign * math.exp(t1_log) * _hyp2f1_series(a, b, a + b - c + 1.0, w)
    term2 = (
        t2_sign
        * math.exp(t2_log + cab * math.log(w))
        * _hyp2f1_series(c - a, c - b, cab + 1.0, w)
    )
    return term1 + term2


def _gamma_ratio_signed(num: list[float], den: list[float]) -> tuple[float, float]:
    """log and sign of prod Gamma(num) / prod Gamma(den)."""
    log_acc = 0.0
    sign = 1.0
    for x in num:
        lg, s = gamma_signed(x)
        log_acc += lg
        sign *= s
    for x in den:
        lg, s = gamma_signed(x)
        log_acc -= lg
        sign *= s
    return log_acc, sign


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real arguments.

    Supported argument range is z < 1 (on the principal branch). The
    direct series handles |z| <= 0.7; z in (0.7, 1) uses the 1-z
    connection; z < -0.7 uses the Pfaff transform z -> z/(z-1), which
    maps into (0, 1) where the series converges quickly.
    """
    if _is_nonpositive_integer(c):
        raise SpecialFunctionError(f"hyp2f1: c={c} is a non-positive integer pole")
    if z >= 1.0:
        raise SpecialFunctionError(f"hyp2f1: argument z={z} outside supported range z < 1")
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        # Terminating polynomial case: sum it directly regardless of z.
        n_stop = int(round(-min(
            a if _is_nonpositive_integer(a) else 0.0,
            b if _is_nonpositive_integer(b) else 0.0,
        )))
        term, acc = 1.0, 1.0
        for n in range(n_stop):
            term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
            acc += term
        return acc
    if abs(z) <= 0.7:
        return _hyp2f1_series(a, b, c, z)
    if z > 0.7:
        return _hyp2f1_one_minus_z(a, b, c, z)
    # z < -0.7: Pfaff keeps everything real and well-conditioned.
    w = z / (z - 1.0)
    return (1.0 - z) ** (-a) * _hyp2f1_series(a, c - b, c, w)


def hyp2f1_regularized(a: float, b: float, c: float, z: float) -> float:
    """Regularized hypergeometric 2F1(a,b;c;z) / Gamma(c).

    Entire in c, so it is the right building block for Ferrers functions
    with integer order where 1/Gamma(1-mu) vanishes. Only needs |z| < 1
    with reasonable margin, which the Legendre wrapper guarantees.
    """
    if abs(z) >= 1.0:
        raise SpecialFunctionError(f"hyp2f1_regularized: |z|={abs(z)} must be < 1")
    if not _is_nonpositive_integer(c):
        lg, sign = gamma_signed(c)
        return sign * math.exp(-lg) * _hyp2f1_series(a, b, c, z)
    # c = -m: the first m+1 series terms vanish; restart at n = m+1 where
    # Gamma(c+n) = Gamma(1) = 1.
    m = int(round(-c))
    n0 = m + 1
    log_term = 0.0
    sign = 1.0
    for k in range(n0):
        for f in (a + k, b + k, z):
            if f == 0.0:
                return 0.0
            log_term += math.log(abs(f))
            sign *= 1.0 if f > 0 else -1.0
        log_term -= math.log(k + 1.0)
    term = sign * math.exp(log_term)
    acc = term
    n = n0
    while n < _MAX_TERMS:
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        acc += term
        if abs(term) <= _TAIL_RTOL * max(abs(acc), 1e-300):
            return acc
        n += 1
    raise SpecialFunctionError("hyp2f1_regularized: series did not converge")


def legendre_p(nu: float, mu: float, z: float) -> float:
    """Ferrers function of the first kind P_nu^mu(z) on the cut.

    Hypergeometric representation
        P_nu^mu(z) = ((1+z)/(1-z))^(mu/2) * 2F~1(nu+1, -nu; 1-mu; (1-z)/2)
    where 2F~1 is the regularized series. For z < -0.35 the series
    argument (1-z)/2 approaches 1, so:

    - integer mu (and integer nu >= mu, the classical polynomial case):
      parity reflection P_nu^mu(-z) = (-1)^(nu-mu) P_nu^mu(z). For
      non-integer degree the Ferrers function has no definite parity
      (the reflection formula brings in Q_nu^mu), so this shortcut is
      restricted to the classical case;
    - non-integer mu: the two-term 1-z connection;
    - remaining corner (integer mu, non-integer nu): rejected, both
      routes degenerate.
    """
    if not -1.0 < z < 1.0:
        raise SpecialFunctionError(f"legendre_p: z={z} outside the cut (-1, 1)")
    if z < -0.35:
        nu_int = abs(nu - round(nu)) < 1e-10
        mu_int = abs(mu - round(mu)) < 1e-10
        if nu_int and mu_int and round(nu) >= round(mu) >= -round(nu):
            parity = 1.0 if int(round(nu - mu)) % 2 == 0 else -1.0
            return parity * legendre_p(nu, mu, -z)
        if mu_int:
            raise SpecialFunctionError(
                f"legendre_p: z={z} < -0.35 with integer order mu={mu} and "
                f"non-integer degree nu={nu}: the connection formula hits a "
                "gamma pole and no parity rule applies; evaluate at |z|"
            )
        return _legendre_p_connection(nu, mu, z)
    arg = 0.5 * (1.0 - z)
    pref = 0.5 * mu * (math.log1p(z) - math.log1p(-z))
    return math.exp(pref) * hyp2f1_regularized(nu + 1.0, -nu, 1.0 - mu, arg)


def _legendre_p_connection(nu: float, mu: float, z: float) -> float:
    """P_nu^mu near z = -1 through the 1-z linear transformation.

    With a = nu+1, b = -nu, c = 1-mu the connection exponent is
    c-a-b = -mu, so integer mu lands on the logarithmic degenerate case
    and is rejected (callers with integer nu-mu never reach this path).
    """
    if abs(mu - round(mu)) < 1e-8:
        raise SpecialFunctionError(
            f"legendre_p: order mu={mu} within 1e-8 of an integer with "
            f"non-integer degree nu={nu}: the z<0 connection formula hits a "
            "gamma pole; evaluate at |z| or use integer nu-mu"
        )
    a, b, c = nu + 1.0, -nu, 1.0 - mu
    w = 0.5 * (1.0 + z)  # equals 1 - (1-z)/2

    # Either connection term drops out when a reciprocal gamma sits on a
    # pole (integer degree nu makes 1/Gamma(-nu) or 1/Gamma(nu+1) vanish).
    if _is_nonpositive_integer(c - a) or _is_nonpositive_integer(c - b):
        term1 = 0.0
    else:
        t1_log, t1_sign = _gamma_ratio_signed([-mu], [c - a, c - b])
        f1 = _hyp2f1_series(a, b, 1.0 + mu, w)
        term1 = t1_sign * math.exp(t1_log) * f1
    if _is_nonpositive_integer(a) or _is_nonpositive_integer(b):
        term2 = 0.0
    else:
        t2_log, t2_sign = _gamma_ratio_signed([mu], [a, b])
        f2 = _hyp2f1_series(c - a, c - b, 1.0 - mu, w)
        term2 = t2_sign * math.exp(t2_log - mu * math.log(w)) * f2
    pref = 0.5 * mu * (math.log1p(z) - math.log1p(-z))
    return math.exp(pref) * (term1 + term2)


# ---------------------------------------------------------------------------
# Complex-argument internals (scattering-state machinery)
# ---------------------------------------------------------------------------

def log_gamma_c(z: complex) -> complex:
    """log Gamma(z) for complex z, up to an integer multiple of 2*pi*i.

    The ambiguity is harmless here: every consumer exponentiates a sum of
    these values, which removes 2*pi*i offsets exactly.
    """
    if z.real < 0.5:
        # log Gamma(z) = log(pi / sin(pi z)) - log Gamma(1 - z)
        s = complex(math.pi) / _sin_c(math.pi * z)
        return _log_c(s) - log_gamma_c(1.0 - z)
    zm1 = z - 1.0
    acc: complex = complex(_LANCZOS_COEFFS[0])
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (zm1 + i)
    t = zm1 + _LANCZOS_G + 0.5
    return _LN_SQRT_2PI + (zm1 + 0.5) * _log_c(t) - t + _log_c(acc)


def _log_c(z: complex) -> complex:
    return complex(math.log(abs(z)), math.atan2(z.imag, z.real))


def _sin_c(z: complex) -> complex:
    return complex(
        math.sin(z.real) * math.cosh(z.imag),
        math.cos(z.real) * math.sinh(z.imag),
    )


def hyp2f1_series_c(a: complex, b: complex, c: complex, z: complex) -> complex:
    """Direct 2F1 power series for complex parameters, |z| < 1."""
    term: complex = 1.0 + 0.0j
    acc: complex = 1.0 + 0.0j
    for n in range(_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        acc += term
        if abs(term) <= _TAIL_RTOL * max(1.0, abs(acc)):
            return acc
    raise SpecialFunctionError(
        f"hyp2f1_series_c: no convergence for a={a}, b={b}, c={c}, z={z}"
    )
