"""Quadratic normal volatility model: parameters, validation, classification.

The instantaneous volatility is the quadratic sigma(S) = a S^2 + b S + c.
The discriminant Delta = b^2 - 4ac splits the parameter space into three
state-space geometries:

    Delta > 0   hyperbolic   two real roots S_l < S_u, pricing on (S_l, S_u)
    Delta = 0   euclidean    a double root (flat geometry)
    Delta < 0   spherical    no real roots

Inside the root interval the volatility is stored in the factored
orientation sigma(S) = |a| (S_u - S)(S - S_l), which is strictly positive
there. The polynomial and the factored form differ only by sign on that
interval, and the diffusion law depends on sigma^2 alone, so the factored
convention is a normalization, not a change of model.
"""

from __future__ import annotations

import configparser
import enum
import math
from dataclasses import dataclass
from pathlib import Path

__all__ = [
    "ModelError",
    "Regime",
    "QnvModel",
    "GeometryClass",
    "classify",
    "roots",
]

# Relative tolerance for deciding Delta == 0; floating-point discriminants
# of genuinely degenerate quadratics are rarely exactly zero.
DEGENERACY_RTOL = 1e-12


class ModelError(ValueError):
    """Invalid model parameters or an operation outside its regime."""


class Regime(enum.Enum):
    HYPERBOLIC = "hyperbolic"
    EUCLIDEAN = "euclidean"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class QnvModel:
    """Volatility coefficients (a, b, c) and the risk-free rate r."""

    a: float
    b: float
    c: float
    r: float = 0.0

    def __post_init__(self) -> None:
        for name in ("a", "b", "c", "r"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ModelError(f"model parameter {name}={v} is not finite")
        if self.a == 0.0 and self.b == 0.0 and self.c == 0.0:
            raise ModelError("degenerate model: a = b = c = 0")

    def sigma_poly(self, s: float) -> float:
        """The raw polynomial a S^2 + b S + c."""
        return (self.a * s + self.b) * s + self.c

    @classmethod
    def from_config(cls, path: str | Path) -> "QnvModel":
        """Read a, b, c, r from a flat key-value (INI style) config file.

        A bare ``key = value`` file is accepted; a ``[model]`` or ``[DEFAULT]``
        section header is optional.
        """
        parser = configparser.ConfigParser()
        text = Path(path).read_text()
        if not text.lstrip().startswith("["):
            text = "[model]\n" + text
        parser.read_string(text)
        section = "model" if parser.has_section("model") else parser.sections()[0] if parser.sections() else "DEFAULT"
        values = dict(parser["DEFAULT"])
        if parser.has_section(section):
            values.update(parser[section])
        kwargs = {}
        for key in ("a", "b", "c", "r"):
            if key in values:
                kwargs[key] = float(values[key])
        missing = {"a", "b", "c"} - set(kwargs)
        if missing:
            raise ModelError(f"config {path} missing keys: {sorted(missing)}")
        return cls(**kwargs)


@dataclass(frozen=True)
class GeometryClass:
    """Regime tag, discriminant, and the real roots when they exist."""

    regime: Regime
    discriminant: float
    s_lower: float | None = None
    s_upper: float | None = None

    def describe(self) -> str:
        if self.regime is Regime.HYPERBOLIC:
            return (
                f"Hyperbolic, Delta={self.discriminant:.12g}, "
                f"roots [{self.s_lower:.12g}, {self.s_upper:.12g}]"
            )
        if self.regime is Regime.EUCLIDEAN:
            if self.s_lower is None:
                return f"Euclidean, Delta={self.discriminant:.12g} (constant volatility)"
            return f"Euclidean, Delta={self.discriminant:.12g}, root {self.s_lower:.12g}"
        return f"Spherical, Delta={self.discriminant:.12g}"


def classify(model: QnvModel) -> GeometryClass:
    """Classify the state-space geometry by the sign of b^2 - 4ac.

    The quadratic taxonomy presumes a != 0. Degenerate families are folded
    in by their curvature (sigma'' = 2a): a = 0 is flat geometry, so both
    the linear (one root) and constant (no root) cases report euclidean.
    """
    a, b, c = model.a, model.b, model.c
    delta = b * b - 4.0 * a * c
    if a == 0.0:
        root = -c / b if b != 0.0 else None
        return GeometryClass(Regime.EUCLIDEAN, delta, root, root)
    scale = max(b * b, abs(4.0 * a * c))
    if abs(delta) <= DEGENERACY_RTOL * scale:
        root = -b / (2.0 * a)
        return GeometryClass(Regime.EUCLIDEAN, 0.0, root, root)
    if delta < 0.0:
        return GeometryClass(Regime.SPHERICAL, delta)
    s_l, s_u = _stable_roots(a, b, c, delta)
    return GeometryClass(Regime.HYPERBOLIC, delta, s_l, s_u)


def _stable_roots(a: float, b: float, c: float, delta: float) -> tuple[float, float]:
    """Roots of a S^2 + b S + c via the cancellation-free quadratic formula."""
    sq = math.sqrt(delta)
    if b >= 0.0:
        q = -0.5 * (b + sq)
    else:
        q = -0.5 * (b - sq)
    r1 = q / a
    r2 = c / q if q != 0.0 else -b / a - r1
    return (r1, r2) if r1 < r2 else (r2, r1)


def roots(model: QnvModel) -> tuple[float, float]:
    """The ordered real roots (S_l, S_u); hyperbolic models only."""
    geo = classify(model)
    if geo.regime is not Regime.HYPERBOLIC:
        raise ModelError(
            f"roots: model is {geo.regime.value} (Delta={geo.discriminant:.6g}), "
            "two distinct real roots require the hyperbolic regime"
        )
    assert geo.s_lower is not None and geo.s_upper is not None
    return geo.s_lower, geo.s_upper


def sigma_factored(model: QnvModel, s: float) -> float:
    """sigma(S) = |a| (S_u - S)(S - S_l): positive inside the root interval."""
    s_l, s_u = roots(model)
    return abs(model.a) * (s_u - s) * (s - s_l)
