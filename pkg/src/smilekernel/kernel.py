"""Propagator assembly and application for e^{-H tau}.

The kernel is materialized as a dense matrix on a working grid:

    K(x, x') = sum_n phi_n(x) phi_n(x') e^{-E_n tau}
             + sum_j w_j phi_kj(x) phi_kj(x') e^{-E_kj tau}

with the bound sum over discrete levels and the weighted sum the
quadrature discretization of the continuum integral. States whose
relative damping e^{-(E - E_min) tau} is below ``STATE_CUTOFF_EXP``
in the exponent contribute nothing at double precision and are skipped;
at tau = 0 every state is kept, which is what the delta-property checks
exercise.

Application is plain trapezoid quadrature against the grid; composing
two kernels through ``apply`` realizes the Chapman-Kolmogorov check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .spectral import SpectralDecomposition

__all__ = ["KernelError", "PricingKernel", "assemble", "apply_kernel"]

log = logging.getLogger("smilekernel")

STATE_CUTOFF_EXP = 45.0
# e^{-E0 tau} beyond this is a conditioning red flag for deep wells.
GROWTH_WARN_EXP = 200.0
BOUNDARY_MASS_WARN = 1e-6


class KernelError(ValueError):
    """Invalid kernel construction or application."""


@dataclass
class PricingKernel:
    """Dense propagator matrix K(x, x') on a fixed working grid."""

    decomposition: SpectralDecomposition
    tau: float
    grid: np.ndarray
    matrix: np.ndarray
    n_states: int

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def trapezoid_weights(self) -> np.ndarray:
        """Quadrature weights matching the decomposition's geometry.

        Closed-form grids end at genuine domain edges (trapezoid halves
        the end weights); numerical-path grids are the interior of a
        Dirichlet box whose wall values are implicit zeros, so the
        trapezoid rule there is uniform h on the interior nodes. The
        uniform rule is also what makes the box eigenbasis exactly
        orthonormal, hence the semigroup identity exact on that path.
        """
        from .spectral import SpectrumSource

        w = np.full(self.grid.size, self.spacing)
        if self.decomposition.source is not SpectrumSource.NUMERICAL_GRID:
            w[0] *= 0.5
            w[-1] *= 0.5
        return w

    def to_csv(self, stride: int = 1) -> str:
        """Matrix dump (optionally strided) with a leading x-coordinate row."""
        idx = np.arange(0, self.grid.size, stride)
        lines = ["x," + ",".join(f"{self.grid[j]:.17g}" for j in idx)]
        for i in idx:
            row = ",".join(f"{self.matrix[i, j]:.17g}" for j in idx)
            lines.append(f"{self.grid[i]:.17g},{row}")
        return "\n".join(lines) + "\n"


def assemble(
    decomposition: SpectralDecomposition,
    tau: float,
    grid: np.ndarray | None = None,
) -> PricingKernel:
    """Materialize e^{-H tau} on the grid from the spectral data.

    ``grid`` defaults to the decomposition's native grid (numerical
    path); the closed-form path needs an explicit grid.
    """
    if tau < 0.0 or not math.isfinite(tau):
        raise KernelError(f"tau={tau} must be >= 0")
    if grid is None:
        if decomposition.grid is None:
            raise KernelError("closed-form decompositions need an explicit grid")
        grid = decomposition.grid
    grid = np.asarray(grid, dtype=float)

    phi_b, phi_c = decomposition.matrices(grid)
    energies = np.concatenate(
        [decomposition.bound_energies, decomposition.continuum.energies]
    )
    weights = np.concatenate(
        [np.ones(len(decomposition.bound)), decomposition.continuum.weights]
    )
    if energies.size == 0:
        raise KernelError("decomposition has no states")

    e_min = float(np.min(energies))
    if -e_min * tau > GROWTH_WARN_EXP:
        log.warning(
            "kernel growth factor e^{-E0 tau} = e^{%.1f} risks overflow "
            "(deep bound state, long maturity)", -e_min * tau,
        )
    if tau > 0.0:
        keep = (energies - e_min) * tau <= STATE_CUTOFF_EXP
    else:
        keep = np.ones(energies.size, dtype=bool)

    states = np.vstack([phi_b, phi_c])[keep]
    damp = weights[keep] * np.exp(-energies[keep] * tau)
    matrix = (states.T * damp) @ states
    return PricingKernel(
        decomposition=decomposition,
        tau=tau,
        grid=grid,
        matrix=matrix,
        n_states=int(keep.sum()),
    )


def apply_kernel(kernel: PricingKernel, state: np.ndarray) -> np.ndarray:
    """(K psi)(x) by trapezoid quadrature on the kernel grid.

    Logs a tail-truncation warning when the state carries non-negligible
    boundary mass relative to its total; bounded transformed payoffs on
    an adequate grid stay below the threshold.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != kernel.grid.shape:
        raise KernelError(
            f"state shape {state.shape} does not match grid {kernel.grid.shape}"
        )
    w = kernel.trapezoid_weights()
    total = float(np.sum(w * np.abs(state)))
    if total > 0.0:
        edge = float((w[0] * abs(state[0]) + w[-1] * abs(state[-1])) / total)
        if edge > BOUNDARY_MASS_WARN:
            log.warning(
                "state carries boundary mass fraction %.2e (> %.0e): "
                "grid may truncate its tails", edge, BOUNDARY_MASS_WARN,
            )
    return kernel.matrix @ (w * state)
