"""smilekernel: spectral option pricing for quadratic normal volatility.

The volatility smile of a quadratic local-volatility model is priced by
mapping the valuation PDE onto an imaginary-time Schrodinger problem,
decomposing the resulting Hamiltonian, and propagating transformed
payoffs with the spectral kernel. Every closed form is cross-checked by
independent numerical routes (finite differences in price space, seeded
Monte Carlo, quadrature, and a grid eigensolver).
"""

__version__ = "0.1.0"

from .model import GeometryClass, QnvModel, Regime, classify, roots

__all__ = ["QnvModel", "GeometryClass", "Regime", "classify", "roots", "__version__"]
