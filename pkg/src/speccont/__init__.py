"""Analytic continuation toolkit.

Recovers real-frequency spectral functions from imaginary-time Green's
function data through three routes: classical proximal-gradient iteration on
the l1-regularized inverse problem, trained fixed-depth unrolled networks,
and maximum entropy with flat or network-derived default models.
"""

__version__ = "0.1.0"

from . import benchmark, kernel, maxent, metrics, prox_solver, synthdata, unrolled_net

__all__ = [
    "__version__",
    "kernel",
    "synthdata",
    "prox_solver",
    "unrolled_net",
    "maxent",
    "metrics",
    "benchmark",
]
