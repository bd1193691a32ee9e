"""Discretization grids, the Fermi kernel matrix, and the forward map.

The forward problem is g(tau_i) = sum_j K(tau_i, omega_j) a(omega_j) d_omega_j
with the fermionic kernel K(tau, omega) = exp(-tau*omega) / (1 + exp(-beta*omega)).
Quadrature weights are folded into the kernel matrix (``weighted=True``) so the
discrete model reads g = K a with a holding spectral density values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, NumericError, ShapeError

DEFAULT_BETA = 10.0
DEFAULT_N_TAU = 64
DEFAULT_N_OMEGA = 64
DEFAULT_OMEGA_MIN = -8.0
DEFAULT_OMEGA_MAX = 8.0


@dataclass(frozen=True)
class TimeGrid:
    """Uniform imaginary-time grid on [0, beta]."""

    beta: float
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        object.__setattr__(self, "points", pts)
        if self.beta <= 0:
            raise ConfigError(f"beta must be positive, got {self.beta}")
        if pts.ndim != 1 or pts.size < 2:
            raise ConfigError("time grid needs at least 2 points")
        if np.any(np.diff(pts) <= 0):
            raise ConfigError("time grid points must be strictly increasing")
        if pts[0] != 0.0 or pts[-1] != self.beta:
            raise ConfigError("time grid must span [0, beta] exactly")

    @property
    def count(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class FrequencyGrid:
    """Uniform real-frequency grid with flat rectangle quadrature weights."""

    points: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        wts = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", wts)
        if pts.ndim != 1 or pts.size < 2:
            raise ConfigError("frequency grid needs at least 2 points")
        if np.any(np.diff(pts) <= 0):
            raise ConfigError("frequency grid points must be strictly increasing")
        if wts.shape != pts.shape or np.any(wts <= 0):
            raise ConfigError("quadrature weights must be positive, one per point")

    @property
    def count(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class KernelMatrix:
    """Discretized Fermi kernel, N_tau rows by N_omega columns."""

    entries: np.ndarray
    time_grid: TimeGrid
    freq_grid: FrequencyGrid
    weighted: bool = True

    def __post_init__(self):
        object.__setattr__(self, "entries", np.asarray(self.entries, dtype=float))
        nt, nw = self.entries.shape
        if nt != self.time_grid.count or nw != self.freq_grid.count:
            raise ShapeError(
                f"kernel is {self.entries.shape}, grids are "
                f"({self.time_grid.count}, {self.freq_grid.count})"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


def fermi_kernel(tau, omega, beta: float):
    """Evaluate exp(-tau*omega)/(1 + exp(-beta*omega)), overflow-safe.

    For omega >= 0 the expression is used directly; for omega < 0 the
    algebraically equal form exp((beta-tau)*omega)/(1 + exp(beta*omega))
    keeps every exponent nonpositive.
    """
    tau = np.asarray(tau, dtype=float)
    omega = np.asarray(omega, dtype=float)
    if beta <= 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if np.any(tau < 0) or np.any(tau > beta):
        raise DomainError("tau must lie in [0, beta]")
    tau_b, omega_b = np.broadcast_arrays(tau, omega)
    pos = omega_b >= 0
    out = np.empty(omega_b.shape)
    wp = omega_b[pos]
    out[pos] = np.exp(-tau_b[pos] * wp) / (1.0 + np.exp(-beta * wp))
    wn = omega_b[~pos]
    out[~pos] = np.exp((beta - tau_b[~pos]) * wn) / (1.0 + np.exp(beta * wn))
    return out if out.ndim else float(out)


def build_grids(
    beta: float = DEFAULT_BETA,
    n_tau: int = DEFAULT_N_TAU,
    omega_min: float = DEFAULT_OMEGA_MIN,
    omega_max: float = DEFAULT_OMEGA_MAX,
    n_omega: int = DEFAULT_N_OMEGA,
) -> tuple[TimeGrid, FrequencyGrid]:
    """Uniform grids on [0, beta] and [omega_min, omega_max]."""
    if beta <= 0:
        raise ConfigError(f"beta must be positive, got {beta}")
    if omega_min >= omega_max:
        raise ConfigError(f"need omega_min < omega_max, got [{omega_min}, {omega_max}]")
    if n_tau < 2 or n_omega < 2:
        raise ConfigError("grid counts must be at least 2")
    tau = np.linspace(0.0, beta, n_tau)
    omega = np.linspace(omega_min, omega_max, n_omega)
    d_omega = (omega_max - omega_min) / (n_omega - 1)
    weights = np.full(n_omega, d_omega)
    return TimeGrid(beta, tau), FrequencyGrid(omega, weights)


def build_kernel_matrix(
    time_grid: TimeGrid, freq_grid: FrequencyGrid, weighted: bool = True
) -> KernelMatrix:
    """Dense kernel with entries K(tau_i, omega_j), optionally times d_omega_j."""
    entries = fermi_kernel(
        time_grid.points[:, None], freq_grid.points[None, :], time_grid.beta
    )
    if weighted:
        entries = entries * freq_grid.weights[None, :]
    return KernelMatrix(entries, time_grid, freq_grid, weighted)


def forward_map(kernel: KernelMatrix, spectrum: np.ndarray) -> np.ndarray:
    """g = K a for a weighted kernel matrix."""
    if not kernel.weighted:
        raise DomainError("forward_map requires a quadrature-weighted kernel")
    spectrum = np.asarray(spectrum, dtype=float)
    if spectrum.shape[-1] != kernel.freq_grid.count:
        raise ShapeError(
            f"spectrum length {spectrum.shape[-1]} != N_omega {kernel.freq_grid.count}"
        )
    return spectrum @ kernel.entries.T


def spectral_norm(kernel, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest singular value by power iteration on K^T K."""
    entries = kernel.entries if isinstance(kernel, KernelMatrix) else np.asarray(kernel)
    if entries.size == 0:
        raise DomainError("empty matrix")
    gram = entries.T @ entries
    rng = np.random.Generator(np.random.Philox(0))
    v = rng.standard_normal(gram.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = gram @ v
        lam_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
            return float(np.sqrt(max(lam_new, 0.0)))
        lam = lam_new
    raise NumericError(f"power iteration did not converge in {max_iter} iterations")


def default_kernel() -> KernelMatrix:
    """The 64x64 benchmark kernel (beta=10, omega in [-8, 8]), weighted."""
    tg, fg = build_grids()
    return build_kernel_matrix(tg, fg, weighted=True)


__all__ = [
    "TimeGrid",
    "FrequencyGrid",
    "KernelMatrix",
    "fermi_kernel",
    "build_grids",
    "build_kernel_matrix",
    "forward_map",
    "spectral_norm",
    "default_kernel",
]
