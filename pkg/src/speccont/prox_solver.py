"""Classical convex machinery for the l1-regularized inverse problem.

Solves min_a 0.5*||g - K a||_2^2 + lambda*||a||_1 by proximal gradient
iteration (ISTA) and, independently, by cyclic coordinate descent. The two
implementations share nothing but the soft-thresholding operator and are
cross-checked in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, NumericError, ShapeError
from .kernel import KernelMatrix, spectral_norm


def _entries(kernel) -> np.ndarray:
    return kernel.entries if isinstance(kernel, KernelMatrix) else np.asarray(kernel, dtype=float)


@dataclass(frozen=True)
class IstaConfig:
    lam: float = 1e-3
    step: float | None = None      # None -> 1 / ||K||_2^2
    max_iter: int = 10_000
    tol: float = 1e-10

    def __post_init__(self):
        if self.lam <= 0:
            raise ConfigError("lambda must be positive")
        if self.step is not None and self.step <= 0:
            raise ConfigError("step must be positive")
        if self.tol <= 0:
            raise ConfigError("tol must be positive")


@dataclass
class SolveReport:
    solution: np.ndarray
    iterations: int
    converged: bool
    objective_trace: np.ndarray
    lam: float = 0.0
    step: float = 0.0


def soft_threshold(y, theta):
    """Shrink toward zero by theta; zero out entries with |y| <= theta."""
    if np.any(np.asarray(theta) < 0):
        raise DomainError("threshold must be nonnegative")
    y = np.asarray(y, dtype=float)
    out = np.sign(y) * np.maximum(np.abs(y) - theta, 0.0)
    return out if out.ndim else float(out)


def bp_objective(a, kernel, g, lam: float) -> float:
    K = _entries(kernel)
    a = np.asarray(a, dtype=float)
    g = np.asarray(g, dtype=float)
    if a.shape[-1] != K.shape[1] or g.shape[-1] != K.shape[0]:
        raise ShapeError(f"shapes a{a.shape}, g{g.shape} vs kernel {K.shape}")
    r = g - a @ K.T
    return float(0.5 * np.dot(r, r) + lam * np.sum(np.abs(a)))


def default_step(kernel) -> float:
    return 1.0 / spectral_norm(kernel) ** 2


def ista_step(a, kernel, g, config: IstaConfig, step: float | None = None):
    """One proximal gradient update S_{tau*lam}(a - tau*K^T(Ka - g))."""
    K = _entries(kernel)
    tau = step if step is not None else (config.step if config.step is not None else default_step(kernel))
    a = np.asarray(a, dtype=float)
    if a.shape[-1] != K.shape[1]:
        raise ShapeError(f"a has length {a.shape[-1]}, kernel has {K.shape[1]} columns")
    grad = (a @ K.T - g) @ K
    return soft_threshold(a - tau * grad, tau * config.lam)


def ista_solve(kernel, g, config: IstaConfig = IstaConfig()) -> SolveReport:
    """Iterate from a=0 until the iterate change drops below tol.

    Non-convergence within max_iter is reported, not raised: on the Fermi
    kernel the iteration stalling far from the truth is the expected outcome.
    """
    K = _entries(kernel)
    g = np.asarray(g, dtype=float)
    tau = config.step if config.step is not None else default_step(kernel)
    a = np.zeros(K.shape[1])
    trace = [bp_objective(a, K, g, config.lam)]
    converged = False
    it = 0
    for it in range(1, config.max_iter + 1):
        a_next = ista_step(a, K, g, config, step=tau)
        if not np.all(np.isfinite(a_next)):
            raise NumericError(f"ISTA diverged at iteration {it} (step too large?)")
        trace.append(bp_objective(a_next, K, g, config.lam))
        delta = np.linalg.norm(a_next - a)
        a = a_next
        if delta < config.tol:
            converged = True
            break
    return SolveReport(a, it, converged, np.asarray(trace), lam=config.lam, step=tau)


def ista_solve_batch(kernel, G, config: IstaConfig = IstaConfig(),
                     check_every: int = 100) -> np.ndarray:
    """ISTA over a batch of right-hand sides (rows of G); returns solutions.

    Same iteration as :func:`ista_solve` without per-iterate objectives; stops
    when every sample's iterate change is below tol, or at max_iter.
    """
    K = _entries(kernel)
    G = np.atleast_2d(np.asarray(G, dtype=float))
    tau = config.step if config.step is not None else default_step(kernel)
    A = np.zeros((G.shape[0], K.shape[1]))
    thr = tau * config.lam
    for it in range(1, config.max_iter + 1):
        A_next = soft_threshold(A - tau * ((A @ K.T - G) @ K), thr)
        if it % check_every == 0 or it == config.max_iter:
            if not np.all(np.isfinite(A_next)):
                raise NumericError(f"batch ISTA diverged at iteration {it}")
            if np.max(np.linalg.norm(A_next - A, axis=1)) < config.tol:
                return A_next
        A = A_next
    return A


def cd_oracle(kernel, g, lam: float, tol: float = 1e-12, max_iter: int = 100_000) -> np.ndarray:
    """Cyclic coordinate descent on the same objective; independent oracle.

    Each sweep minimizes exactly in one coordinate at a time:
    a_j <- S_lam(k_j^T (g - K a + k_j a_j)) / ||k_j||^2.
    """
    if lam <= 0:
        raise DomainError("lambda must be positive")
    K = _entries(kernel)
    g = np.asarray(g, dtype=float)
    n = K.shape[1]
    col_sq = np.einsum("ij,ij->j", K, K)
    if np.any(col_sq == 0):
        raise DomainError("kernel has a zero column; coordinate update undefined")
    a = np.zeros(n)
    r = g.copy()                     # residual g - K a, maintained incrementally
    for _ in range(max_iter):
        max_change = 0.0
        for j in range(n):
            kj = K[:, j]
            rho = kj @ r + col_sq[j] * a[j]
            new = soft_threshold(rho, lam) / col_sq[j]
            if new != a[j]:
                r -= (new - a[j]) * kj
                max_change = max(max_change, abs(new - a[j]))
                a[j] = new
        if max_change < tol:
            return a
    raise NumericError(f"coordinate descent did not converge in {max_iter} sweeps")


def subgradient_residual(a, kernel, g, lam: float) -> float:
    """Max violation of the stationarity condition of the l1 objective.

    Zero at an exact minimizer: |grad_j| <= lam where a_j = 0 and
    grad_j = -lam*sign(a_j) where a_j != 0.
    """
    K = _entries(kernel)
    grad = K.T @ (K @ a - g)
    zero = a == 0
    viol_zero = np.maximum(np.abs(grad[zero]) - lam, 0.0)
    viol_nonzero = np.abs(grad[~zero] + lam * np.sign(a[~zero]))
    parts = np.concatenate([viol_zero, viol_nonzero])
    return float(parts.max()) if parts.size else 0.0


__all__ = [
    "IstaConfig",
    "SolveReport",
    "soft_threshold",
    "bp_objective",
    "default_step",
    "ista_step",
    "ista_solve",
    "ista_solve_batch",
    "cd_oracle",
    "subgradient_residual",
]
