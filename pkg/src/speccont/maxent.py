"""Maximum-entropy solver with pluggable default models.

Minimizes chi2/2 + alpha*S over strictly positive, unit-normalized spectra,
where chi2 = ||g - K a||^2 / sigma^2 (diagonal covariance) and
S = sum_i d_omega_i a_i log(a_i / d_i) is the relative entropy against the
default model d. Positivity comes for free from the log parametrization
a = d * exp(u); the normalization sum_i a_i d_omega_i = 1 is enforced by
rescaling after every step.

The "neural default model" pipeline turns a (possibly signed, sparse)
network output into a valid default model by clamping, Gaussian smoothing on
the frequency grid, flooring, and renormalizing, then runs the usual solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, NumericError, ShapeError
from .kernel import FrequencyGrid, KernelMatrix
from .unrolled_net import predict


@dataclass(frozen=True)
class MaxEntProblem:
    g: np.ndarray
    kernel: KernelMatrix
    sigma: float
    alpha: float
    default_model: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.g, dtype=float)
        d = np.asarray(self.default_model, dtype=float)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "default_model", d)
        if self.sigma <= 0:
            raise ConfigError("sigma must be positive")
        if self.alpha <= 0:
            raise ConfigError("alpha must be positive")
        nt, nw = self.kernel.shape
        if g.shape != (nt,):
            raise ShapeError(f"g has shape {g.shape}, kernel expects ({nt},)")
        if d.shape != (nw,):
            raise ShapeError(f"default model has shape {d.shape}, expected ({nw},)")
        if np.any(d <= 0):
            raise DomainError("default model must be strictly positive")
        mass = d @ self.kernel.freq_grid.weights
        if abs(mass - 1.0) > 1e-8:
            raise DomainError(f"default model mass is {mass}, must be 1 within 1e-8")


@dataclass
class MaxEntResult:
    spectrum: np.ndarray
    chi2: float
    entropy: float
    objective_trace: np.ndarray
    converged: bool
    alpha_used: float
    default_model: np.ndarray | None = None


def chi2(a, kernel: KernelMatrix, g, sigma: float) -> float:
    """||g - K a||^2 / sigma^2 for diagonal covariance sigma^2 I."""
    if sigma <= 0:
        raise ConfigError("sigma must be positive")
    K = kernel.entries
    a = np.asarray(a, dtype=float)
    g = np.asarray(g, dtype=float)
    if a.shape != (K.shape[1],) or g.shape != (K.shape[0],):
        raise ShapeError(f"shapes a{a.shape}, g{g.shape} vs kernel {K.shape}")
    r = g - K @ a
    return float(np.dot(r, r) / sigma**2)


def kl_entropy(a, d, freq_grid: FrequencyGrid) -> float:
    """sum_i d_omega_i a_i log(a_i/d_i); a_i = 0 contributes 0."""
    a = np.asarray(a, dtype=float)
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise DomainError("default model must be strictly positive")
    if np.any(a < 0):
        raise DomainError("spectrum must be nonnegative")
    terms = np.zeros_like(a)
    pos = a > 0
    terms[pos] = a[pos] * np.log(a[pos] / d[pos])
    return float(terms @ freq_grid.weights)


def _objective(a, problem: MaxEntProblem) -> float:
    return 0.5 * chi2(a, problem.kernel, problem.g, problem.sigma) + \
        problem.alpha * kl_entropy(a, problem.default_model, problem.kernel.freq_grid)


def maxent_solve(problem: MaxEntProblem, tol: float = 1e-8,
                 max_iter: int = 500, u0: np.ndarray | None = None) -> MaxEntResult:
    """Damped Newton in u (a = d e^u), renormalizing after every step.

    Convergence is declared when the gradient in u, projected onto the
    tangent space of the normalization constraint, has norm below tol.
    Non-convergence returns the best iterate with ``converged=False``.
    """
    K = problem.kernel.entries
    w = problem.kernel.freq_grid.weights
    d = problem.default_model
    sig2 = problem.sigma**2
    alpha = problem.alpha
    KtK = K.T @ K

    def normalize(u):
        # shift-invariant: subtract max(u) first so exp cannot overflow
        shift = u - u.max()
        mass = (d * np.exp(shift)) @ w
        if not np.isfinite(mass) or mass <= 0:
            raise NumericError("spectrum mass became invalid")
        return shift - np.log(mass)

    u = np.zeros_like(d) if u0 is None else np.asarray(u0, dtype=float).copy()
    u = normalize(u)
    trace = []
    converged = False
    nw = d.size
    Ktg = K.T @ problem.g
    for _ in range(max_iter):
        a = d * np.exp(u)
        obj = _objective(a, problem)
        trace.append(obj)
        grad_a = (KtK @ a - Ktg) / sig2 + alpha * w * (np.log(a / d) + 1.0)
        grad_u = a * grad_a
        # the direction that only rescales total mass is unconstrained slack;
        # stationarity is judged on the tangential (projected) gradient
        n_vec = a * w
        n_hat = n_vec / np.linalg.norm(n_vec)
        proj = grad_u - (grad_u @ n_hat) * n_hat
        if np.linalg.norm(proj) < tol * (1.0 + np.linalg.norm(grad_u)):
            converged = True
            break
        H = (a[:, None] * KtK * a[None, :]) / sig2
        H[np.diag_indices_from(H)] += alpha * w * a + a * grad_a
        # KKT step: Newton direction constrained to the tangent space of the
        # normalization, with Levenberg damping for indefiniteness
        mu = 1e-12 * max(1.0, float(np.trace(H)) / nw)
        p = None
        for _damp in range(60):
            kkt = np.zeros((nw + 1, nw + 1))
            kkt[:nw, :nw] = H + mu * np.eye(nw)
            kkt[:nw, nw] = n_vec
            kkt[nw, :nw] = n_vec
            rhs = np.concatenate([-grad_u, [0.0]])
            try:
                sol = np.linalg.solve(kkt, rhs)
                p = sol[:nw]
            except np.linalg.LinAlgError:
                p = None
            if p is not None and np.all(np.isfinite(p)) and p @ proj < 0:
                break
            mu = max(mu * 10.0, 1e-8)
        else:
            p = -proj
        # backtracking line search on the normalized objective
        t = 1.0
        accepted = False
        for _ls in range(60):
            u_new = normalize(u + t * p)
            a_new = d * np.exp(u_new)
            if np.all(np.isfinite(a_new)) and np.all(a_new > 0) \
                    and _objective(a_new, problem) < obj:
                u = u_new
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
    a = d * np.exp(u)
    if not np.all(np.isfinite(a)):
        raise NumericError("maxent iterate became non-finite")
    return MaxEntResult(
        spectrum=a,
        chi2=chi2(a, problem.kernel, problem.g, problem.sigma),
        entropy=kl_entropy(a, d, problem.kernel.freq_grid),
        objective_trace=np.asarray(trace),
        converged=converged,
        alpha_used=alpha,
        default_model=d,
    )


DEFAULT_ALPHA_GRID = tuple(float(a) for a in np.logspace(6, -3, 19))


def select_alpha(g, kernel: KernelMatrix, sigma: float, default_model,
                 alphas=DEFAULT_ALPHA_GRID, tol: float = 1e-6,
                 max_iter: int = 150):
    """Discrepancy-principle sweep over a descending alpha grid.

    Solves are warm-started along the grid. Returns (alpha, MaxEntResult) for
    the largest alpha whose chi2 <= N_tau; if none qualifies, the alpha whose
    chi2 is closest to N_tau. The default stopping settings are looser than
    maxent_solve's own: the sweep only needs chi2 to discrepancy accuracy,
    and tight tolerances triple its cost for no change in the selected alpha.
    """
    alphas = sorted(alphas, reverse=True)
    if not alphas:
        raise ConfigError("alpha grid is empty")
    n_tau = kernel.shape[0]
    u0 = None
    best = None
    results = []
    for alpha in alphas:
        problem = MaxEntProblem(g, kernel, sigma, alpha, default_model)
        res = maxent_solve(problem, tol=tol, max_iter=max_iter, u0=u0)
        u0 = np.log(res.spectrum / default_model)
        results.append((alpha, res))
        if res.chi2 <= n_tau:
            return alpha, res
    if not results:
        raise NumericError("all maxent solves failed")
    alpha, res = min(results, key=lambda ar: abs(ar[1].chi2 - n_tau))
    return alpha, res


def flat_default(freq_grid: FrequencyGrid) -> np.ndarray:
    """Constant default model with unit mass."""
    d = np.ones(freq_grid.count)
    return d / (d @ freq_grid.weights)


def neural_default(raw, freq_grid: FrequencyGrid, smoothing_width: float | None = None,
                   floor: float = 1e-4) -> np.ndarray:
    """Turn a network output into a strictly positive normalized default model.

    Clamp negatives, smooth with a grid Gaussian (row-normalized so a constant
    stays constant), lift by floor*max, renormalize to unit mass.
    """
    raw = np.clip(np.asarray(raw, dtype=float), 0.0, None)
    if np.all(raw == 0):
        raise DomainError("network output is identically zero; no usable default model")
    omega = freq_grid.points
    if smoothing_width is None:
        smoothing_width = 2.0 * float(freq_grid.weights[0])
    if smoothing_width <= 0 or floor <= 0:
        raise ConfigError("smoothing width and floor must be positive")
    diff = omega[:, None] - omega[None, :]
    W = np.exp(-0.5 * (diff / smoothing_width) ** 2)
    W /= W.sum(axis=1, keepdims=True)
    smooth = W @ raw
    smooth = smooth + floor * smooth.max()
    return smooth / (smooth @ freq_grid.weights)


def rlista_plus(g, kernel: KernelMatrix, network_params, sigma: float,
                smoothing_width: float | None = None, floor: float = 1e-4,
                alphas=DEFAULT_ALPHA_GRID, tol: float = 1e-6,
                max_iter: int = 150) -> MaxEntResult:
    """Maximum entropy with the network's output as the default model."""
    raw = predict(network_params, np.asarray(g, dtype=float))
    d = neural_default(raw, kernel.freq_grid, smoothing_width, floor)
    alpha, res = select_alpha(g, kernel, sigma, d, alphas=alphas, tol=tol,
                              max_iter=max_iter)
    res.default_model = d
    return res


__all__ = [
    "MaxEntProblem", "MaxEntResult",
    "chi2", "kl_entropy", "maxent_solve", "select_alpha",
    "flat_default", "neural_default", "rlista_plus",
    "DEFAULT_ALPHA_GRID",
]
