"""Evaluation metrics and weight-matrix exports.

RSE is the plain Euclidean distance between recovered and true spectra (no
quadrature weighting). Average coherence measures how spread a matrix's
columns are inside the unit ball: zero for orthogonal columns, one for
repeated columns.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError
from .kernel import KernelMatrix, spectral_norm
from .unrolled_net import LISTA, RLISTA, UnrolledNetParams


@dataclass
class BenchmarkRow:
    method: str
    parameter_count: int
    mean_rse: float
    median_rse: float
    runtime_per_sample: float
    stratum: str = "all"
    note: str = ""


def rse(a_hat, a_star) -> float:
    """Root square error sqrt(sum_i (a*_i - a^_i)^2)."""
    a_hat = np.asarray(a_hat, dtype=float)
    a_star = np.asarray(a_star, dtype=float)
    if a_hat.shape != a_star.shape:
        raise ShapeError(f"shapes differ: {a_hat.shape} vs {a_star.shape}")
    return float(np.sqrt(np.sum((a_star - a_hat) ** 2)))


def rse_batch(A_hat, A_star) -> np.ndarray:
    A_hat = np.asarray(A_hat, dtype=float)
    A_star = np.asarray(A_star, dtype=float)
    if A_hat.shape != A_star.shape:
        raise ShapeError(f"shapes differ: {A_hat.shape} vs {A_star.shape}")
    return np.sqrt(np.sum((A_star - A_hat) ** 2, axis=-1))


def average_coherence(matrix) -> float:
    """max_i |sum_{j != i} <a_i/|a_i|, a_j/|a_j|>| / (n - 1) over columns.

    The inner products are signed, so the value can in principle leave
    [0, 1]; a warning is emitted when it does.
    """
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[1] < 2:
        raise DomainError("need a matrix with at least two columns")
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise DomainError("matrix has a zero column")
    U = A / norms
    G = U.T @ U
    row_sums = G.sum(axis=1) - np.diag(G)
    value = float(np.max(np.abs(row_sums)) / (A.shape[1] - 1))
    if not (0.0 <= value <= 1.0):
        warnings.warn(f"average coherence {value} outside [0, 1]", stacklevel=2)
    return value


def normalize_weight_export(W_t, W_e, variant: str):
    """Frobenius-normalized first-layer matrices for side-by-side plotting.

    The identity is subtracted from W_t before normalization. For the
    fixed-weight reference variant ("ista") both matrices are sign-flipped;
    for learned variants only W_e is. Each exported matrix has unit Frobenius
    norm. Returns (export_t, export_e, metadata).
    """
    W_t = np.asarray(W_t, dtype=float)
    W_e = np.asarray(W_e, dtype=float)
    if W_t.ndim != 2 or W_t.shape[0] != W_t.shape[1]:
        raise ShapeError("W_t must be square")
    base_t = W_t - np.eye(W_t.shape[0])
    sign_t = -1.0 if variant == "ista" else 1.0
    sign_e = -1.0  # learned W_e and everything related to the fixed variant
    export_t = sign_t * base_t / np.linalg.norm(base_t)
    export_e = sign_e * W_e / np.linalg.norm(W_e)
    metadata = {
        "variant": variant,
        "identity_subtracted": True,
        "sign_t": sign_t,
        "sign_e": sign_e,
        "normalization": "frobenius",
    }
    return export_t, export_e, metadata


def ista_reference_matrices(kernel: KernelMatrix) -> tuple[np.ndarray, np.ndarray]:
    """The fixed-weight matrices W_t = I - tau K^T K, W_e = tau K^T."""
    K = kernel.entries
    tau = 1.0 / spectral_norm(kernel) ** 2
    return np.eye(K.shape[1]) - tau * (K.T @ K), tau * K.T


def coherence_profile(params: UnrolledNetParams,
                      kernel: KernelMatrix | None = None) -> list[dict]:
    """Per-layer average coherence of W_t and W_e, with fixed-weight references.

    Coherence is computed on W_t - I and on the transpose of W_e, so the
    fixed-weight references reduce to the kernel's own Gram matrix and the
    kernel itself (frequency profiles as columns); both land near 0.5 on the
    default Fermi kernel. The identity in W_t and the row/column orientation
    of W_e would otherwise dominate the statistic and hide the kernel
    structure. The reference values repeat on every row.
    """
    if params.variant not in (LISTA, RLISTA):
        raise DomainError(f"unsupported variant {params.variant!r}")
    eye = np.eye(params.W_t.shape[-1])
    ref_t = ref_e = None
    if kernel is not None:
        Wt0, We0 = ista_reference_matrices(kernel)
        ref_t = average_coherence(Wt0 - eye)
        ref_e = average_coherence(We0.T)
    rows = []
    for n in range(params.depth):
        rows.append({
            "layer": n + 1,
            "nu_W_t": average_coherence(params.W_t[n] - eye),
            "nu_W_e": average_coherence(params.W_e[n].T),
            "nu_W_t_ista": ref_t,
            "nu_W_e_ista": ref_e,
        })
    return rows


__all__ = [
    "BenchmarkRow",
    "rse",
    "rse_batch",
    "average_coherence",
    "normalize_weight_export",
    "ista_reference_matrices",
    "coherence_profile",
]
