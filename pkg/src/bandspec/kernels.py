"""Small dense numerical primitives."""

from __future__ import annotations

import numpy as np
from scipy.linalg import lapack


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or 0 in M.shape:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {M.shape}")
    if not np.isfinite(M).all():
        raise ValueError("matrix has non-finite entries")
    return M


def smallest_singular_value(M) -> float:
    """sigma_min of an m x n matrix with m >= n, i.e. min ||Mx|| over unit x."""
    M = _as_matrix(M)
    m, n = M.shape
    if m < n:
        raise ValueError(f"need rows >= cols, got {m}x{n}")
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def largest_singular_value(M) -> float:
    M = _as_matrix(M)
    return float(np.linalg.svd(M, compute_uv=False)[0])


def smallest_singular_values(stack) -> np.ndarray:
    """Batched sigma_min over the leading axis of a (B, m, n) stack, m >= n."""
    stack = np.asarray(stack, dtype=complex)
    if stack.shape[-2] < stack.shape[-1]:
        raise ValueError("need rows >= cols")
    return np.linalg.svd(stack, compute_uv=False)[..., -1]


def eigenvalues(M) -> np.ndarray:
    """All eigenvalues of a square matrix, or of each matrix in a stack."""
    M = np.asarray(M, dtype=complex)
    if M.ndim < 2 or M.shape[-1] != M.shape[-2]:
        raise ValueError(f"eigenvalues need square input, got shape {M.shape}")
    return np.linalg.eigvals(M)


def smallest_hermitian_band_eigenvalue(ab: np.ndarray) -> float:
    """Smallest eigenvalue of a Hermitian band matrix in LAPACK upper band
    storage (``ab[b + i - j, j] = H[i, j]``)."""
    w, _, m, _, info = lapack.zhbevx(
        np.array(ab, dtype=complex, order="F"), 0.0, 0.0, 1, 1,
        compute_v=0, range=2, lower=0, mmax=1,
    )
    if info != 0 or m != 1:
        raise np.linalg.LinAlgError(f"zhbevx failed (info={info})")
    return float(w[0])


def hausdorff_distance(P, Q, chunk: int = 512) -> float:
    """Hausdorff distance between two finite sets of complex points."""
    P = np.asarray(P, dtype=complex).ravel()
    Q = np.asarray(Q, dtype=complex).ravel()
    if P.size == 0 or Q.size == 0:
        raise ValueError("Hausdorff distance needs two nonempty point sets")
    return max(_directed(P, Q, chunk), _directed(Q, P, chunk))


def _directed(P: np.ndarray, Q: np.ndarray, chunk: int) -> float:
    worst = 0.0
    for lo in range(0, P.size, chunk):
        d = np.abs(P[lo:lo + chunk, None] - Q[None, :]).min(axis=1)
        worst = max(worst, float(d.max()))
    return worst
