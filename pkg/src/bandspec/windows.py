"""Column windows of band operators and the window lower norms built on them.

A window of width ``n`` (in blocks of size ``s``) at offset ``k`` is the
column submatrix of ``A`` on columns ``k*s+1 .. (k+n)*s``.  Only rows that can
hold nonzeros are kept, so the dense window is at most ``(n*s + 2w) x n*s``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .operator_model import (
    FINITE,
    SEMI,
    BandOperator,
    adjoint,
    block_tridiagonalize,
    default_block_size,
    sup_norms,
)

# Windows with at least this many columns use the banded Gram solver, narrower ones a dense batched one.
GRAM_MIN_COLS = 13
# Gram estimates below this fraction of the largest column norm are redone by SVD.
GRAM_FALLBACK_RATIO = 1e-3


@dataclass(frozen=True)
class WindowMatrix:
    dense: np.ndarray
    n: int
    k: int
    s: int
    row_lo: int
    row_hi: int

    @property
    def col_lo(self) -> int:
        return self.k * self.s + 1

    @property
    def col_hi(self) -> int:
        return (self.k + self.n) * self.s

    @property
    def shape(self) -> tuple[int, int]:
        return self.dense.shape


@dataclass(frozen=True)
class EpsParams:
    n: int
    s: int
    alpha_norm: float
    gamma_norm: float
    eps_n: float


def _check_nks(A: BandOperator, n: int, s: int) -> None:
    if n < 1:
        raise ValueError(f"window width must be >= 1, got {n}")
    if s < 1:
        raise ValueError(f"block size must be >= 1, got {s}")
    if A.domain.kind == FINITE:
        N = A.domain.N
        if N % s:
            raise ValueError(f"block size {s} does not divide N={N}")
        if n * s > N:
            raise ValueError(f"window of {n * s} columns exceeds N={N}")


def extract_window(A: BandOperator, n: int, k: int, s: int = 1) -> WindowMatrix:
    _check_nks(A, n, s)
    dom, w = A.domain, A.w
    c0, c1 = k * s + 1, (k + n) * s
    if not (dom.contains(c0) and dom.contains(c1)):
        raise ValueError(f"window columns {c0}..{c1} leave the {dom.kind} domain")
    r0 = max(c0 - w, dom.lo)
    r1 = min(c1 + w, dom.hi)
    dense = A.block(range(r0, r1 + 1), range(c0, c1 + 1))
    return WindowMatrix(dense, n, k, s, r0, r1)


def window_offsets(A: BandOperator, n: int, s: int = 1) -> list[int]:
    """Offsets ``k`` whose windows exhaust all distinct windows of ``A``.

    Finite: every ``k`` in ``0 .. N/s - n``.  Otherwise: offsets whose windows
    are clipped by the boundary or touch a perturbed entry, followed by one
    full background period of untouched offsets.
    """
    _check_nks(A, n, s)
    if A.domain.kind == FINITE:
        return list(range(A.domain.N // s - n + 1))
    p = A.period
    if p is None:
        raise ValueError("infinite operators need periodic or perturbed-periodic diagonals")
    w, ncols = A.w, n * s
    special: set[int] = set()
    for i in A.override_rows():
        # window rows k*s+1-w .. k*s+ncols+w contain row i
        special.update(range(-((ncols + w - i) // s), (i + w - 1) // s + 1))
    if A.domain.kind == SEMI:
        special.update(range(0, -(-w // s)))
        special = {k for k in special if k >= 0}
    start = max(special) + 1 if special else 0
    per = math.lcm(s, p) // s
    return sorted(special) + list(range(start, start + per))


def windows(A: BandOperator, n: int, s: int = 1) -> list[WindowMatrix]:
    return [extract_window(A, n, k, s) for k in window_offsets(A, n, s)]


def nu_n(A: BandOperator, n: int, s: int = 1) -> float:
    return min(kernels.smallest_singular_value(W.dense) for W in windows(A, n, s))


def mu_n(A: BandOperator, n: int, s: int = 1) -> float:
    return min(nu_n(A, n, s), nu_n(adjoint(A), n, s))


def epsilon_n(A: BandOperator, n: int, s: int | None = None) -> EpsParams:
    """Error bound by which the window norm may exceed the lower norm.

    ``n`` counts blocks of size ``s``; the sub/super norms are those of the
    block-tridiagonal regrouping (plain sup norms when ``s == 1``).
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if s is None:
        s = default_block_size(A)
    if s == 1 and A.w <= 1:
        norms = sup_norms(A)
        a, g = norms.get(-1, 0.0), norms.get(1, 0.0)
    else:
        view = block_tridiagonalize(A, s)
        a, g = view.alpha_norm, view.gamma_norm
    eps = 2.0 * (a + g) * math.sin(math.pi / (2 * (n + 1)))
    return EpsParams(n, s, a, g, eps)


# ---------------------------------------------------------------------------
# Evaluating window norms of A - lam I for many lam at once
# ---------------------------------------------------------------------------


class _ShiftedWindow:
    """One window ``W0`` and the positions of its main-diagonal entries, so
    that ``W(lam) = W0 - lam * E`` can be formed for a batch of ``lam``."""

    def __init__(self, W: WindowMatrix, w: int):
        self.W0 = W.dense
        cols = np.arange(W.col_lo, W.col_hi + 1)
        rows = cols - W.row_lo
        self.er = rows
        self.ec = np.arange(cols.size)
        m, n = self.W0.shape
        E = np.zeros((m, n))
        E[self.er, self.ec] = 1.0
        self.use_band = n >= GRAM_MIN_COLS
        G0 = self.W0.conj().T @ self.W0
        C = self.W0.conj().T @ E
        D = E.T @ E
        self.gram = (G0, C, C.conj().T, D)
        if self.use_band:
            # columns q, q' share a row only if |q - q'| <= 2w
            b = self.b = min(n - 1, 2 * w)
            self.bands = [self._band(X, b) for X in self.gram]

    @staticmethod
    def _band(X: np.ndarray, b: int) -> np.ndarray:
        n = X.shape[0]
        ab = np.zeros((b + 1, n), dtype=complex)
        for t in range(b + 1):
            ab[b - t, t:] = np.diagonal(X, t)
        return ab

    def stack(self, lams: np.ndarray) -> np.ndarray:
        S = np.repeat(self.W0[None], lams.size, axis=0)
        S[:, self.er, self.ec] -= lams[:, None]
        return S

    def sigma_min(self, lams: np.ndarray) -> np.ndarray:
        """sigma_min of ``W0 - lam E`` from the Gram matrix
        ``G0 - lam C - conj(lam) C^H + |lam|^2 D``; values too small relative
        to the column scale lose accuracy when squared and are redone by SVD."""
        lams = np.asarray(lams, dtype=complex).ravel()
        if self.use_band:
            G0b, Cb, CHb, Db = self.bands
            out = np.empty(lams.size)
            scale2 = np.empty(lams.size)
            for j, lam in enumerate(lams):
                ab = G0b - lam * Cb - np.conj(lam) * CHb + (lam.real ** 2 + lam.imag ** 2) * Db
                scale2[j] = ab[self.b].real.max()
                out[j] = kernels.smallest_hermitian_band_eigenvalue(ab)
        else:
            G0, C, CH, D = self.gram
            lam = lams[:, None, None]
            G = G0 - lam * C - lam.conj() * CH + (lams.real ** 2 + lams.imag ** 2)[:, None, None] * D
            scale2 = np.diagonal(G, axis1=1, axis2=2).real.max(axis=1)
            out = np.linalg.eigvalsh(G)[:, 0]
        out = np.sqrt(np.maximum(out, 0.0))
        redo = np.flatnonzero(out < GRAM_FALLBACK_RATIO * np.sqrt(scale2))
        if redo.size:
            out[redo] = kernels.smallest_singular_values(self.stack(lams[redo]))
        return out


class WindowFamily:
    """All distinct windows of ``A`` and of its adjoint for fixed ``(n, s)``.

    ``mu(lams)`` returns ``mu_n(A - lam I)`` for every ``lam``; the window
    skeletons are built once and only the main-diagonal entries depend on
    ``lam``.
    """

    def __init__(self, A: BandOperator, n: int, s: int = 1):
        self.A, self.n, self.s = A, n, s
        At = adjoint(A)
        self.offsets = window_offsets(A, n, s)
        self.adjoint_offsets = window_offsets(At, n, s)
        self.parts = [_ShiftedWindow(extract_window(A, n, k, s), A.w) for k in self.offsets]
        self.parts += [
            _ShiftedWindow(extract_window(At, n, k, s), A.w) for k in self.adjoint_offsets
        ]

    def __len__(self):
        return len(self.parts)

    def mu(self, lams, chunk_bytes: int = 1 << 25) -> np.ndarray:
        lams = np.asarray(lams, dtype=complex).ravel()
        out = np.full(lams.size, np.inf)
        for part in self.parts:
            m, n = part.W0.shape
            step = max(1, chunk_bytes // (16 * m * n))
            for lo in range(0, lams.size, step):
                sl = slice(lo, lo + step)
                np.minimum(out[sl], part.sigma_min(lams[sl]), out=out[sl])
        return out
