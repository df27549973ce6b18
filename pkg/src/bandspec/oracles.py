"""Ground truth to validate inclusion sets against.

* Floquet-Bloch spectra of periodic bi-infinite operators.
* Dense sigma_min for finite matrices.
* Connected-component counts and Hausdorff convergence reports.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .inclusion import Grid, InclusionResult, spectrum_superset
from .operator_model import BI, FINITE, BandOperator, shift_spectral

DENSE_ORACLE_MAX_N = 512


@dataclass(frozen=True)
class SpectrumCurve:
    samples: np.ndarray
    t_count: int
    q: int
    max_step: float = math.nan

    def __len__(self):
        return self.samples.size


def floquet_block_size(A: BandOperator) -> int:
    p = A.period
    return p * max(1, -(-max(A.w, 1) // p))


def floquet_symbol(A: BandOperator, t) -> np.ndarray:
    """Symbol ``a(t) = B_{-1} e^{-it} + B_0 + B_{+1} e^{it}`` for each ``t``."""
    q = floquet_block_size(A)
    rows = range(1, q + 1)
    B0 = A.block(rows, range(1, q + 1))
    Bp = A.block(rows, range(q + 1, 2 * q + 1))
    Bm = A.block(rows, range(1 - q, 1))
    z = np.exp(1j * np.asarray(t, dtype=float))[..., None, None]
    return Bm / z + B0 + Bp * z


def floquet_spectrum(A: BandOperator, t_count: int = 1024) -> SpectrumCurve:
    """Sample the spectrum of a periodic bi-infinite operator.

    The eigenvalues of the symbol over the uniform quasimomenta
    ``t_j = 2 pi j / t_count`` are exact points of the spectrum.
    """
    if A.domain.kind != BI:
        raise ValueError("floquet_spectrum needs a bi-infinite operator")
    if not A.is_periodic:
        raise ValueError("floquet_spectrum needs purely periodic diagonals (strip overrides first)")
    if t_count < 1:
        raise ValueError("t_count must be >= 1")
    t = 2 * np.pi * np.arange(t_count) / t_count
    ev = kernels.eigenvalues(floquet_symbol(A, t))
    step = 0.0
    if t_count > 1:
        nxt = np.roll(ev, -1, axis=0)
        step = float(max(kernels.hausdorff_distance(a, b) for a, b in zip(ev, nxt)))
    return SpectrumCurve(ev.ravel(), t_count, floquet_block_size(A), step)


def floquet_lower_norm(A: BandOperator, lams, t_count: int = 2048) -> np.ndarray:
    """``mu(A - lam I)`` of a periodic bi-infinite operator for each ``lam``.

    The operator is unitarily equivalent to multiplication by its symbol, so
    the lower norm is ``min_t sigma_min(a(t) - lam)``.  The minimum is taken
    over ``t_count`` uniform samples, which overestimates it by O(1/t_count^2).
    """
    if A.domain.kind != BI or not A.is_periodic:
        raise ValueError("floquet_lower_norm needs a purely periodic bi-infinite operator")
    t = 2 * np.pi * np.arange(t_count) / t_count
    sym = floquet_symbol(A, t)
    eye = np.eye(sym.shape[-1])
    lams = np.asarray(lams, dtype=complex).ravel()
    out = np.empty(lams.size)
    for j, lam in enumerate(lams):
        out[j] = kernels.smallest_singular_values(sym - lam * eye).min()
    return out


def dense_finite_oracle(A: BandOperator, lam: complex) -> float:
    """sigma_min of the full matrix ``A - lam I``, i.e. ``1/||(A - lam I)^{-1}||``."""
    if A.domain.kind != FINITE:
        raise ValueError("dense oracle needs a finite matrix")
    if A.domain.N > DENSE_ORACLE_MAX_N:
        raise ValueError(f"dense oracle limited to N <= {DENSE_ORACLE_MAX_N}")
    return kernels.smallest_singular_value(shift_spectral(A, lam).dense())


def dense_finite_oracle_field(A: BandOperator, lams) -> np.ndarray:
    """Vectorized :func:`dense_finite_oracle` over many ``lam``."""
    if A.domain.kind != FINITE or A.domain.N > DENSE_ORACLE_MAX_N:
        raise ValueError(f"dense oracle needs a finite matrix with N <= {DENSE_ORACLE_MAX_N}")
    M = A.dense()
    lams = np.asarray(lams, dtype=complex).ravel()
    out = np.empty(lams.size)
    step = max(1, (1 << 25) // (16 * M.size))
    eye = np.eye(M.shape[0])
    for lo in range(0, lams.size, step):
        lam = lams[lo:lo + step, None, None]
        out[lo:lo + step] = kernels.smallest_singular_values(M[None] - lam * eye)
    return out


def component_count(result: InclusionResult) -> int:
    """Number of 4-connected components of superset cells."""
    g = result.grid
    mask = result.superset_mask.reshape(g.ny, g.nx)
    if not mask.any():
        raise ValueError("empty superset has no components")
    _, count = ndimage.label(mask)  # default structure is 4-connectivity
    return int(count)


@dataclass
class ReportRow:
    n: int
    eps_n: float
    hausdorff: float | None
    superset_cells: int
    runtime: float | None


@dataclass
class ConvergenceReport:
    rows: list[ReportRow] = field(default_factory=list)

    def distances(self) -> list[float | None]:
        return [r.hausdorff for r in self.rows]


def report_row(result: InclusionResult, oracle: SpectrumCurve | np.ndarray, runtime=None) -> ReportRow:
    samples = oracle.samples if isinstance(oracle, SpectrumCurve) else np.asarray(oracle)
    pts = result.superset_points()
    dist = kernels.hausdorff_distance(pts, samples) if pts.size else None
    return ReportRow(result.field.n, result.eps_n, dist, int(pts.size), runtime)


def convergence_report(
    A: BandOperator,
    n_list,
    s: int | None,
    grid: Grid,
    oracle: SpectrumCurve | np.ndarray,
    superset=spectrum_superset,
    threads: int = 1,
) -> ConvergenceReport:
    n_list = list(n_list)
    if not n_list:
        raise ValueError("n_list is empty")
    if n_list != sorted(n_list):
        raise ValueError("n_list must be ascending")
    samples = oracle.samples if isinstance(oracle, SpectrumCurve) else np.asarray(oracle)
    if samples.size == 0:
        raise ValueError("oracle has no samples")
    report = ConvergenceReport()
    for n in n_list:
        t0 = time.perf_counter()
        res = superset(A, n, s, grid, threads=threads)
        report.rows.append(report_row(res, samples, time.perf_counter() - t0))
    return report
