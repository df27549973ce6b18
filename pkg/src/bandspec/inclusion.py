"""Inclusion sets for pseudospectra, spectra and essential spectra on grids.

For every sample ``lam`` the window quantity ``mu_n(A - lam I)`` is compared
with ``eps`` (subset test) and with ``eps + eps_n`` (superset test).
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .operator_model import (
    BI,
    FINITE,
    SEMI,
    BandOperator,
    IndexDomain,
    PerturbedPeriodic,
    default_block_size,
)
from .windows import EpsParams, WindowFamily, epsilon_n


class Label(enum.IntEnum):
    OUTSIDE = 0
    SUPERSET_ONLY = 1
    SUBSET = 2


@dataclass(frozen=True)
class Grid:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("degenerate grid rectangle")
        if self.nx < 1 or self.ny < 1:
            raise ValueError("grid needs nx, ny >= 1")

    @property
    def dx(self) -> float:
        return (self.re_max - self.re_min) / self.nx

    @property
    def dy(self) -> float:
        return (self.im_max - self.im_min) / self.ny

    @property
    def h(self) -> float:
        return max(self.dx, self.dy)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @cached_property
    def re(self) -> np.ndarray:
        return self.re_min + (np.arange(self.nx) + 0.5) * self.dx

    @cached_property
    def im(self) -> np.ndarray:
        return self.im_min + (np.arange(self.ny) + 0.5) * self.dy

    @cached_property
    def points(self) -> np.ndarray:
        """Cell centres, row-major: row ``j`` has imaginary part ``im[j]``."""
        return (self.re[None, :] + 1j * self.im[:, None]).ravel()


def make_grid(rect, nx: int, ny: int) -> Grid:
    re_min, re_max, im_min, im_max = rect
    return Grid(float(re_min), float(re_max), float(im_min), float(im_max), int(nx), int(ny))


@dataclass(frozen=True)
class MuField:
    grid: Grid
    values: np.ndarray
    n: int
    s: int


@dataclass(frozen=True)
class InclusionResult:
    field: MuField
    eps: float
    eps_n: float
    labels: np.ndarray
    closed: bool
    meta: dict = field(default_factory=dict)

    @property
    def grid(self) -> Grid:
        return self.field.grid

    @property
    def superset_mask(self) -> np.ndarray:
        return self.labels >= Label.SUPERSET_ONLY

    @property
    def subset_mask(self) -> np.ndarray:
        return self.labels == Label.SUBSET

    def counts(self) -> dict[str, int]:
        return {lab.name: int((self.labels == lab).sum()) for lab in Label}

    def superset_points(self) -> np.ndarray:
        return self.grid.points[self.superset_mask]

    def threshold_gap(self) -> float:
        """Smallest distance of any mu value to either threshold."""
        v = self.field.values
        return float(min(np.abs(v - self.eps).min(), np.abs(v - self.eps - self.eps_n).min()))


def mu_n_field(
    A: BandOperator, n: int, s: int | None, grid: Grid, threads: int = 1
) -> MuField:
    if s is None:
        s = default_block_size(A)
    family = WindowFamily(A, n, s)
    pts = grid.points
    if threads <= 1 or pts.size < 2 * threads:
        values = family.mu(pts)
    else:
        chunks = np.array_split(np.arange(pts.size), threads)
        values = np.empty(pts.size)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for idx, vals in zip(chunks, pool.map(lambda ix: family.mu(pts[ix]), chunks)):
                values[idx] = vals
    if not np.isfinite(values).all():
        raise FloatingPointError("non-finite window norm")
    return MuField(grid, values, n, s)


def classify_pseudospectrum(
    field: MuField, eps: float, eps_params: EpsParams | float, closed: bool = False
) -> InclusionResult:
    eps_n = eps_params.eps_n if isinstance(eps_params, EpsParams) else float(eps_params)
    if eps < 0 or (eps == 0 and not closed):
        raise ValueError("open pseudospectra need eps > 0 (the open set for eps = 0 is empty)")
    v = field.values
    if closed:
        sub, sup = v <= eps, v <= eps + eps_n
    else:
        sub, sup = v < eps, v < eps + eps_n
    labels = np.where(sub, Label.SUBSET, np.where(sup, Label.SUPERSET_ONLY, Label.OUTSIDE))
    return InclusionResult(field, float(eps), float(eps_n), labels.astype(np.int8), closed)


def pseudospectrum_sets(
    A: BandOperator, n: int, s: int | None, grid: Grid, eps: float,
    closed: bool = False, threads: int = 1,
) -> InclusionResult:
    f = mu_n_field(A, n, s, grid, threads)
    return classify_pseudospectrum(f, eps, epsilon_n(A, n, f.s), closed)


def spectrum_superset(
    A: BandOperator, n: int, s: int | None, grid: Grid, threads: int = 1
) -> InclusionResult:
    f = mu_n_field(A, n, s, grid, threads)
    return classify_pseudospectrum(f, 0.0, epsilon_n(A, n, f.s), closed=True)


# ---------------------------------------------------------------------------
# Essential spectrum
# ---------------------------------------------------------------------------


def _semi(diags: dict) -> BandOperator:
    """Semi-infinite operator, dropping perturbations that fall off the domain."""
    kept = {}
    for d, v in diags.items():
        if isinstance(v, PerturbedPeriodic):
            v = v.dropping(lambda i, d=d: i >= 1 and i + d >= 1)
        kept[d] = v
    return BandOperator(IndexDomain.semi(), kept)


def split_biinfinite(A: BandOperator) -> tuple[BandOperator, BandOperator]:
    """``(A_minus, A_plus)``: the blocks on indices <= -1 (reflected onto
    1, 2, ...) and >= 1; index 0 is discarded."""
    if A.domain.kind != BI:
        raise ValueError("split_biinfinite needs a bi-infinite operator")
    plus = _semi(dict(A.diagonals))
    minus = _semi({-d: v.reflected() for d, v in A.diagonals.items()})
    return minus, plus


def tail_operator(A: BandOperator, m: int) -> BandOperator:
    """Rows and columns beyond ``m``, re-indexed from 1."""
    if A.domain.kind != SEMI:
        raise ValueError("tail_operator needs a semi-infinite operator")
    if m < 0:
        raise ValueError("m must be nonnegative")
    return _semi({d: v.shifted(m) for d, v in A.diagonals.items()})


def stabilization_index(A: BandOperator, n: int, s: int) -> int:
    idx = A.override_rows() + A.override_columns()
    return max(idx, default=0) + n * s + A.w + 1


def essential_superset(
    A: BandOperator, n: int, s: int | None, grid: Grid, threads: int = 1
) -> InclusionResult:
    """Superset of the essential spectrum from the windows far out in the tail.

    Beyond the stabilization index every window is a background window, so
    the union over ``k >= m`` no longer depends on ``m`` and equals the
    spectrum superset of the periodic tail extended to both sides.
    """
    if A.domain.kind == FINITE:
        raise ValueError("finite matrices have empty essential spectrum")
    if A.period is None:
        raise ValueError("essential_superset needs periodic or perturbed-periodic diagonals")
    if s is None:
        s = default_block_size(A)
    if A.domain.kind == BI:
        minus, plus = split_biinfinite(A)
        r_minus = essential_superset(minus, n, s, grid, threads)
        r_plus = essential_superset(plus, n, s, grid, threads)
        values = np.minimum(r_minus.field.values, r_plus.field.values)
        labels = np.maximum(r_minus.labels, r_plus.labels)
        return InclusionResult(
            MuField(grid, values, n, s), 0.0,
            max(r_minus.eps_n, r_plus.eps_n), labels, True,
            {"parts": [r_minus.meta, r_plus.meta]},
        )
    m = stabilization_index(A, n, s)
    tail = tail_operator(A, m)
    assert tail.is_periodic, "tail still carries perturbations"
    extension = BandOperator(IndexDomain.bi(), dict(tail.background().diagonals))
    res = spectrum_superset(extension, n, s, grid, threads)
    res.meta.update(stabilization_index=m)
    return res


def periodic_background(A: BandOperator) -> BandOperator:
    """Bi-infinite periodic operator carrying the background of ``A``."""
    if A.period is None:
        raise ValueError("explicit diagonals have no periodic background")
    return BandOperator(IndexDomain.bi(), dict(A.background().diagonals))
