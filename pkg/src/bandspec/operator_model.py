"""Banded operators on finite, semi-infinite and bi-infinite index sets.

Diagonal ``d`` of a :class:`BandOperator` stores the row-indexed sequence
``v[i] = A[i, i + d]``.  Operator documents (JSON) and the helper
:func:`from_column_diagonals` use the column-indexed convention instead,
where position ``j`` of diagonal ``d`` holds ``A[j - d, j]``; that is the
convention in which sub-/main-/superdiagonal tuples are usually written
down (``alpha[j] = A[j+1, j]``, ``gamma[j] = A[j-1, j]``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from types import MappingProxyType
from typing import Mapping, Union

import numpy as np

from . import kernels

FINITE = "finite"
SEMI = "semi"
BI = "bi"


class OperatorSchemaError(ValueError):
    """Raised when an operator description does not validate."""


# ---------------------------------------------------------------------------
# Index domains
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IndexDomain:
    kind: str
    N: int | None = None

    def __post_init__(self):
        if self.kind not in (FINITE, SEMI, BI):
            raise ValueError(f"unknown domain kind {self.kind!r}")
        if self.kind == FINITE:
            if self.N is None or int(self.N) != self.N or self.N < 1:
                raise ValueError("finite domain needs an integer N >= 1")
        elif self.N is not None:
            raise ValueError(f"N is only meaningful for finite domains, got N={self.N}")

    @classmethod
    def finite(cls, N: int) -> "IndexDomain":
        return cls(FINITE, N)

    @classmethod
    def semi(cls) -> "IndexDomain":
        return cls(SEMI)

    @classmethod
    def bi(cls) -> "IndexDomain":
        return cls(BI)

    @property
    def lo(self) -> float:
        return -math.inf if self.kind == BI else 1

    @property
    def hi(self) -> float:
        return self.N if self.kind == FINITE else math.inf

    def contains(self, i: int) -> bool:
        return self.lo <= i <= self.hi


# ---------------------------------------------------------------------------
# Diagonal sequences
# ---------------------------------------------------------------------------


def _scalar(x) -> complex:
    z = complex(x)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite diagonal value {x!r}")
    return z


@dataclass(frozen=True)
class Constant:
    value: complex

    def __post_init__(self):
        object.__setattr__(self, "value", _scalar(self.value))

    period = 1
    overrides = MappingProxyType({})

    def at(self, idx):
        idx = np.asarray(idx)
        return np.full(idx.shape, self.value, dtype=complex)

    def sup_norm(self) -> float:
        return abs(self.value)

    def is_zero(self) -> bool:
        return self.value == 0

    def shifted(self, m: int) -> "Constant":
        return self

    def reflected(self) -> "Constant":
        return self

    def plus(self, c: complex) -> "Constant":
        return Constant(self.value + c)

    def background(self) -> "Constant":
        return self


@dataclass(frozen=True)
class Periodic:
    """``v[i] = values[i mod p]``."""

    values: tuple

    def __post_init__(self):
        vals = tuple(_scalar(v) for v in self.values)
        if not vals:
            raise ValueError("periodic diagonal needs at least one value")
        object.__setattr__(self, "values", vals)

    overrides = MappingProxyType({})

    @property
    def period(self) -> int:
        return len(self.values)

    def at(self, idx):
        idx = np.asarray(idx)
        return np.asarray(self.values, dtype=complex)[np.mod(idx, self.period)]

    def sup_norm(self) -> float:
        return max(abs(v) for v in self.values)

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def shifted(self, m: int) -> "Periodic":
        p = self.period
        return Periodic(tuple(self.values[(r + m) % p] for r in range(p)))

    def reflected(self) -> "Periodic":
        p = self.period
        return Periodic(tuple(self.values[(-r) % p] for r in range(p)))

    def plus(self, c: complex) -> "Periodic":
        return Periodic(tuple(v + c for v in self.values))

    def background(self) -> "Periodic":
        return self


@dataclass(frozen=True)
class PerturbedPeriodic:
    """A periodic background with finitely many entries replaced."""

    background_seq: Periodic
    overrides: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        bg = self.background_seq
        if isinstance(bg, Constant):
            bg = Periodic((bg.value,))
        if not isinstance(bg, Periodic):
            raise TypeError("background must be Periodic")
        ov = {int(k): _scalar(v) for k, v in dict(self.overrides).items()}
        object.__setattr__(self, "background_seq", bg)
        object.__setattr__(self, "overrides", MappingProxyType(dict(sorted(ov.items()))))

    def __hash__(self):
        return hash((self.background_seq, tuple(self.overrides.items())))

    def __eq__(self, other):
        return (
            isinstance(other, PerturbedPeriodic)
            and self.background_seq == other.background_seq
            and dict(self.overrides) == dict(other.overrides)
        )

    @property
    def period(self) -> int:
        return self.background_seq.period

    def at(self, idx):
        idx = np.asarray(idx)
        out = np.array(self.background_seq.at(idx), dtype=complex)
        if not self.overrides:
            return out
        hit = np.isin(idx, list(self.overrides))
        out[hit] = [self.overrides[int(i)] for i in idx[hit]]
        return out

    def sup_norm(self) -> float:
        return max([self.background_seq.sup_norm()] + [abs(v) for v in self.overrides.values()])

    def is_zero(self) -> bool:
        return self.background_seq.is_zero() and all(v == 0 for v in self.overrides.values())

    def shifted(self, m: int) -> "PerturbedPeriodic":
        return PerturbedPeriodic(
            self.background_seq.shifted(m), {i - m: v for i, v in self.overrides.items()}
        )

    def reflected(self) -> "PerturbedPeriodic":
        return PerturbedPeriodic(
            self.background_seq.reflected(), {-i: v for i, v in self.overrides.items()}
        )

    def plus(self, c: complex) -> "PerturbedPeriodic":
        return PerturbedPeriodic(
            self.background_seq.plus(c), {i: v + c for i, v in self.overrides.items()}
        )

    def background(self) -> Periodic:
        return self.background_seq

    def dropping(self, keep) -> "PerturbedPeriodic":
        return PerturbedPeriodic(
            self.background_seq, {i: v for i, v in self.overrides.items() if keep(i)}
        )


@dataclass(frozen=True)
class Explicit:
    """``v[start + r] = values[r]``; every other position holds ``fill``."""

    values: tuple
    start: int = 1
    fill: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(_scalar(v) for v in self.values))
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "fill", _scalar(self.fill))

    period = None
    overrides = MappingProxyType({})

    def at(self, idx):
        idx = np.asarray(idx)
        vals = np.asarray(self.values + (self.fill,), dtype=complex)
        r = idx - self.start
        r = np.where((r >= 0) & (r < len(self.values)), r, len(self.values))
        return vals[r]

    def sup_norm(self) -> float:
        return max([abs(v) for v in self.values] + [abs(self.fill)])

    def is_zero(self) -> bool:
        return self.fill == 0 and all(v == 0 for v in self.values)

    def shifted(self, m: int) -> "Explicit":
        return Explicit(self.values, self.start - m, self.fill)

    def reflected(self) -> "Explicit":
        return Explicit(self.values[::-1], -(self.start + len(self.values) - 1), self.fill)

    def plus(self, c: complex) -> "Explicit":
        return Explicit(tuple(v + c for v in self.values), self.start, self.fill + c)

    def background(self):
        raise ValueError("explicit diagonals have no periodic background")


Diagonal = Union[Constant, Periodic, PerturbedPeriodic, Explicit]


def column_to_row(diag: Diagonal, d: int) -> Diagonal:
    """Re-index a column-indexed diagonal ``c[j] = A[j-d, j]`` to rows."""
    return diag.shifted(d)


def row_to_column(diag: Diagonal, d: int) -> Diagonal:
    return diag.shifted(-d)


# ---------------------------------------------------------------------------
# Band operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BandOperator:
    domain: IndexDomain
    diagonals: Mapping[int, Diagonal]
    bandwidth: int | None = None

    def __post_init__(self):
        diags = {int(d): v for d, v in dict(self.diagonals).items()}
        for d, v in diags.items():
            if not isinstance(v, (Constant, Periodic, PerturbedPeriodic, Explicit)):
                raise TypeError(f"diagonal {d}: unsupported type {type(v).__name__}")
            if isinstance(v, Explicit) and self.domain.kind != FINITE:
                raise ValueError(f"diagonal {d}: explicit diagonals need a finite domain")
            for i in v.overrides:
                if not (self.domain.contains(i) and self.domain.contains(i + d)):
                    raise ValueError(f"diagonal {d}: override at row {i} lies outside the domain")
        tight = max((abs(d) for d, v in diags.items() if not v.is_zero()), default=0)
        w = tight if self.bandwidth is None else int(self.bandwidth)
        if w < 0:
            raise ValueError("bandwidth must be nonnegative")
        out = [d for d, v in diags.items() if abs(d) > w and not v.is_zero()]
        if out:
            raise ValueError(f"diagonal offsets {sorted(out)} exceed bandwidth {w}")
        if w != tight:
            raise ValueError(f"declared bandwidth {w} is not tight (outermost nonzero diagonal is {tight})")
        # identically zero diagonals outside the band carry no information
        diags = {d: v for d, v in diags.items() if abs(d) <= w}
        object.__setattr__(self, "diagonals", MappingProxyType(dict(sorted(diags.items()))))
        object.__setattr__(self, "bandwidth", w)

    @property
    def w(self) -> int:
        return self.bandwidth

    def __eq__(self, other):
        return (
            isinstance(other, BandOperator)
            and self.domain == other.domain
            and self.bandwidth == other.bandwidth
            and dict(self.diagonals) == dict(other.diagonals)
        )

    def __hash__(self):
        return hash((self.domain, self.bandwidth, tuple(self.diagonals.items())))

    def __repr__(self):
        return f"BandOperator(domain={self.domain}, w={self.w}, diagonals={dict(self.diagonals)})"

    # -- structure -----------------------------------------------------------

    @property
    def period(self) -> int | None:
        """Common period of all diagonals, ``None`` if any is explicit."""
        ps = [v.period for v in self.diagonals.values()]
        if any(p is None for p in ps):
            return None
        return reduce(math.lcm, ps, 1)

    @property
    def is_periodic(self) -> bool:
        return all(v.period is not None and not v.overrides for v in self.diagonals.values())

    def override_rows(self) -> list[int]:
        rows = set()
        for v in self.diagonals.values():
            rows.update(v.overrides)
        return sorted(rows)

    def override_columns(self) -> list[int]:
        cols = set()
        for d, v in self.diagonals.items():
            cols.update(i + d for i in v.overrides)
        return sorted(cols)

    def background(self) -> "BandOperator":
        """Same operator with every finite perturbation removed."""
        return BandOperator(
            self.domain, {d: v.background() for d, v in self.diagonals.items()}
        )

    # -- entries ---------------------------------------------------------------

    def entry(self, i: int, j: int) -> complex:
        return entry(self, i, j)

    def block(self, rows: range, cols: range) -> np.ndarray:
        """Dense submatrix for contiguous in-domain row and column ranges."""
        M = np.zeros((len(rows), len(cols)), dtype=complex)
        if not rows or not cols:
            return M
        r = np.arange(rows.start, rows.stop)
        for d, diag in self.diagonals.items():
            c = r + d
            ok = (c >= cols.start) & (c < cols.stop)
            if not ok.any():
                continue
            rr = r[ok]
            M[rr - rows.start, rr + d - cols.start] = diag.at(rr)
        return M

    def dense(self) -> np.ndarray:
        if self.domain.kind != FINITE:
            raise ValueError("only finite operators have a dense matrix")
        N = self.domain.N
        return self.block(range(1, N + 1), range(1, N + 1))


def entry(A: BandOperator, i: int, j: int) -> complex:
    for idx in (i, j):
        if not A.domain.contains(idx):
            raise IndexError(f"index {idx} outside {A.domain.kind} domain")
    d = j - i
    diag = A.diagonals.get(d)
    if abs(d) > A.w or diag is None:
        return 0j
    return complex(diag.at(i))


def adjoint(A: BandOperator) -> BandOperator:
    """Banach-space adjoint: the transpose, with no complex conjugation."""
    diags = {-d: v.shifted(-d) for d, v in A.diagonals.items()}
    return BandOperator(A.domain, diags)


def shift_spectral(A: BandOperator, lam: complex) -> BandOperator:
    """``A - lam I``."""
    lam = _scalar(lam)
    if lam == 0:
        return A
    diags = dict(A.diagonals)
    diags[0] = diags[0].plus(-lam) if 0 in diags else Constant(-lam)
    return BandOperator(A.domain, diags)


def sup_norms(A: BandOperator) -> dict[int, float]:
    """Exact sup of ``|A[i, i+d]|`` over in-domain entries, per offset."""
    out = {}
    for d, v in A.diagonals.items():
        if A.domain.kind == FINITE:
            N = A.domain.N
            rows = np.arange(max(1, 1 - d), min(N, N - d) + 1)
            out[d] = float(np.abs(v.at(rows)).max()) if rows.size else 0.0
        else:
            out[d] = v.sup_norm()
    return out


# ---------------------------------------------------------------------------
# Block-tridiagonal regrouping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockView:
    source: BandOperator
    s: int
    alpha_norm: float
    beta_norm: float
    gamma_norm: float


def default_block_size(A: BandOperator) -> int:
    return 1 if A.w <= 1 else A.w + 1


def _block_indices(A: BandOperator, s: int) -> list[int]:
    """Block indices ``K`` (block K covers scalar ``(K-1)s+1 .. Ks``) that
    realize every distinct sub/main/super block."""
    dom = A.domain
    if dom.kind == FINITE:
        return list(range(1, dom.N // s + 1))
    p = A.period
    per = math.lcm(s, p) // s
    special = set()
    for i in A.override_rows() + A.override_columns():
        K = (i - 1) // s + 1
        special.update(range(K - 1, K + 2))
    if dom.kind == SEMI:
        special.update(range(1, 3))
        special = {K for K in special if K >= 1}
    start = max(special, default=0) + 1
    return sorted(special | set(range(start, start + per + 2)))


def block_tridiagonalize(A: BandOperator, s: int | None = None) -> BlockView:
    if s is None:
        s = default_block_size(A)
    s = int(s)
    if s < max(A.w, 1):
        raise ValueError(f"block size {s} is smaller than the bandwidth {A.w}")
    if A.domain.kind == FINITE and A.domain.N % s:
        ok = [t for t in range(max(A.w, 1), A.domain.N + 1) if A.domain.N % t == 0]
        raise ValueError(
            f"block size {s} does not divide N={A.domain.N}; admissible sizes: {ok}"
        )

    def blk(K, L):
        rows = range((K - 1) * s + 1, K * s + 1)
        cols = range((L - 1) * s + 1, L * s + 1)
        if not (A.domain.contains(rows[0]) and A.domain.contains(rows[-1])):
            return None
        if not (A.domain.contains(cols[0]) and A.domain.contains(cols[-1])):
            return None
        return A.block(rows, cols)

    norms = {-1: 0.0, 0: 0.0, 1: 0.0}
    for K in _block_indices(A, s):
        for off, (r, c) in {-1: (K + 1, K), 0: (K, K), 1: (K - 1, K)}.items():
            B = blk(r, c)
            if B is not None:
                norms[off] = max(norms[off], kernels.largest_singular_value(B))
    return BlockView(A, s, norms[-1], norms[0], norms[1])


# ---------------------------------------------------------------------------
# Construction helpers
# ---------------------------------------------------------------------------


def from_column_diagonals(
    domain: IndexDomain, diagonals: Mapping[int, Diagonal], bandwidth: int | None = None
) -> BandOperator:
    """Build an operator from column-indexed diagonal data."""
    return BandOperator(
        domain, {d: column_to_row(v, d) for d, v in diagonals.items()}, bandwidth
    )


def tridiagonal(domain: IndexDomain, sub, main, sup) -> BandOperator:
    """Tridiagonal operator from ``alpha[j] = A[j+1, j]``, ``beta[j] = A[j, j]``
    and ``gamma[j] = A[j-1, j]`` (each a Diagonal, column-indexed)."""
    return from_column_diagonals(domain, {-1: sub, 0: main, 1: sup})


# ---------------------------------------------------------------------------
# Operator documents
# ---------------------------------------------------------------------------

_KINDS = ("constant", "periodic", "explicit", "perturbed_periodic")


def _complex_pair(x, where: str) -> complex:
    if (
        not isinstance(x, list)
        or len(x) != 2
        or not all(isinstance(t, (int, float)) and not isinstance(t, bool) for t in x)
    ):
        raise OperatorSchemaError(f"{where}: expected a [re, im] pair of numbers, got {x!r}")
    z = complex(x[0], x[1])
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise OperatorSchemaError(f"{where}: non-finite value {x!r}")
    return z


def _parse_diagonal(spec, where: str, domain: IndexDomain) -> tuple[int, Diagonal]:
    if not isinstance(spec, dict):
        raise OperatorSchemaError(f"{where}: expected an object")
    known = {"offset", "kind", "values", "overrides", "start"}
    extra = set(spec) - known
    if extra:
        raise OperatorSchemaError(f"{where}: unknown fields {sorted(extra)}")
    d = spec.get("offset")
    if not isinstance(d, int) or isinstance(d, bool):
        raise OperatorSchemaError(f"{where}.offset: expected an integer, got {d!r}")
    kind = spec.get("kind")
    if kind not in _KINDS:
        raise OperatorSchemaError(f"{where}.kind: expected one of {_KINDS}, got {kind!r}")
    raw = spec.get("values")
    if not isinstance(raw, list):
        raise OperatorSchemaError(f"{where}.values: expected a list of [re, im] pairs")
    values = tuple(_complex_pair(x, f"{where}.values[{r}]") for r, x in enumerate(raw))
    if kind != "perturbed_periodic" and "overrides" in spec:
        raise OperatorSchemaError(f"{where}.overrides: only allowed for perturbed_periodic")
    if kind != "explicit" and "start" in spec:
        raise OperatorSchemaError(f"{where}.start: only allowed for explicit")

    if kind == "constant":
        if len(values) != 1:
            raise OperatorSchemaError(f"{where}.values: constant takes exactly one value")
        diag = Constant(values[0])
    elif kind == "periodic":
        if not values:
            raise OperatorSchemaError(f"{where}.values: periodic needs at least one value")
        diag = Periodic(values)
    elif kind == "explicit":
        if domain.kind != FINITE:
            raise OperatorSchemaError(f"{where}: explicit diagonals need a finite domain")
        start = spec.get("start", 1)
        if not isinstance(start, int) or isinstance(start, bool):
            raise OperatorSchemaError(f"{where}.start: expected an integer")
        diag = Explicit(values, start)
    else:
        if not values:
            raise OperatorSchemaError(f"{where}.values: perturbed_periodic needs a background")
        ov_raw = spec.get("overrides", {})
        if not isinstance(ov_raw, dict):
            raise OperatorSchemaError(f"{where}.overrides: expected an object index -> [re, im]")
        ov = {}
        for key, val in ov_raw.items():
            try:
                idx = int(key)
            except ValueError:
                raise OperatorSchemaError(f"{where}.overrides: bad index {key!r}") from None
            ov[idx] = _complex_pair(val, f"{where}.overrides[{key}]")
        diag = PerturbedPeriodic(Periodic(values), ov)
    return d, diag


def parse_operator(text: str) -> BandOperator:
    """Parse and validate a JSON operator document.

    All sequences in the document are column-indexed: entry ``j`` of the
    diagonal at ``offset`` d is ``A[j - d, j]``; ``start`` and override keys
    are column indices too.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise OperatorSchemaError(f"line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise OperatorSchemaError("document: expected a JSON object")
    extra = set(doc) - {"domain", "N", "bandwidth", "diagonals", "name", "description"}
    if extra:
        raise OperatorSchemaError(f"document: unknown fields {sorted(extra)}")

    kind = doc.get("domain")
    if kind not in (FINITE, SEMI, BI):
        raise OperatorSchemaError(f"domain: expected 'finite', 'semi' or 'bi', got {kind!r}")
    N = doc.get("N")
    if kind == FINITE:
        if not isinstance(N, int) or isinstance(N, bool) or N < 1:
            raise OperatorSchemaError(f"N: finite domains need a positive integer, got {N!r}")
    elif N is not None:
        raise OperatorSchemaError("N: only allowed for finite domains")
    domain = IndexDomain(kind, N)

    w = doc.get("bandwidth")
    if w is not None and (not isinstance(w, int) or isinstance(w, bool) or w < 0):
        raise OperatorSchemaError(f"bandwidth: expected a nonnegative integer, got {w!r}")

    diags_raw = doc.get("diagonals")
    if not isinstance(diags_raw, list):
        raise OperatorSchemaError("diagonals: expected a list")
    diags: dict[int, Diagonal] = {}
    for r, spec in enumerate(diags_raw):
        where = f"diagonals[{r}]"
        d, diag = _parse_diagonal(spec, where, domain)
        if w is not None and abs(d) > w:
            raise OperatorSchemaError(f"{where}.offset: {d} lies outside declared bandwidth {w}")
        if d in diags:
            raise OperatorSchemaError(f"{where}.offset: duplicate offset {d}")
        diags[d] = column_to_row(diag, d)
    try:
        return BandOperator(domain, diags, w)
    except (ValueError, TypeError) as exc:
        raise OperatorSchemaError(str(exc)) from None


def _pair(z: complex) -> list[float]:
    return [z.real, z.imag]


def dump_operator(A: BandOperator) -> str:
    """Inverse of :func:`parse_operator` (column-indexed output)."""
    diags = []
    for d, v in A.diagonals.items():
        c = row_to_column(v, d)
        if isinstance(c, Constant):
            item = {"offset": d, "kind": "constant", "values": [_pair(c.value)]}
        elif isinstance(c, Periodic):
            item = {"offset": d, "kind": "periodic", "values": [_pair(x) for x in c.values]}
        elif isinstance(c, PerturbedPeriodic):
            item = {
                "offset": d,
                "kind": "perturbed_periodic",
                "values": [_pair(x) for x in c.background_seq.values],
                "overrides": {str(i): _pair(x) for i, x in c.overrides.items()},
            }
        else:
            if c.fill != 0:
                raise ValueError("explicit diagonals with nonzero fill cannot be serialized")
            item = {"offset": d, "kind": "explicit", "values": [_pair(x) for x in c.values],
                    "start": c.start}
        diags.append(item)
    doc = {"domain": A.domain.kind}
    if A.domain.kind == FINITE:
        doc["N"] = A.domain.N
    doc["bandwidth"] = A.w
    doc["diagonals"] = diags
    return json.dumps(doc, indent=2)
