"""CSV, JSON and SVG emission of inclusion results."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .inclusion import InclusionResult, Label
from .oracles import ConvergenceReport, SpectrumCurve

CSV_HEADER = ("re", "im", "mu_n", "label")


def _g17(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(result: InclusionResult, path) -> Path:
    path = Path(path)
    pts = result.grid.points
    names = {int(lab): lab.name for lab in Label}
    with path.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(CSV_HEADER)
        for z, mu, lab in zip(pts, result.field.values, result.labels):
            out.writerow((_g17(z.real), _g17(z.imag), _g17(mu), names[int(lab)]))
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {rows[0]}")
    body = rows[1:]
    return {
        "re": np.array([float(r[0]) for r in body]),
        "im": np.array([float(r[1]) for r in body]),
        "mu_n": np.array([float(r[2]) for r in body]),
        "label": np.array([Label[r[3]] for r in body], dtype=np.int8),
    }


def emit_curve_csv(curve: SpectrumCurve, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(("re", "im"))
        for z in curve.samples:
            out.writerow((_g17(z.real), _g17(z.imag)))
    return path


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, (np.floating, np.integer)):
        return _clean(x.item())
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    return x


def result_metadata(result: InclusionResult) -> dict:
    g = result.grid
    return {
        "n": result.field.n,
        "s": result.field.s,
        "eps": result.eps,
        "eps_n": result.eps_n,
        "closed": result.closed,
        "grid": {"re": [g.re_min, g.re_max], "im": [g.im_min, g.im_max],
                 "nx": g.nx, "ny": g.ny, "h": g.h},
        "counts": result.counts(),
        "superset_cells": int(result.superset_mask.sum()),
        "threshold_gap": result.threshold_gap(),
    }


def emit_json(payload, path) -> Path:
    """Write a ConvergenceReport (as an array of rows), an InclusionResult
    (as its metadata) or a plain dict."""
    if isinstance(payload, ConvergenceReport):
        doc = [dataclasses.asdict(r) for r in payload.rows]
    elif isinstance(payload, InclusionResult):
        doc = result_metadata(payload)
    else:
        doc = payload
    path = Path(path)
    path.write_text(json.dumps(_clean(doc), indent=2) + "\n")
    return path


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_FILL = {Label.SUPERSET_ONLY: "#b0b0b0", Label.SUBSET: "#505050"}
_PX = 600.0
_MARGIN = 50.0


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-12 * step:
        out.append(round(t, 12))
        t += step
    return out


def _runs(mask_row: np.ndarray):
    """(start, length) of consecutive True cells."""
    j, n = 0, mask_row.size
    while j < n:
        if mask_row[j]:
            k = j
            while k < n and mask_row[k]:
                k += 1
            yield j, k - j
            j = k
        else:
            j += 1


def emit_svg(result: InclusionResult, oracle: SpectrumCurve | None, path, title: str = "") -> Path:
    """Superset cells in gray, subset cells darker, oracle samples in red.

    Horizontal runs of equally labelled cells are merged into one ``rect``;
    its ``data-cells`` attribute holds the number of cells it covers.
    """
    g = result.grid
    W, H = g.re_max - g.re_min, g.im_max - g.im_min
    pw = _PX
    ph = _PX * H / W
    total_w, total_h = pw + 2 * _MARGIN, ph + 2 * _MARGIN
    labels = result.labels.reshape(g.ny, g.nx)
    n_sup = int(result.superset_mask.sum())

    def X(x):
        return _MARGIN + (x - g.re_min) / W * pw

    def Y(y):
        return _MARGIN + (g.im_max - y) / H * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total_w:.0f}" '
        f'height="{total_h:.0f}" viewBox="0 0 {total_w:.6g} {total_h:.6g}" '
        f'data-superset-cells="{n_sup}" data-n="{result.field.n}" data-eps-n="{result.eps_n:.17g}">',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    out.append(
        f'<svg x="{_MARGIN}" y="{_MARGIN}" width="{pw:.6g}" height="{ph:.6g}" '
        f'viewBox="{g.re_min:.17g} {-g.im_max:.17g} {W:.17g} {H:.17g}" preserveAspectRatio="none">'
    )
    for lab in (Label.SUPERSET_ONLY, Label.SUBSET):
        out.append(f'<g class="{lab.name.lower()}" fill="{_FILL[lab]}" stroke="none">')
        for j in range(g.ny):
            y_top = -(g.im_min + (j + 1) * g.dy)
            for i0, length in _runs(labels[j] == lab):
                out.append(
                    f'<rect x="{g.re_min + i0 * g.dx:.10g}" y="{y_top:.10g}" '
                    f'width="{length * g.dx:.10g}" height="{g.dy:.10g}" data-cells="{length}"/>'
                )
        out.append("</g>")
    if oracle is not None and len(oracle):
        r = 0.004 * max(W, H)
        out.append('<g class="oracle" fill="red" stroke="none">')
        for z in oracle.samples:
            out.append(f'<circle cx="{z.real:.8g}" cy="{-z.imag:.8g}" r="{r:.4g}"/>')
        out.append("</g>")
    out.append("</svg>")

    # axes frame and ticks in outer pixel coordinates
    out.append('<g class="axes" stroke="black" fill="none" stroke-width="1">')
    out.append(f'<rect x="{_MARGIN}" y="{_MARGIN}" width="{pw:.6g}" height="{ph:.6g}"/>')
    out.append("</g>")
    out.append('<g class="ticks" font-family="sans-serif" font-size="11" fill="black">')
    for t in _ticks(g.re_min, g.re_max):
        x = X(t)
        out.append(f'<line x1="{x:.3f}" y1="{_MARGIN + ph:.3f}" x2="{x:.3f}" y2="{_MARGIN + ph + 5:.3f}" stroke="black"/>')
        out.append(f'<text x="{x:.3f}" y="{_MARGIN + ph + 18:.3f}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(g.im_min, g.im_max):
        y = Y(t)
        out.append(f'<line x1="{_MARGIN - 5:.3f}" y1="{y:.3f}" x2="{_MARGIN:.3f}" y2="{y:.3f}" stroke="black"/>')
        out.append(f'<text x="{_MARGIN - 8:.3f}" y="{y + 4:.3f}" text-anchor="end">{f"{t:g}i" if t else "0"}</text>')
    out.append("</g>")
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
