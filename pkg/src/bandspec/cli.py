"""Command-line driver.

    bandspec CONFIG.json [--task spectrum] [--n 4,8,16] [--grid re0,re1,im0,im1,nx,ny] ...

Every config key can be overridden by the flag of the same name.  Exit
status: 0 success, 2 config or operator-file error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import artifacts, catalog
from .inclusion import (
    Grid,
    InclusionResult,
    essential_superset,
    make_grid,
    periodic_background,
    pseudospectrum_sets,
    spectrum_superset,
)
from .operator_model import BI, FINITE, BandOperator, OperatorSchemaError, parse_operator, sup_norms
from .oracles import ConvergenceReport, SpectrumCurve, component_count, floquet_spectrum, report_row

log = logging.getLogger("bandspec")

TASKS = ("pseudospectrum", "spectrum", "essential")
FORMATS = ("csv", "json", "svg")
DEFAULT_GRIDS = {
    "shift": ((-2, 2, -2, 2), 201, 201),
    "example_b": ((-3, 3, -2, 2), 201, 201),
    "example_c": ((-3, 3, -2, 2), 201, 201),
}

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class TaskConfig:
    operator: Path
    task: str = "spectrum"
    n_list: list[int] = field(default_factory=lambda: [8])
    eps: float | None = None
    closed: bool = False
    block_size: int | None = None
    grid: Grid | None = None
    oracle: bool = True
    t_count: int = 1024
    out: Path = Path("out")
    formats: tuple[str, ...] = FORMATS
    threads: int = 1
    no_timings: bool = False

    def validate(self) -> None:
        if self.task not in TASKS:
            raise ConfigError(f"task: expected one of {TASKS}, got {self.task!r}")
        if not self.n_list:
            raise ConfigError("n: at least one window width is required")
        if any(not isinstance(n, int) or n < 1 for n in self.n_list):
            raise ConfigError(f"n: window widths must be positive integers, got {self.n_list}")
        if self.n_list != sorted(set(self.n_list)):
            raise ConfigError(f"n: widths must be strictly ascending, got {self.n_list}")
        if self.task == "pseudospectrum":
            if self.eps is None:
                raise ConfigError("eps: required for the pseudospectrum task")
            if self.eps < 0 or (self.eps == 0 and not self.closed):
                raise ConfigError("eps: must be > 0 for open pseudospectra (>= 0 when closed)")
        if self.block_size is not None and self.block_size < 1:
            raise ConfigError("block_size: must be a positive integer or 'auto'")
        bad = set(self.formats) - set(FORMATS)
        if bad:
            raise ConfigError(f"formats: unknown {sorted(bad)}; choose from {FORMATS}")
        if self.t_count < 1:
            raise ConfigError("t_count: must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads: must be >= 1")


# ---------------------------------------------------------------------------
# Config assembly
# ---------------------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in str(text).split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"n: expected comma-separated integers, got {text!r}") from None


def _grid_from_flag(text: str) -> Grid:
    parts = text.split(",")
    if len(parts) != 6:
        raise ConfigError("--grid: expected re0,re1,im0,im1,nx,ny")
    try:
        r0, r1, i0, i1 = (float(p) for p in parts[:4])
        nx, ny = int(parts[4]), int(parts[5])
        return make_grid((r0, r1, i0, i1), nx, ny)
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from None


def _grid_from_doc(doc) -> Grid:
    try:
        return make_grid((*doc["re"], *doc["im"]), doc["nx"], doc["ny"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"grid: expected {{re: [lo, hi], im: [lo, hi], nx, ny}} ({exc})") from None


def _block_size(value) -> int | None:
    if value is None or value == "auto":
        return None
    try:
        return int(value)
    except (TypeError, ValueError):
        raise ConfigError(f"block_size: expected an integer or 'auto', got {value!r}") from None


def _resolve_operator(ref: str, base: Path) -> Path:
    p = Path(ref)
    if not p.is_absolute():
        p = base / p
    if p.exists():
        return p
    bundled = catalog.example_path(Path(ref).name)
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError(f"operator: file not found: {ref}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bandspec",
        description="Inclusion sets for spectra, pseudospectra and essential spectra of band matrices.",
    )
    ap.add_argument("config", help="JSON run configuration")
    ap.add_argument("--operator", help="operator description file")
    ap.add_argument("--task", choices=TASKS)
    ap.add_argument("--n", help="comma-separated window widths, ascending")
    ap.add_argument("--eps", type=float)
    ap.add_argument("--closed", action=argparse.BooleanOptionalAction, default=None)
    ap.add_argument("--block-size", help="block size or 'auto'")
    ap.add_argument("--grid", help="re0,re1,im0,im1,nx,ny")
    ap.add_argument("--oracle", action=argparse.BooleanOptionalAction, default=None)
    ap.add_argument("--t-count", type=int)
    ap.add_argument("--out")
    ap.add_argument("--formats", help="comma-separated subset of csv,json,svg")
    ap.add_argument("--threads", type=int)
    ap.add_argument("--no-timings", action="store_true", default=None)
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


_CONFIG_KEYS = {"operator", "task", "n", "eps", "closed", "block_size", "grid", "oracle",
                "t_count", "out", "formats", "threads", "no_timings"}


def load_config(args: argparse.Namespace) -> tuple[TaskConfig, BandOperator]:
    cfg_path = Path(args.config)
    try:
        doc = json.loads(cfg_path.read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {cfg_path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: line {exc.lineno} col {exc.colno}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config: expected a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"config: unknown keys {sorted(unknown)}")

    def pick(name, flag_value):
        return flag_value if flag_value is not None else doc.get(name)

    op_ref = pick("operator", args.operator)
    if not op_ref:
        raise ConfigError("operator: missing")
    base = cfg_path.parent
    op_path = _resolve_operator(op_ref, base if args.operator is None else Path.cwd())
    try:
        A = parse_operator(op_path.read_text())
    except OperatorSchemaError as exc:
        raise ConfigError(f"{op_path}: {exc}") from None

    n_raw = pick("n", args.n)
    if isinstance(n_raw, list):
        n_list = n_raw
    elif isinstance(n_raw, int):
        n_list = [n_raw]
    elif n_raw is None:
        n_list = [8]
    else:
        n_list = _int_list(n_raw)

    if args.grid is not None:
        grid = _grid_from_flag(args.grid)
    elif doc.get("grid") is not None:
        grid = _grid_from_doc(doc["grid"])
    else:
        grid = default_grid(A, op_path.stem)

    formats = pick("formats", args.formats) or list(FORMATS)
    if isinstance(formats, str):
        formats = [f for f in formats.split(",") if f]

    out = Path(pick("out", args.out) or "out")

    cfg = TaskConfig(
        operator=op_path,
        task=pick("task", args.task) or "spectrum",
        n_list=n_list,
        eps=pick("eps", args.eps),
        closed=bool(pick("closed", args.closed) or False),
        block_size=_block_size(pick("block_size", args.block_size)),
        grid=grid,
        oracle=bool(True if pick("oracle", args.oracle) is None else pick("oracle", args.oracle)),
        t_count=int(pick("t_count", args.t_count) or 1024),
        out=out,
        formats=tuple(formats),
        threads=int(pick("threads", args.threads) or 1),
        no_timings=bool(pick("no_timings", args.no_timings) or False),
    )
    cfg.validate()
    return cfg, A


def default_grid(A: BandOperator, name: str) -> Grid:
    if name in DEFAULT_GRIDS:
        rect, nx, ny = DEFAULT_GRIDS[name]
        return make_grid(rect, nx, ny)
    # the spectrum lies in the disc of radius ||A|| <= sum of diagonal sup norms
    r = sum(sup_norms(A).values()) + 0.5
    return make_grid((-r, r, -r, r), 201, 201)


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------


def _oracle_curve(cfg: TaskConfig, A: BandOperator) -> SpectrumCurve | None:
    if not cfg.oracle:
        return None
    if cfg.task == "essential":
        if A.domain.kind == FINITE or A.period is None:
            log.warning("oracle skipped: no periodic background")
            return None
        return floquet_spectrum(periodic_background(A), cfg.t_count)
    if A.domain.kind == BI and A.is_periodic:
        return floquet_spectrum(A, cfg.t_count)
    log.warning("oracle skipped: Floquet spectra need a periodic bi-infinite operator")
    return None


def _compute(cfg: TaskConfig, A: BandOperator, n: int) -> InclusionResult:
    s = cfg.block_size
    if cfg.task == "spectrum":
        return spectrum_superset(A, n, s, cfg.grid, threads=cfg.threads)
    if cfg.task == "essential":
        return essential_superset(A, n, s, cfg.grid, threads=cfg.threads)
    return pseudospectrum_sets(A, n, s, cfg.grid, cfg.eps, cfg.closed, threads=cfg.threads)


def run(cfg: TaskConfig, A: BandOperator) -> dict:
    cfg.out.mkdir(parents=True, exist_ok=True)
    curve = _oracle_curve(cfg, A)
    report = ConvergenceReport()
    rows = []
    for n in cfg.n_list:
        t0 = time.perf_counter()
        res = _compute(cfg, A, n)
        runtime = None if cfg.no_timings else time.perf_counter() - t0
        stem = f"{cfg.task}_n{n}"
        if "csv" in cfg.formats:
            artifacts.emit_csv(res, cfg.out / f"{stem}.csv")
        if "svg" in cfg.formats:
            artifacts.emit_svg(res, curve, cfg.out / f"{stem}.svg",
                               title=f"{cfg.operator.stem}: {cfg.task}, n={n}")
        meta = artifacts.result_metadata(res)
        meta["components"] = component_count(res) if res.superset_mask.any() else 0
        meta["runtime"] = runtime
        if curve is not None and cfg.task != "pseudospectrum":
            row = report_row(res, curve, runtime)
            report.rows.append(row)
            meta["hausdorff"] = row.hausdorff
        rows.append(meta)
        log.info("n=%d eps_n=%.6g superset cells=%d", n, res.eps_n, meta["superset_cells"])
    doc = {
        "operator": cfg.operator.name,
        "task": cfg.task,
        "eps": cfg.eps,
        "closed": cfg.closed if cfg.task == "pseudospectrum" else True,
        "block_size": "auto" if cfg.block_size is None else cfg.block_size,
        "results": rows,
        "oracle": None if curve is None else {
            "t_count": curve.t_count, "q": curve.q,
            "samples": len(curve), "max_step": curve.max_step,
        },
        "convergence": [dict(r.__dict__) for r in report.rows],
    }
    if "json" in cfg.formats:
        artifacts.emit_json(doc, cfg.out / "report.json")
        if curve is not None:
            artifacts.emit_curve_csv(curve, cfg.out / "oracle.csv")
    return doc


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg, A = load_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"bandspec: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        run(cfg, A)
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"bandspec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        # window/block preconditions that only show up once n and s are combined
        print(f"bandspec: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
