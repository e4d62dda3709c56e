"""Command-line frontend: sweeps, peaks, scaling fits, and collapse tables.

Emits plot-ready columnar data as CSV (LF, UTF-8, repr-formatted numbers so
every value round-trips bit-for-bit) or JSON ({config, rows, metadata}).
Exit codes: 0 success, 1 internal or numeric error, 2 usage or precondition
error.  ``TFIM_RFS_THREADS`` caps the worker threads used for independent
grid points (default 1).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from .exact import ChainSpec, correlators_finite, correlators_thermo
from .rdm import build_rdm
from .rfs import SingularBlockError, rfs_closed_form, rfs_oracle
from .scaling import (
    LOG_SQUARED_AMPLITUDE,
    PeakSearchError,
    collapse_quality,
    data_collapse,
    find_peak,
    fit_finite_size,
)

__all__ = ["RunConfig", "main", "entry_point"]

_COMMANDS = ("correlators", "rfs", "sweep", "peak", "scaling", "collapse", "thermo")

# Commands that interpret (lambda_min, lambda_max) as a peak-search bracket.
_BRACKET_COMMANDS = ("peak", "scaling", "collapse")

_DEFAULTS = {
    "sizes": (512, 1024, 2048, 4096, 8192, 16384),
    "lambda_min": 0.8,
    "lambda_max": 1.2,
    "steps": 41,
    "delta": 1e-4,
    "nu": 1.0,
    "verify": False,
    "format": "csv",
    "out": None,
}
_BRACKET_DEFAULT = (0.8, 1.1)


class UsageError(ValueError):
    """Bad flags, config values, or unmet command preconditions."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    sizes: tuple[int, ...]
    lambda_min: float
    lambda_max: float
    steps: int
    delta: float
    nu: float
    verify: bool
    output_format: str
    output_path: str | None

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not self.sizes:
            raise UsageError("at least one size is required")
        if any(n % 2 != 0 or n < 4 for n in self.sizes):
            raise UsageError(f"sizes must be even and >= 4, got {list(self.sizes)}")
        if not self.lambda_min < self.lambda_max:
            raise UsageError(
                f"lambda range must satisfy min < max, got [{self.lambda_min}, {self.lambda_max}]"
            )
        if self.steps < 1:
            raise UsageError(f"steps must be >= 1, got {self.steps}")
        if self.output_format not in ("csv", "json"):
            raise UsageError(f"format must be csv or json, got {self.output_format!r}")


def _parse_sizes(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise UsageError(f"cannot parse sizes {text!r}; expected e.g. 512,1024") from None


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"cannot parse boolean {text!r}")


def load_config_file(path: str) -> dict:
    """Flat key = value file mirroring the flag names (underscored)."""
    values = {}
    try:
        handle = open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from exc
    with handle:
        for line_no, raw in enumerate(handle, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{line_no}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip().replace("-", "_")
            value = value.strip()
            if key not in _DEFAULTS:
                raise UsageError(f"{path}:{line_no}: unknown key {key!r}")
            values[key] = value
    parsed = {}
    for key, value in values.items():
        if key == "sizes":
            parsed[key] = _parse_sizes(value)
        elif key in ("lambda_min", "lambda_max", "delta", "nu"):
            parsed[key] = float(value)
        elif key == "steps":
            parsed[key] = int(value)
        elif key == "verify":
            parsed[key] = _parse_bool(value)
        else:
            parsed[key] = value
    return parsed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tfim-rfs",
        description=(
            "Two-site reduced fidelity susceptibility of the transverse-field "
            "Ising chain: exact sweeps, peak scaling, and data collapse."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "correlators": "magnetization and neighbour correlators on an (N, lambda) grid",
        "rfs": "closed-form susceptibility with per-block contributions",
        "sweep": "susceptibility over the (N, lambda) grid, optionally oracle-verified",
        "peak": "peak location lambda_m and height chi_m per size",
        "scaling": "peaks plus the sqrt(chi_m) vs ln N fit (needs >= 5 sizes)",
        "collapse": "scaled collapse curves and their quality metric (needs >= 3 sizes)",
        "thermo": "thermodynamic-limit correlators and susceptibility per lambda",
    }
    for name in _COMMANDS:
        cmd = sub.add_parser(name, help=helps[name])
        cmd.add_argument("--sizes", type=str, default=None,
                         help="comma-separated even chain sizes, e.g. 512,1024")
        cmd.add_argument("--lambda-min", type=float, default=None, dest="lambda_min")
        cmd.add_argument("--lambda-max", type=float, default=None, dest="lambda_max")
        cmd.add_argument("--steps", type=int, default=None,
                         help="grid points between lambda-min and lambda-max")
        cmd.add_argument("--delta", type=float, default=None,
                         help="oracle base step (default 1e-4)")
        cmd.add_argument("--nu", type=float, default=None,
                         help="collapse exponent (default 1)")
        cmd.add_argument("--verify", action="store_true", default=None,
                         help="run the fidelity oracle alongside the closed form")
        cmd.add_argument("--format", choices=("csv", "json"), default=None)
        cmd.add_argument("--out", type=str, default=None,
                         help="output path (default stdout)")
        cmd.add_argument("--config", type=str, default=None,
                         help="flat key=value config file; flags take precedence")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, config file, and flags (increasing precedence)."""
    merged = dict(_DEFAULTS)
    if args.command in _BRACKET_COMMANDS:
        merged["lambda_min"], merged["lambda_max"] = _BRACKET_DEFAULT
    if args.config is not None:
        merged.update(load_config_file(args.config))
    for key in ("lambda_min", "lambda_max", "steps", "delta", "nu", "verify", "format", "out"):
        value = getattr(args, key)
        if value is not None:
            merged[key] = value
    if args.sizes is not None:
        merged["sizes"] = _parse_sizes(args.sizes)
    return RunConfig(
        command=args.command,
        sizes=tuple(sorted(set(merged["sizes"]))),
        lambda_min=float(merged["lambda_min"]),
        lambda_max=float(merged["lambda_max"]),
        steps=int(merged["steps"]),
        delta=float(merged["delta"]),
        nu=float(merged["nu"]),
        verify=bool(merged["verify"]),
        output_format=merged["format"],
        output_path=merged["out"],
    )


def _lambda_grid(cfg: RunConfig):
    return [float(v) for v in np.linspace(cfg.lambda_min, cfg.lambda_max, cfg.steps)]


def _max_workers() -> int:
    raw = os.environ.get("TFIM_RFS_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        raise UsageError(f"TFIM_RFS_THREADS must be an integer, got {raw!r}") from None


def _map_ordered(fn, items):
    workers = _max_workers()
    if workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _finite(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def cmd_correlators(cfg: RunConfig):
    columns = ["n_sites", "lambda", "sz", "xx", "yy", "zz", "d_sz", "d_xx", "d_yy", "d_zz"]
    grid = [(n, lam) for n in cfg.sizes for lam in _lambda_grid(cfg)]

    def row(point):
        n, lam = point
        c = correlators_finite(ChainSpec(n, lam))
        return {"n_sites": n, "lambda": lam, "sz": c.sz, "xx": c.xx, "yy": c.yy,
                "zz": c.zz, "d_sz": c.d_sz, "d_xx": c.d_xx, "d_yy": c.d_yy, "d_zz": c.d_zz}

    return columns, _map_ordered(row, grid), {}


def _chi_row(n: int, lam: float, cfg: RunConfig, with_blocks: bool) -> dict:
    row = {"n_sites": n, "lambda": lam}
    try:
        value = rfs_closed_form(build_rdm(correlators_finite(ChainSpec(n, lam))))
        row["chi"] = value.chi
        if with_blocks:
            row["chi_block1"] = value.chi_block1
            row["chi_block2"] = value.chi_block2
    except SingularBlockError:
        row["chi"] = None
        if with_blocks:
            row["chi_block1"] = None
            row["chi_block2"] = None
    if cfg.verify:
        try:
            oracle = rfs_oracle(ChainSpec(n, lam), cfg.delta)
            row["chi_oracle"] = oracle.chi
            row["discrepancy"] = oracle.discrepancy
        except ValueError:
            row["chi_oracle"] = None
            row["discrepancy"] = None
    return row


def _sweep_like(cfg: RunConfig, with_blocks: bool):
    columns = ["n_sites", "lambda", "chi"]
    if with_blocks:
        columns += ["chi_block1", "chi_block2"]
    if cfg.verify:
        columns += ["chi_oracle", "discrepancy"]
    grid = [(n, lam) for n in cfg.sizes for lam in _lambda_grid(cfg)]
    rows = _map_ordered(lambda p: _chi_row(p[0], p[1], cfg, with_blocks), grid)
    singular = sum(1 for r in rows if r["chi"] is None)
    metadata = {"singular_rows": singular} if singular else {}
    return columns, rows, metadata


def cmd_sweep(cfg: RunConfig):
    return _sweep_like(cfg, with_blocks=False)


def cmd_rfs(cfg: RunConfig):
    return _sweep_like(cfg, with_blocks=True)


def _collect_peaks(cfg: RunConfig):
    bracket = (cfg.lambda_min, cfg.lambda_max)

    def one(n):
        try:
            return find_peak(n, bracket=bracket, scan_points=cfg.steps)
        except PeakSearchError as exc:
            return (n, str(exc))

    results = _map_ordered(one, list(cfg.sizes))
    peaks = [r for r in results if not isinstance(r, tuple)]
    failures = [r for r in results if isinstance(r, tuple)]
    return peaks, failures


def cmd_peak(cfg: RunConfig):
    peaks, failures = _collect_peaks(cfg)
    if failures:
        raise UsageError(
            "peak search failed for sizes: "
            + "; ".join(f"N={n}: {msg}" for n, msg in failures)
        )
    columns = ["n_sites", "lambda_m", "chi_m"]
    rows = [{"n_sites": p.n_sites, "lambda_m": p.lambda_m, "chi_m": p.chi_m} for p in peaks]
    return columns, rows, {}


def cmd_scaling(cfg: RunConfig):
    if len(cfg.sizes) < 5:
        raise UsageError(f"scaling needs at least 5 sizes, got {len(cfg.sizes)}")
    peaks, failures = _collect_peaks(cfg)
    if len(peaks) < 5:
        raise UsageError(
            f"only {len(peaks)} peak searches succeeded (need >= 5); failures: "
            + "; ".join(f"N={n}: {msg}" for n, msg in failures)
        )
    fit = fit_finite_size(peaks)
    columns = ["n_sites", "lambda_m", "chi_m", "sqrt_chi_m"]
    rows = [
        {"n_sites": p.n_sites, "lambda_m": p.lambda_m, "chi_m": p.chi_m,
         "sqrt_chi_m": math.sqrt(p.chi_m)}
        for p in peaks
    ]
    metadata = {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "sqrt_amplitude_ref": fit.params["sqrt_amplitude_ref"],
        "slope_percent_deviation": 100.0 * fit.params["slope_rel_deviation"],
        "amplitude": fit.params["amplitude"],
        "amplitude_ref": LOG_SQUARED_AMPLITUDE,
        "c1": fit.params["c1"],
        "flagged": fit.flagged,
    }
    if failures:
        metadata["peak_failures"] = [f"N={n}: {msg}" for n, msg in failures]
    return columns, rows, metadata


def cmd_collapse(cfg: RunConfig):
    if len(cfg.sizes) < 3:
        raise UsageError(f"collapse needs at least 3 sizes, got {len(cfg.sizes)}")
    peaks, failures = _collect_peaks(cfg)
    if failures:
        raise UsageError(
            "peak search failed for sizes: "
            + "; ".join(f"N={n}: {msg}" for n, msg in failures)
        )
    records = {p.n_sites: p for p in peaks}
    curve = data_collapse(cfg.sizes, nu=cfg.nu, peaks=records)
    quality = collapse_quality(curve)
    columns = ["n_sites", "x", "y"]
    rows = [{"n_sites": n, "x": x, "y": y} for x, y, n in curve.points]
    rows.sort(key=lambda r: (r["n_sites"], r["x"]))
    return columns, rows, {"nu": cfg.nu, "collapse_quality": quality}


def cmd_thermo(cfg: RunConfig):
    columns = ["lambda", "sz", "xx", "yy", "zz", "d_sz", "d_xx", "d_yy", "d_zz", "chi"]
    rows = []
    for lam in _lambda_grid(cfg):
        c = correlators_thermo(lam)
        row = {"lambda": lam, "sz": c.sz, "xx": c.xx, "yy": c.yy, "zz": c.zz,
               "d_sz": _finite(c.d_sz), "d_xx": _finite(c.d_xx),
               "d_yy": _finite(c.d_yy), "d_zz": _finite(c.d_zz)}
        if c.derivatives_divergent:
            row["chi"] = None
        else:
            try:
                row["chi"] = rfs_closed_form(build_rdm(c)).chi
            except SingularBlockError:
                row["chi"] = None
        rows.append(row)
    divergent = sum(1 for r in rows if r["chi"] is None)
    metadata = {"divergent_rows": divergent} if divergent else {}
    return columns, rows, metadata


_DISPATCH = {
    "correlators": cmd_correlators,
    "rfs": cmd_rfs,
    "sweep": cmd_sweep,
    "peak": cmd_peak,
    "scaling": cmd_scaling,
    "collapse": cmd_collapse,
    "thermo": cmd_thermo,
}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))  # plain-float repr: shortest round-trip form
    return str(value)


def render_csv(columns, rows, metadata) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(col)) for col in columns])
    for key, value in metadata.items():
        if isinstance(value, list):
            for item in value:
                buffer.write(f"# {key} = {item}\n")
        else:
            buffer.write(f"# {key} = {_cell(value)}\n")
    return buffer.getvalue()


def render_json(cfg: RunConfig, columns, rows, metadata) -> str:
    cleaned = [{col: row.get(col) for col in columns} for row in rows]
    doc = {"config": asdict(cfg), "rows": cleaned, "metadata": metadata}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _emit(cfg: RunConfig, text: str):
    if cfg.output_path is None:
        sys.stdout.write(text)
        return
    try:
        with open(cfg.output_path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {cfg.output_path!r}: {exc}") from exc


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        columns, rows, metadata = _DISPATCH[cfg.command](cfg)
        text = (
            render_csv(columns, rows, metadata)
            if cfg.output_format == "csv"
            else render_json(cfg, columns, rows, metadata)
        )
        _emit(cfg, text)
    except UsageError as exc:
        print(f"tfim-rfs: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"tfim-rfs: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"tfim-rfs: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # numeric/internal failures
        print(f"tfim-rfs: internal error: {exc}", file=sys.stderr)
        return 1
    return 0


def entry_point():
    sys.exit(main())


if __name__ == "__main__":
    entry_point()
