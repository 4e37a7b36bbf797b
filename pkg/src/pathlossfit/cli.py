"""Command-line front end: fit, sweep, generate, preprocess and fspl commands.

Reports are JSON, plot-ready tables are CSV. Every output is written to a
temporary file and atomically renamed, so a failing run never leaves a
truncated file behind. Runs are fully reproducible: reports carry the tool
version, the input digest and every setting that shaped the result, and no
timestamps or other ambient state.

Exit codes: 0 success, 1 fit/model error, 2 configuration or input error,
3 fully degenerate sweep.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import io
import json
import os
import sys
from csv import writer as csv_writer
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .domain import (
    CIOptParams,
    Dataset,
    DomainError,
    FitReport,
    evaluate,
    fspl,
    param_values,
    params_to_dict,
)
from .fitters import (
    D0_BOUNDS_DEFAULT,
    FITTER_KINDS,
    FLAG_ABG_AS_AB,
    FitError,
    fit_with_reversion,
)
from .ingest import IngestError, generate, load_csv, load_spec, write_csv
from .preprocess import BIN_AVERAGE_MODES, PreprocessSettings, apply as preprocess_apply
from .sensitivity import (
    DistanceClose,
    DistanceFar,
    FrequencyLOO,
    PredictionReport,
    SweepError,
    parameter_trace,
    run_sweep,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3

CURVE_POINTS = 100


class ConfigError(ValueError):
    """Invalid command-line configuration (bad flag combination, missing file)."""


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of a fit/sweep run: one source, settings, outputs."""

    input_csv: Path | None
    synthetic_spec: Path | None
    seed_override: int | None
    preprocess: PreprocessSettings
    models: tuple[str, ...]
    f0: float | str
    d0_bounds: tuple[float, float]
    out_dir: Path

    def __post_init__(self) -> None:
        if (self.input_csv is None) == (self.synthetic_spec is None):
            raise ConfigError("exactly one input source is required: "
                              "--input CSV or --synthetic SPEC")
        source = self.input_csv or self.synthetic_spec
        if not source.is_file():
            raise ConfigError(f"input file not found: {source}")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_input(config: RunConfig) -> tuple[Dataset, dict]:
    if config.input_csv is not None:
        ds = load_csv(config.input_csv)
        provenance = {"source": "csv", "path": str(config.input_csv),
                      "sha256": _sha256(config.input_csv), "n_samples": len(ds)}
        return ds, provenance
    spec = load_spec(config.synthetic_spec)
    if config.seed_override is not None:
        spec = dataclasses.replace(spec, seed=config.seed_override)
    ds = generate(spec)
    provenance = {"source": "synthetic", "path": str(config.synthetic_spec),
                  "sha256": _sha256(config.synthetic_spec), "seed": spec.seed,
                  "n_samples": len(ds)}
    return ds, provenance


def _write_outputs(files: dict[Path, str]) -> None:
    """Stage every output to a temp file, then rename all (atomic per file)."""
    staged = []
    try:
        for path, content in files.items():
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_name(path.name + ".tmp")
            tmp.write_text(content, encoding="utf-8")
            staged.append((tmp, path))
        for tmp, path in staged:
            os.replace(tmp, path)
    except BaseException:
        for tmp, _ in staged:
            tmp.unlink(missing_ok=True)
        raise


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buffer = io.StringIO()
    writer = csv_writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _fit_report_dict(report: FitReport) -> dict:
    return {
        "params": params_to_dict(report.params),
        "sigma_db": report.sigma,
        "n_points": report.n_points,
        "flags": list(report.flags),
        "residuals_db": list(report.residuals),
    }


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------

def cmd_fit(args: argparse.Namespace) -> int:
    config = _run_config(args)
    ds_raw, provenance = _load_input(config)
    pp = preprocess_apply(ds_raw, config.preprocess)
    ds = pp.dataset

    fits: dict[str, FitReport] = {}
    for kind in config.models:
        report = fit_with_reversion(ds, kind, f0=config.f0,
                                    d0_bounds=config.d0_bounds,
                                    preprocess_settings=config.preprocess.as_dict())
        if FLAG_ABG_AS_AB in report.flags:
            print("warning: single-frequency data, abg fit reverted to ab "
                  "(frequency slope fixed at 2)", file=sys.stderr)
        fits[kind] = report

    report_doc = {
        "tool": {"name": "pathlossfit", "version": __version__},
        "input": provenance,
        "preprocess": {**config.preprocess.as_dict(),
                       "n_input": pp.n_input,
                       "removed_by_threshold": pp.removed_by_threshold,
                       "n_output": len(ds)},
        "f0": config.f0,
        "d0_bounds": list(config.d0_bounds),
        "models": {kind: _fit_report_dict(rep) for kind, rep in fits.items()},
    }
    outputs = {
        config.out_dir / "fit_report.json": _json_text(report_doc),
        config.out_dir / "model_curves.csv": _model_curves_csv(ds, fits),
    }
    _write_outputs(outputs)
    return EXIT_OK


def _model_curves_csv(ds: Dataset, fits: dict[str, FitReport]) -> str:
    """Mean path loss vs distance per frequency for each fitted model,
    alongside the free-space reference."""
    _, d, _ = ds.arrays()
    grid = np.logspace(0.0, np.log10(float(d.max())), CURVE_POINTS)
    header = ["frequency_ghz", "distance_m", "fspl_db"]
    header += [f"{kind}_db" for kind in fits]
    rows = []
    for freq in ds.frequencies:
        free_space = fspl(freq, grid)
        columns = []
        for report in fits.values():
            params = report.params
            if isinstance(params, CIOptParams):
                # undefined below the fitted reference distance
                values = [repr(float(evaluate(params, freq, x))) if x >= params.d0
                          else "" for x in grid]
            else:
                values = [repr(float(v)) for v in evaluate(params, freq, grid)]
            columns.append(values)
        for i, x in enumerate(grid):
            rows.append([repr(float(freq)), repr(float(x)), repr(float(free_space[i]))]
                        + [col[i] for col in columns])
    return _csv_text(header, rows)


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(args: argparse.Namespace) -> int:
    config = _run_config(args)
    split_spec = _split_spec(args)
    ds_raw, provenance = _load_input(config)
    pp = preprocess_apply(ds_raw, config.preprocess)

    report = run_sweep(pp.dataset, split_spec, config.models,
                       f0=config.f0, d0_bounds=config.d0_bounds)
    trace = parameter_trace(report)

    report_doc = {
        "tool": {"name": "pathlossfit", "version": __version__},
        "input": provenance,
        "preprocess": {**config.preprocess.as_dict(),
                       "n_input": pp.n_input,
                       "removed_by_threshold": pp.removed_by_threshold,
                       "n_output": len(pp.dataset)},
        "split": _split_spec_dict(split_spec),
        "models": list(config.models),
        "f0": config.f0,
        "d0_bounds": list(config.d0_bounds),
        "points": [_sweep_point_dict(p) for p in report.points],
        "parameter_ranges": [
            {"model": r.model, "param": r.name, "low": r.low,
             "high": r.high, "width": r.width}
            for r in trace.ranges
        ],
    }
    outputs = {
        config.out_dir / "sweep_report.json": _json_text(report_doc),
        config.out_dir / "sweep_trace.csv": _sweep_trace_csv(report),
    }
    _write_outputs(outputs)
    return EXIT_OK


def _split_spec(args: argparse.Namespace) -> DistanceClose | DistanceFar | FrequencyLOO:
    grid = tuple(args.delta_grid) if args.delta_grid is not None else None
    try:
        if args.split == "distance-close":
            d_max = args.d_max if args.d_max is not None else 200.0
            return DistanceClose(d_max, grid if grid is not None else _default_grid(600.0))
        if args.split == "distance-far":
            d_min = args.d_min if args.d_min is not None else 600.0
            return DistanceFar(d_min, grid if grid is not None else _default_grid(400.0))
        if args.split == "frequency-loo":
            return FrequencyLOO(args.hold_out)
    except SweepError as exc:  # malformed grid or cutoff is a config problem
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown split {args.split!r}")


def _default_grid(stop: float) -> tuple[float, ...]:
    return tuple(np.arange(0.0, stop + 1.0, 50.0))


def _split_spec_dict(spec) -> dict:
    if isinstance(spec, DistanceClose):
        return {"kind": spec.kind, "d_max": spec.d_max,
                "delta_grid": list(spec.delta_grid)}
    if isinstance(spec, DistanceFar):
        return {"kind": spec.kind, "d_min": spec.d_min,
                "delta_grid": list(spec.delta_grid)}
    return {"kind": spec.kind, "held_out": spec.held_out}


def _sweep_point_dict(point) -> dict:
    doc = {"point": point.point, "n_meas": point.n_meas, "n_pred": point.n_pred,
           "n_gap": point.n_gap, "skipped": point.skipped}
    if point.skipped:
        doc["skip_reason"] = point.skip_reason
        return doc
    doc["models"] = {
        entry.model: {"params": params_to_dict(entry.params),
                      "measurement_sigma_db": entry.measurement_sigma,
                      "prediction_sigma_db": entry.prediction_sigma,
                      "flags": list(entry.flags)}
        for entry in point.models
    }
    return doc


def _sweep_trace_csv(report: PredictionReport) -> str:
    header = ["sweep_point", "model", "param", "value", "measurement_sigma",
              "prediction_sigma", "n_meas", "n_pred", "skipped"]
    rows = []
    for point in report.points:
        if point.skipped:
            rows.append([repr(point.point), "", "", "", "", "",
                         point.n_meas, point.n_pred, "true"])
            continue
        for entry in point.models:
            for name, value in param_values(entry.params).items():
                rows.append([repr(point.point), entry.model, name, repr(value),
                             repr(entry.measurement_sigma),
                             repr(entry.prediction_sigma),
                             point.n_meas, point.n_pred, "false"])
    return _csv_text(header, rows)


# ---------------------------------------------------------------------------
# generate / preprocess / fspl
# ---------------------------------------------------------------------------

def cmd_generate(args: argparse.Namespace) -> int:
    spec_path = Path(args.spec)
    if not spec_path.is_file():
        raise ConfigError(f"spec file not found: {spec_path}")
    spec = load_spec(spec_path)
    if args.seed is not None:
        spec = dataclasses.replace(spec, seed=args.seed)
    ds = generate(spec)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    write_csv(ds, tmp)
    os.replace(tmp, out)
    return EXIT_OK


def cmd_preprocess(args: argparse.Namespace) -> int:
    in_path = Path(args.input)
    if not in_path.is_file():
        raise ConfigError(f"input file not found: {in_path}")
    settings = _preprocess_settings(args)
    result = preprocess_apply(load_csv(in_path), settings)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = out.with_name(out.name + ".tmp")
    write_csv(result.dataset, tmp)
    os.replace(tmp, out)
    print(f"kept {len(result.dataset)} of {result.n_input} samples "
          f"({result.removed_by_threshold} over threshold)", file=sys.stderr)
    return EXIT_OK


def cmd_fspl(args: argparse.Namespace) -> int:
    print(f"{fspl(args.frequency, args.distance):.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _parse_f0(text: str) -> float | str:
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--f0 expects 'auto' or a number in GHz")
    return value


def _parse_models(text: str) -> tuple[str, ...]:
    kinds = tuple(dict.fromkeys(part.strip() for part in text.split(",") if part.strip()))
    unknown = [k for k in kinds if k not in FITTER_KINDS]
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown model(s) {', '.join(unknown)}; choose from {', '.join(FITTER_KINDS)}")
    if not kinds:
        raise argparse.ArgumentTypeError("--models needs at least one model")
    return kinds


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError("--delta-grid expects comma-separated numbers")


def _add_input_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--input", type=Path, help="measurement CSV")
    sub.add_argument("--synthetic", type=Path, help="synthetic campaign spec (JSON)")
    sub.add_argument("--seed", type=int, help="override the synthetic spec's seed")
    sub.add_argument("--out-dir", type=Path, default=Path("."),
                     help="directory for report files (default: current)")
    sub.add_argument("--models", type=_parse_models, default=("abg", "ci", "cif"),
                     help="comma-separated models: abg, ab, ci, ci_opt, cif")
    sub.add_argument("--f0", type=_parse_f0, default="auto",
                     help="CIF balance frequency in GHz, or 'auto' (weighted mean)")
    sub.add_argument("--d0-bounds", nargs=2, type=float, metavar=("LO", "HI"),
                     default=list(D0_BOUNDS_DEFAULT),
                     help="search bounds for the optimized reference distance")


def _add_preprocess_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--bin-width", type=float, default=2.0,
                     help="distance bin width in meters (default 2)")
    sub.add_argument("--threshold-margin", type=float, default=100.0,
                     help="cut samples above FSPL(f, 1 m) + margin dB (default 100)")
    sub.add_argument("--no-binning", action="store_true", help="disable distance binning")
    sub.add_argument("--no-threshold", action="store_true", help="disable the loss threshold")
    sub.add_argument("--bin-average", choices=BIN_AVERAGE_MODES, default="db",
                     help="average bins in dB (default) or linear power")


def _preprocess_settings(args: argparse.Namespace) -> PreprocessSettings:
    try:
        return PreprocessSettings(bin_width=args.bin_width,
                                  threshold_margin=args.threshold_margin,
                                  binning_enabled=not args.no_binning,
                                  threshold_enabled=not args.no_threshold,
                                  bin_average=args.bin_average)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc


def _run_config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(input_csv=args.input, synthetic_spec=args.synthetic,
                     seed_override=args.seed,
                     preprocess=_preprocess_settings(args),
                     models=args.models, f0=args.f0,
                     d0_bounds=tuple(args.d0_bounds), out_dir=args.out_dir)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathlossfit",
        description="Fit and compare multi-frequency path loss models "
                    "(ABG/AB, CI, CI-opt, CIF)")
    parser.add_argument("--version", action="version",
                        version=f"pathlossfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="preprocess and fit the selected models")
    _add_input_flags(fit)
    _add_preprocess_flags(fit)
    fit.set_defaults(func=cmd_fit)

    sweep = sub.add_parser("sweep", help="measurement/prediction sensitivity sweep")
    _add_input_flags(sweep)
    _add_preprocess_flags(sweep)
    sweep.add_argument("--split", required=True,
                       choices=("distance-close", "distance-far", "frequency-loo"))
    sweep.add_argument("--d-max", type=float,
                       help="close-in cutoff in meters (default 200)")
    sweep.add_argument("--d-min", type=float,
                       help="far cutoff in meters (default 600)")
    sweep.add_argument("--delta-grid", type=_parse_grid,
                       help="comma-separated gap widths in meters")
    sweep.add_argument("--hold-out", type=float,
                       help="hold out a single frequency (GHz); default all in turn")
    sweep.set_defaults(func=cmd_sweep)

    gen = sub.add_parser("generate", help="draw a synthetic campaign CSV from a spec")
    gen.add_argument("--spec", required=True, help="synthetic spec JSON file")
    gen.add_argument("--out", required=True, help="output CSV path")
    gen.add_argument("--seed", type=int, help="override the spec's seed")
    gen.set_defaults(func=cmd_generate)

    pre = sub.add_parser("preprocess", help="threshold and bin a measurement CSV")
    pre.add_argument("--input", required=True, help="measurement CSV")
    pre.add_argument("--out", required=True, help="output CSV path")
    _add_preprocess_flags(pre)
    pre.set_defaults(func=cmd_preprocess)

    fs = sub.add_parser("fspl", help="print free-space path loss in dB")
    fs.add_argument("frequency", type=float, help="carrier frequency in GHz")
    fs.add_argument("distance", type=float, help="distance in meters")
    fs.set_defaults(func=cmd_fspl)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, IngestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SweepError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (FitError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
