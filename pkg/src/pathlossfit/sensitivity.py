"""Measurement/prediction splits and sweeps for model sensitivity analysis.

A split rule partitions a dataset into a measurement set (used to fit each
model) and a disjoint prediction set (used only to score it); sweeping the
rule traces how the prediction error and the fitted parameters move as the
two sets grow apart in distance or as each frequency is held out in turn.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .domain import (
    Dataset,
    DomainError,
    ModelParams,
    evaluate,
    param_values,
    rms,
)
from .fitters import (
    D0_BOUNDS_DEFAULT,
    FITTER_KINDS,
    FitError,
    fit_with_reversion,
)

DEFAULT_MODELS = ("abg", "ci", "cif")

# Scenario-specific close-in cutoffs: the prediction set keeps everything at
# or below d_max and the measurement set recedes beyond d_max + delta.
DEFAULT_D_MAX = {"UMa": 200.0, "UMiSC": 50.0, "InHOffice": 15.0}
DEFAULT_D_MIN = 600.0


class SweepError(ValueError):
    """A sweep or prediction score could not be produced."""


def _validated_grid(grid) -> tuple[float, ...]:
    grid = tuple(float(g) for g in grid)
    if not grid:
        raise SweepError("delta grid must be nonempty")
    if any(g < 0 for g in grid):
        raise SweepError("delta grid values must be nonnegative")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise SweepError("delta grid must be strictly increasing")
    return grid


@dataclass(frozen=True)
class DistanceClose:
    """Prediction set d <= d_max; measurement set d > d_max + delta."""

    d_max: float
    delta_grid: tuple[float, ...]

    kind = "distance_close"

    def __post_init__(self) -> None:
        if not self.d_max > 0:
            raise SweepError(f"d_max must be > 0 m, got {self.d_max}")
        object.__setattr__(self, "delta_grid", _validated_grid(self.delta_grid))


@dataclass(frozen=True)
class DistanceFar:
    """Prediction set d >= d_min; measurement set d < d_min - delta."""

    d_min: float
    delta_grid: tuple[float, ...]

    kind = "distance_far"

    def __post_init__(self) -> None:
        if not self.d_min > 0:
            raise SweepError(f"d_min must be > 0 m, got {self.d_min}")
        object.__setattr__(self, "delta_grid", _validated_grid(self.delta_grid))


@dataclass(frozen=True)
class FrequencyLOO:
    """Hold one frequency out as the prediction set, fit on all others.

    With ``held_out=None`` a sweep visits every frequency in the dataset in
    ascending order.
    """

    held_out: float | None = None

    kind = "frequency_loo"


SplitSpec = Union[DistanceClose, DistanceFar, FrequencyLOO]


def steps(stop: float, step: float = 50.0, start: float = 0.0) -> tuple[float, ...]:
    """Inclusive arithmetic grid start, start+step, ... up to stop."""
    if step <= 0:
        raise SweepError("step must be positive")
    out = []
    k = 0
    while (value := start + k * step) <= stop + 1e-9:
        out.append(value)
        k += 1
    return tuple(out)


def default_close_spec(scenario_name: str = "UMa", *,
                       delta_stop: float = 600.0, step: float = 50.0) -> DistanceClose:
    if scenario_name not in DEFAULT_D_MAX:
        raise SweepError(f"no default d_max for scenario {scenario_name!r}; "
                         f"known: {sorted(DEFAULT_D_MAX)}")
    return DistanceClose(DEFAULT_D_MAX[scenario_name], steps(delta_stop, step))


def default_far_spec(*, delta_stop: float = 400.0, step: float = 50.0) -> DistanceFar:
    return DistanceFar(DEFAULT_D_MIN, steps(delta_stop, step))


def sweep_points(ds: Dataset, spec: SplitSpec) -> tuple[float, ...]:
    if isinstance(spec, (DistanceClose, DistanceFar)):
        return spec.delta_grid
    if spec.held_out is not None:
        return (float(spec.held_out),)
    return ds.frequencies


def split(ds: Dataset, spec: SplitSpec, point: float) -> tuple[Dataset, Dataset]:
    """Partition per the spec's rule at one sweep point.

    Returns (measurement, prediction). For the distance rules, samples in the
    widening gap between the sets belong to neither and are dropped.
    """
    if isinstance(spec, DistanceClose):
        prediction = ds.filter(lambda s: s.distance <= spec.d_max)
        measurement = ds.filter(lambda s: s.distance > spec.d_max + point)
    elif isinstance(spec, DistanceFar):
        prediction = ds.filter(lambda s: s.distance >= spec.d_min)
        measurement = ds.filter(lambda s: s.distance < spec.d_min - point)
    elif isinstance(spec, FrequencyLOO):
        prediction = ds.filter(lambda s: s.frequency == point)
        measurement = ds.filter(lambda s: s.frequency != point)
    else:
        raise SweepError(f"unknown split spec {type(spec).__name__}")
    return measurement, prediction


def prediction_sigma(params: ModelParams, prediction: Dataset) -> float:
    """RMS of the prediction-set residuals about the model, no re-centering."""
    if len(prediction) == 0:
        raise SweepError("prediction set is empty")
    f, d, pl = prediction.arrays()
    return rms(pl - evaluate(params, f, d))


@dataclass(frozen=True)
class ModelPrediction:
    model: str  # requested kind; the params may be the substituted variant
    params: ModelParams
    measurement_sigma: float
    prediction_sigma: float
    flags: tuple[str, ...] = ()


@dataclass(frozen=True)
class SweepPoint:
    point: float
    n_meas: int
    n_pred: int
    n_gap: int
    skipped: bool
    skip_reason: str = ""
    models: tuple[ModelPrediction, ...] = ()


@dataclass(frozen=True)
class PredictionReport:
    spec: SplitSpec
    points: tuple[SweepPoint, ...]

    def active_points(self) -> tuple[SweepPoint, ...]:
        return tuple(p for p in self.points if not p.skipped)


def run_sweep(ds: Dataset, spec: SplitSpec,
              models: tuple[str, ...] = DEFAULT_MODELS, *,
              f0: float | str = "auto",
              d0_bounds: tuple[float, float] = D0_BOUNDS_DEFAULT) -> PredictionReport:
    """Fit each model on every measurement set and score it on the prediction set.

    Sweep points whose measurement or prediction set is empty, or whose fits
    are degenerate, are marked skipped; if every point is skipped the sweep
    fails, naming the first degeneracy. Deterministic for identical inputs.
    """
    if not models:
        raise SweepError("at least one model is required")
    for kind in models:
        if kind not in FITTER_KINDS:
            raise SweepError(f"unknown model kind {kind!r}; expected one of {FITTER_KINDS}")
    results = []
    for point in sweep_points(ds, spec):
        measurement, prediction = split(ds, spec, point)
        n_gap = len(ds) - len(measurement) - len(prediction)
        base = dict(point=float(point), n_meas=len(measurement),
                    n_pred=len(prediction), n_gap=n_gap)
        if len(measurement) == 0 or len(prediction) == 0:
            which = "measurement" if len(measurement) == 0 else "prediction"
            results.append(SweepPoint(skipped=True,
                                      skip_reason=f"empty {which} set", **base))
            continue
        try:
            entries = []
            for kind in models:
                report = fit_with_reversion(measurement, kind, f0=f0,
                                            d0_bounds=d0_bounds)
                entries.append(ModelPrediction(
                    model=kind, params=report.params,
                    measurement_sigma=report.sigma,
                    prediction_sigma=prediction_sigma(report.params, prediction),
                    flags=report.flags))
        except (FitError, DomainError) as exc:
            results.append(SweepPoint(skipped=True, skip_reason=str(exc), **base))
            continue
        results.append(SweepPoint(skipped=False, models=tuple(entries), **base))

    results.sort(key=lambda p: p.point)
    report = PredictionReport(spec=spec, points=tuple(results))
    if not report.active_points():
        first = results[0]
        raise SweepError(f"all sweep points skipped; first degeneracy at "
                         f"point {first.point}: {first.skip_reason}")
    return report


@dataclass(frozen=True)
class ParamRange:
    """Stability summary of one fitted parameter across the sweep."""

    model: str
    name: str
    low: float
    high: float

    @property
    def width(self) -> float:
        return self.high - self.low


@dataclass(frozen=True)
class ParameterTrace:
    """Long-form (point, model, name, value) rows plus per-parameter ranges."""

    rows: tuple[tuple[float, str, str, float], ...]
    ranges: tuple[ParamRange, ...]

    def range_of(self, model: str, name: str) -> ParamRange:
        for r in self.ranges:
            if r.model == model and r.name == name:
                return r
        raise KeyError((model, name))


def parameter_trace(report: PredictionReport) -> ParameterTrace:
    """Tabulate fitted parameters per sweep point and their min/max spread."""
    if not report.points:
        raise SweepError("empty prediction report")
    rows = []
    spans: dict[tuple[str, str], tuple[float, float]] = {}
    for point in report.active_points():
        for entry in point.models:
            for name, value in param_values(entry.params).items():
                rows.append((point.point, entry.model, name, value))
                key = (entry.model, name)
                lo, hi = spans.get(key, (value, value))
                spans[key] = (min(lo, value), max(hi, value))
    ranges = tuple(ParamRange(model, name, lo, hi)
                   for (model, name), (lo, hi) in sorted(spans.items()))
    return ParameterTrace(rows=tuple(rows), ranges=ranges)
