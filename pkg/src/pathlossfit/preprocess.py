"""Measurement conditioning: distance-bin local averaging and loss thresholding.

Samples weaker than free space at 1 m plus a margin are dropped (the margin
is frequency dependent through the FSPL term), and the survivors are locally
averaged over fixed-width distance bins per (campaign, frequency,
environment, scenario) group so that different frequencies or campaigns
never average together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Dataset, DomainError, PathLossSample, fspl

BIN_AVERAGE_MODES = ("db", "linear")


@dataclass(frozen=True)
class PreprocessSettings:
    """Conditioning knobs: 2 m bins and a 100 dB over-1m-FSPL cut by default."""

    bin_width: float = 2.0
    threshold_margin: float = 100.0
    binning_enabled: bool = True
    threshold_enabled: bool = True
    # Local averaging runs on dB values by default, consistent with lognormal
    # shadowing; "linear" averages 10^(PL/10) instead, for experimentation.
    bin_average: str = "db"

    def __post_init__(self) -> None:
        if not self.bin_width > 0:
            raise DomainError(f"bin_width must be > 0 m, got {self.bin_width}")
        if not self.threshold_margin > 0:
            raise DomainError(
                f"threshold_margin must be > 0 dB, got {self.threshold_margin}")
        if self.bin_average not in BIN_AVERAGE_MODES:
            raise DomainError(f"bin_average must be one of {BIN_AVERAGE_MODES}")

    def as_dict(self) -> dict[str, object]:
        return {
            "bin_width": self.bin_width,
            "threshold_margin": self.threshold_margin,
            "binning_enabled": self.binning_enabled,
            "threshold_enabled": self.threshold_enabled,
            "bin_average": self.bin_average,
        }


@dataclass(frozen=True)
class ThresholdResult:
    dataset: Dataset
    removed: int


@dataclass(frozen=True)
class PreprocessResult:
    dataset: Dataset
    n_input: int
    removed_by_threshold: int
    n_bins: int


def threshold(ds: Dataset, settings: PreprocessSettings) -> ThresholdResult:
    """Drop samples with path_loss > FSPL(f, 1 m) + margin, keeping order."""
    kept = []
    removed = 0
    for s in ds:
        if s.path_loss > fspl(s.frequency, 1.0) + settings.threshold_margin:
            removed += 1
        else:
            kept.append(s)
    return ThresholdResult(Dataset(tuple(kept)), removed)


def _group_key(sample: PathLossSample, bin_width: float):
    return (sample.campaign, sample.frequency, sample.environment,
            sample.scenario, math.floor(sample.distance / bin_width))


def bin_by_distance(ds: Dataset, settings: PreprocessSettings) -> Dataset:
    """Locally average samples over half-open distance bins [k*w, (k+1)*w).

    Each (campaign, frequency, environment, scenario, bin) group collapses to
    one sample at the mean member distance with the mean member path loss;
    groups appear in order of first occurrence. Averaging runs in dB or in
    linear power depending on ``settings.bin_average``.
    """
    groups: dict[tuple, list[PathLossSample]] = {}
    for s in ds:
        groups.setdefault(_group_key(s, settings.bin_width), []).append(s)

    out = []
    for members in groups.values():
        distance = float(np.mean([m.distance for m in members]))
        losses = np.array([m.path_loss for m in members])
        if settings.bin_average == "db":
            path_loss = float(np.mean(losses))
        else:
            path_loss = float(10.0 * np.log10(np.mean(10.0 ** (losses / 10.0))))
        head = members[0]
        out.append(PathLossSample(frequency=head.frequency, distance=distance,
                                  path_loss=path_loss, scenario=head.scenario,
                                  environment=head.environment,
                                  campaign=head.campaign))
    return Dataset(tuple(out))


def apply(ds: Dataset, settings: PreprocessSettings) -> PreprocessResult:
    """Threshold first (drop unphysically weak samples), then bin the rest."""
    n_input = len(ds)
    removed = 0
    current = ds
    if settings.threshold_enabled:
        result = threshold(current, settings)
        current, removed = result.dataset, result.removed
    n_bins = 0
    if settings.binning_enabled:
        current = bin_by_distance(current, settings)
        n_bins = len(current)
    return PreprocessResult(dataset=current, n_input=n_input,
                            removed_by_threshold=removed, n_bins=n_bins)
