"""Core value types and forward evaluation of the ABG, CI and CIF path loss models.

All frequencies are carrier frequencies in GHz, all distances are 3D
transmitter-receiver separations in meters, and all losses are in dB.
Every type is immutable and every function is pure, so everything here is
safe to share across threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Union

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact by definition

# Free-space loss of the first meter at 1 GHz: 20*log10(4*pi*1e9/c).
# This is the frequency-independent part of FSPL, 32.4478 dB (often quoted
# rounded to 32.4 dB).
FREE_SPACE_INTERCEPT_DB = 20.0 * math.log10(4.0 * math.pi * 1e9 / SPEED_OF_LIGHT)


class DomainError(ValueError):
    """A model was evaluated or constructed outside its physical domain."""


class Environment(enum.Enum):
    """Line-of-sight condition of a measured link."""

    LOS = "LOS"
    NLOS = "NLOS"


@dataclass(frozen=True)
class Scenario:
    """Deployment scenario label (urban macro/micro, indoor office/mall, or custom)."""

    name: str
    label: str = ""

    _KNOWN = ("UMa", "UMiSC", "InHOffice", "InHSM", "Other")

    def __post_init__(self) -> None:
        if self.name not in self._KNOWN:
            raise DomainError(f"unknown scenario {self.name!r}; expected one of {self._KNOWN}")
        if self.label and self.name != "Other":
            raise DomainError("only the Other scenario carries a free-text label")

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        """Parse the CSV form: a known name, or ``Other:<label>``."""
        if text.startswith("Other:"):
            return cls("Other", text[len("Other:"):])
        return cls(text)

    def __str__(self) -> str:
        if self.name == "Other" and self.label:
            return f"Other:{self.label}"
        return self.name


UMA = Scenario("UMa")
UMI_SC = Scenario("UMiSC")
INH_OFFICE = Scenario("InHOffice")
INH_SM = Scenario("InHSM")
OTHER = Scenario("Other")


@dataclass(frozen=True)
class PathLossSample:
    """One path loss observation: (frequency GHz, 3D distance m, loss dB).

    Valid only for distance >= 1 m, where all three models are defined.
    """

    frequency: float
    distance: float
    path_loss: float
    scenario: Scenario = OTHER
    environment: Environment = Environment.NLOS
    campaign: str = ""

    def __post_init__(self) -> None:
        if not (math.isfinite(self.frequency) and self.frequency > 0):
            raise DomainError(f"frequency must be > 0 GHz, got {self.frequency}")
        if not (math.isfinite(self.distance) and self.distance >= 1.0):
            raise DomainError(f"distance must be >= 1 m, got {self.distance}")
        if not math.isfinite(self.path_loss):
            raise DomainError(f"path_loss must be finite, got {self.path_loss}")


@dataclass(frozen=True)
class Dataset:
    """Immutable, validated collection of path loss samples.

    ``freq_summary`` lists each unique frequency once, ascending, with its
    sample count; the counts always sum to ``len(dataset)``.
    """

    samples: tuple[PathLossSample, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "samples", tuple(self.samples))

    @classmethod
    def of(cls, samples: Iterable[PathLossSample]) -> "Dataset":
        return cls(tuple(samples))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[PathLossSample]:
        return iter(self.samples)

    @cached_property
    def freq_summary(self) -> tuple[tuple[float, int], ...]:
        counts: dict[float, int] = {}
        for s in self.samples:
            counts[s.frequency] = counts.get(s.frequency, 0) + 1
        return tuple(sorted(counts.items()))

    @property
    def frequencies(self) -> tuple[float, ...]:
        return tuple(f for f, _ in self.freq_summary)

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return (frequency, distance, path_loss) as float64 arrays."""
        f = np.array([s.frequency for s in self.samples], dtype=float)
        d = np.array([s.distance for s in self.samples], dtype=float)
        pl = np.array([s.path_loss for s in self.samples], dtype=float)
        return f, d, pl

    def filter(self, keep) -> "Dataset":
        """New dataset with samples for which ``keep(sample)`` is true, order kept."""
        return Dataset(tuple(s for s in self.samples if keep(s)))


# ---------------------------------------------------------------------------
# Fitted model parameter sets (tagged union via distinct frozen classes).
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ABGParams:
    """Floating-intercept model: 10*alpha*log10(d) + beta + 10*gamma*log10(f)."""

    alpha: float
    beta: float
    gamma: float

    kind = "abg"


@dataclass(frozen=True)
class ABParams:
    """Single-frequency floating-intercept model; frequency slope fixed at 2."""

    alpha: float
    beta: float

    kind = "ab"
    gamma = 2.0


@dataclass(frozen=True)
class CIParams:
    """Close-in free-space reference model with the standard 1 m anchor."""

    n: float

    kind = "ci"
    d0 = 1.0


@dataclass(frozen=True)
class CIOptParams:
    """Close-in model with an optimized reference distance d0 in [0.1, 50] m."""

    n: float
    d0: float

    kind = "ci_opt"

    D0_BOUNDS = (0.1, 50.0)

    def __post_init__(self) -> None:
        lo, hi = self.D0_BOUNDS
        if not (lo <= self.d0 <= hi):
            raise DomainError(f"d0 must lie in [{lo}, {hi}] m, got {self.d0}")


@dataclass(frozen=True)
class CIFParams:
    """Close-in model with a linear frequency-weighted distance slope about f0."""

    n: float
    b: float
    f0: float

    kind = "cif"

    def __post_init__(self) -> None:
        if not (math.isfinite(self.f0) and self.f0 > 0):
            raise DomainError(f"f0 must be > 0 GHz, got {self.f0}")


ModelParams = Union[ABGParams, ABParams, CIParams, CIOptParams, CIFParams]


def params_to_dict(params: ModelParams) -> dict[str, float | str]:
    """Serialize a parameter set to a flat JSON-friendly dict (kind + values)."""
    out: dict[str, float | str] = {"kind": params.kind}
    out.update(param_values(params))
    return out


def params_from_dict(data: Mapping[str, object]) -> ModelParams:
    """Inverse of :func:`params_to_dict`."""
    kind = data["kind"]
    if kind == "abg":
        return ABGParams(float(data["alpha"]), float(data["beta"]), float(data["gamma"]))
    if kind == "ab":
        return ABParams(float(data["alpha"]), float(data["beta"]))
    if kind == "ci":
        return CIParams(float(data["n"]))
    if kind == "ci_opt":
        return CIOptParams(float(data["n"]), float(data["d0"]))
    if kind == "cif":
        return CIFParams(float(data["n"]), float(data["b"]), float(data["f0"]))
    raise DomainError(f"unknown model kind {kind!r}")


def param_values(params: ModelParams) -> dict[str, float]:
    """Fitted parameter values by name (fixed constants included for AB)."""
    if isinstance(params, ABGParams):
        return {"alpha": params.alpha, "beta": params.beta, "gamma": params.gamma}
    if isinstance(params, ABParams):
        return {"alpha": params.alpha, "beta": params.beta, "gamma": params.gamma}
    if isinstance(params, CIParams):
        return {"n": params.n}
    if isinstance(params, CIOptParams):
        return {"n": params.n, "d0": params.d0}
    if isinstance(params, CIFParams):
        return {"n": params.n, "b": params.b, "f0": params.f0}
    raise DomainError(f"unknown parameter type {type(params).__name__}")


# ---------------------------------------------------------------------------
# Forward model evaluation. All functions accept scalars or numpy arrays and
# return mean path loss in dB (shadowing is the synthetic generator's job).
# ---------------------------------------------------------------------------

def fspl(frequency: float | np.ndarray, d0: float | np.ndarray = 1.0):
    """Free-space path loss 20*log10(4*pi*f*d0*1e9/c) in dB.

    Args:
        frequency: carrier frequency in GHz (> 0)
        d0: separation in meters (> 0)
    """
    frequency = np.asarray(frequency, dtype=float)
    d0 = np.asarray(d0, dtype=float)
    if np.any(frequency <= 0):
        raise DomainError("frequency must be > 0 GHz")
    if np.any(d0 <= 0):
        raise DomainError("distance must be > 0 m")
    out = 20.0 * np.log10(4.0 * math.pi * frequency * d0 * 1e9 / SPEED_OF_LIGHT)
    return float(out) if out.ndim == 0 else out


def eval_abg(params: ABGParams | ABParams, frequency, distance):
    """Mean path loss of the floating-intercept (ABG/AB) model, valid for d >= 1 m."""
    frequency = np.asarray(frequency, dtype=float)
    distance = np.asarray(distance, dtype=float)
    if np.any(frequency <= 0):
        raise DomainError("frequency must be > 0 GHz")
    if np.any(distance < 1.0):
        raise DomainError("ABG model is defined for d >= 1 m")
    out = (10.0 * params.alpha * np.log10(distance) + params.beta
           + 10.0 * params.gamma * np.log10(frequency))
    return float(out) if out.ndim == 0 else out


def eval_ci(params: CIParams | CIOptParams, frequency, distance):
    """Mean path loss of the close-in model: FSPL(f, d0) + 10*n*log10(d/d0).

    Valid for d >= d0; at d = d0 the loss equals free space exactly, which is
    the model's physical anchor.
    """
    frequency = np.asarray(frequency, dtype=float)
    distance = np.asarray(distance, dtype=float)
    d0 = params.d0
    if np.any(distance < d0):
        raise DomainError(f"CI model with d0={d0} m is defined for d >= d0")
    out = fspl(frequency, d0) + 10.0 * params.n * np.log10(distance / d0)
    return float(out) if np.ndim(out) == 0 else out


def eval_cif(params: CIFParams, frequency, distance):
    """Mean path loss of the frequency-weighted close-in model (1 m anchor).

    The distance slope is n*(1 + b*(f - f0)/f0); it reduces to the CI model
    when b = 0 or when f = f0.
    """
    frequency = np.asarray(frequency, dtype=float)
    distance = np.asarray(distance, dtype=float)
    if np.any(frequency <= 0):
        raise DomainError("frequency must be > 0 GHz")
    if np.any(distance < 1.0):
        raise DomainError("CIF model is defined for d >= 1 m")
    slope = 10.0 * params.n * (1.0 + params.b * (frequency - params.f0) / params.f0)
    out = fspl(frequency, 1.0) + slope * np.log10(distance)
    return float(out) if np.ndim(out) == 0 else out


def evaluate(params: ModelParams, frequency, distance):
    """Evaluate any fitted parameter set at (frequency GHz, distance m)."""
    if isinstance(params, (ABGParams, ABParams)):
        return eval_abg(params, frequency, distance)
    if isinstance(params, (CIParams, CIOptParams)):
        return eval_ci(params, frequency, distance)
    if isinstance(params, CIFParams):
        return eval_cif(params, frequency, distance)
    raise DomainError(f"unknown parameter type {type(params).__name__}")


def weighted_mean_frequency(ds: Dataset) -> int:
    """Sample-count-weighted mean frequency, rounded to the nearest integer GHz.

    Ties round half away from zero (14.5 -> 15). Raises on an empty dataset.
    """
    if len(ds) == 0:
        raise DomainError("weighted mean frequency of an empty dataset is undefined")
    total = sum(count for _, count in ds.freq_summary)
    mean = sum(f * count for f, count in ds.freq_summary) / total
    return int(math.floor(mean + 0.5))


# ---------------------------------------------------------------------------
# Fit result container.
# ---------------------------------------------------------------------------

def rms(values: Iterable[float]) -> float:
    """Root mean square; the shadow-fading sigma is the RMS of residuals."""
    arr = np.asarray(tuple(values), dtype=float)
    if arr.size == 0:
        raise DomainError("RMS of an empty sequence is undefined")
    return float(np.sqrt(np.mean(arr * arr)))


@dataclass(frozen=True)
class FitReport:
    """A fitted parameter set with its residuals and shadow-fading sigma.

    ``sigma`` is the RMS of the residuals about the fitted mean model (no
    mean removal), so it doubles as the minimized fitting error.
    """

    params: ModelParams
    sigma: float
    n_points: int
    residuals: tuple[float, ...]
    preprocess_settings: Mapping[str, object] | None = None
    flags: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.n_points != len(self.residuals):
            raise DomainError("n_points must equal the number of residuals")
        if self.sigma != rms(self.residuals):
            raise DomainError("sigma must be the RMS of the residuals")

    @classmethod
    def from_residuals(cls, params: ModelParams, residuals,
                       preprocess_settings: Mapping[str, object] | None = None,
                       flags: tuple[str, ...] = ()) -> "FitReport":
        res = tuple(float(r) for r in np.asarray(residuals, dtype=float))
        return cls(params=params, sigma=rms(res), n_points=len(res),
                   residuals=res, preprocess_settings=preprocess_settings,
                   flags=flags)
