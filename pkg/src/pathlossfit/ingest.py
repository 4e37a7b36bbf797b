"""CSV ingestion/serialization and a seeded synthetic campaign generator.

CSV schema (UTF-8, comma separated, header required)::

    frequency_ghz,distance_m,path_loss_db,scenario,environment,campaign

with scenario in {UMa, UMiSC, InHOffice, InHSM, Other:<label>} and
environment in {LOS, NLOS}. Extra columns are ignored with a warning.

The generator is reproducible across implementations: it draws uniforms from
a counter-based splitmix64 stream and maps them through the inverse normal
CDF (see :func:`counter_uniform` and :func:`generate`).
"""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist

import numpy as np

from .domain import (
    Dataset,
    DomainError,
    Environment,
    ModelParams,
    OTHER,
    PathLossSample,
    Scenario,
    evaluate,
    params_from_dict,
    params_to_dict,
)

CSV_COLUMNS = ("frequency_ghz", "distance_m", "path_loss_db",
               "scenario", "environment", "campaign")

DISTANCE_LAWS = ("log-uniform", "uniform")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STD_NORMAL = NormalDist()


class IngestError(ValueError):
    """A measurement file or synthetic spec could not be read."""


# ---------------------------------------------------------------------------
# CSV reading / writing
# ---------------------------------------------------------------------------

def load_csv(path: str | Path) -> Dataset:
    """Parse a measurement CSV into a validated dataset.

    Any row violating the sample invariants (f > 0 GHz, d >= 1 m, finite
    loss) aborts the load with a diagnostic naming the file line.
    """
    path = Path(path)
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{path}: empty file (missing header)") from None
        header = [h.strip() for h in header]
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise IngestError(f"{path}: missing column(s) {', '.join(missing)}")
        extra = [c for c in header if c not in CSV_COLUMNS]
        if extra:
            warnings.warn(f"{path}: ignoring extra column(s) {', '.join(extra)}")
        index = {c: header.index(c) for c in CSV_COLUMNS}

        samples = []
        for line_no, row in enumerate(reader, start=2):
            if len(row) < len(header):
                raise IngestError(f"{path} line {line_no}: expected "
                                  f"{len(header)} columns, got {len(row)}")
            samples.append(_parse_row(path, line_no, row, index))
    return Dataset(tuple(samples))


def _parse_row(path: Path, line_no: int, row: list[str], index) -> PathLossSample:
    def number(column: str) -> float:
        text = row[index[column]].strip()
        try:
            return float(text)
        except ValueError:
            raise IngestError(
                f"{path} line {line_no}: unparsable {column} value {text!r}") from None

    frequency = number("frequency_ghz")
    distance = number("distance_m")
    path_loss = number("path_loss_db")
    try:
        scenario = Scenario.parse(row[index["scenario"]].strip())
        environment = Environment(row[index["environment"]].strip())
        return PathLossSample(frequency=frequency, distance=distance,
                              path_loss=path_loss, scenario=scenario,
                              environment=environment,
                              campaign=row[index["campaign"]].strip())
    except (DomainError, ValueError) as exc:
        raise IngestError(f"{path} line {line_no}: {exc}") from None


def write_csv(ds: Dataset, path: str | Path) -> None:
    """Write the canonical CSV form: shortest round-trip float text, LF endings."""
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for s in ds:
            writer.writerow([repr(s.frequency), repr(s.distance),
                             repr(s.path_loss), str(s.scenario),
                             s.environment.value, s.campaign])


# ---------------------------------------------------------------------------
# Counter-based uniform stream (splitmix64) and synthetic generation
# ---------------------------------------------------------------------------

def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def counter_uniform(seed: int, index: int) -> float:
    """The index-th uniform of the seeded stream, strictly inside (0, 1).

    Word ``index`` is the splitmix64 finalizer applied to
    ``(seed + (index+1) * 0x9E3779B97F4A7C15) mod 2^64``; the top 53 bits,
    offset by half a ulp, give the uniform. Pure 64-bit integer arithmetic,
    so any implementation reproduces the stream bit-for-bit.
    """
    word = _mix64((seed + (index + 1) * _GOLDEN) & _MASK64)
    return ((word >> 11) + 0.5) * 2.0 ** -53


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for a reproducible synthetic measurement campaign.

    ``frequencies`` holds (frequency GHz, sample count) pairs; distances are
    drawn per ``distance_law`` over ``distance_range``; shadowing is IID
    zero-mean Gaussian with standard deviation ``sigma`` dB.
    """

    truth: ModelParams
    frequencies: tuple[tuple[float, int], ...]
    distance_range: tuple[float, float]
    sigma: float
    seed: int
    distance_law: str = "log-uniform"
    scenario: Scenario = OTHER
    environment: Environment = Environment.NLOS
    campaign: str = "synthetic"

    def __post_init__(self) -> None:
        object.__setattr__(self, "frequencies",
                           tuple((float(f), int(c)) for f, c in self.frequencies))
        object.__setattr__(self, "distance_range",
                           tuple(float(v) for v in self.distance_range))
        if not self.frequencies:
            raise IngestError("synthetic spec needs at least one frequency")
        for f, count in self.frequencies:
            if f <= 0:
                raise IngestError(f"synthetic frequency must be > 0 GHz, got {f}")
            if count <= 0:
                raise IngestError(f"synthetic sample count must be > 0, got {count}")
        d_lo, d_hi = self.distance_range
        if not (1.0 <= d_lo <= d_hi):
            raise IngestError(f"distance_range must satisfy 1 <= lo <= hi, "
                              f"got {self.distance_range}")
        if self.sigma < 0:
            raise IngestError(f"sigma must be >= 0 dB, got {self.sigma}")
        if not (0 <= self.seed < 2 ** 64):
            raise IngestError("seed must be an unsigned 64-bit integer")
        if self.distance_law not in DISTANCE_LAWS:
            raise IngestError(f"distance_law must be one of {DISTANCE_LAWS}")


def generate(spec: SyntheticSpec) -> Dataset:
    """Draw the synthetic campaign described by ``spec``, deterministically.

    Sample i (counted across the frequency entries in order) uses stream
    uniforms 2i for its distance and 2i+1 for its shadowing draw; shadowing
    is sigma times the inverse standard normal CDF of the uniform.
    """
    d_lo, d_hi = spec.distance_range
    samples: list[PathLossSample] = []
    i = 0
    for freq, count in spec.frequencies:
        u_dist = np.array([counter_uniform(spec.seed, 2 * (i + j)) for j in range(count)])
        u_shad = [counter_uniform(spec.seed, 2 * (i + j) + 1) for j in range(count)]
        i += count
        if spec.distance_law == "log-uniform":
            distances = d_lo * (d_hi / d_lo) ** u_dist
        else:
            distances = d_lo + (d_hi - d_lo) * u_dist
        noise = spec.sigma * np.array([_STD_NORMAL.inv_cdf(u) for u in u_shad])
        losses = np.asarray(evaluate(spec.truth, freq, distances), dtype=float) + noise
        for dist, loss in zip(distances, losses):
            samples.append(PathLossSample(frequency=freq, distance=float(dist),
                                          path_loss=float(loss),
                                          scenario=spec.scenario,
                                          environment=spec.environment,
                                          campaign=spec.campaign))
    return Dataset(tuple(samples))


# ---------------------------------------------------------------------------
# Synthetic spec JSON form (used by the CLI)
# ---------------------------------------------------------------------------

def spec_to_dict(spec: SyntheticSpec) -> dict:
    return {
        "truth": params_to_dict(spec.truth),
        "frequencies": [{"frequency_ghz": f, "count": c} for f, c in spec.frequencies],
        "distance_range": list(spec.distance_range),
        "sigma": spec.sigma,
        "seed": spec.seed,
        "distance_law": spec.distance_law,
        "scenario": str(spec.scenario),
        "environment": spec.environment.value,
        "campaign": spec.campaign,
    }


def spec_from_dict(data: dict) -> SyntheticSpec:
    try:
        return SyntheticSpec(
            truth=params_from_dict(data["truth"]),
            frequencies=tuple((entry["frequency_ghz"], entry["count"])
                              for entry in data["frequencies"]),
            distance_range=tuple(data["distance_range"]),
            sigma=float(data["sigma"]),
            seed=int(data["seed"]),
            distance_law=data.get("distance_law", "log-uniform"),
            scenario=Scenario.parse(data.get("scenario", "Other")),
            environment=Environment(data.get("environment", "NLOS")),
            campaign=data.get("campaign", "synthetic"),
        )
    except (KeyError, TypeError) as exc:
        raise IngestError(f"bad synthetic spec: {exc}") from exc


def load_spec(path: str | Path) -> SyntheticSpec:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: invalid JSON ({exc})") from exc
    return spec_from_dict(data)
