"""Brute-force and generic-solver fits used to cross-check the closed forms.

Nothing here reuses the closed-form expressions from :mod:`.fitters`: the
grid searches scan the objective directly and the linear fits hand the
normal-equation systems to ``numpy.linalg``. Intended for tests and for
auditing a fit on a small dataset (N up to a few hundred).
"""

from __future__ import annotations

import numpy as np

from .domain import (
    ABGParams,
    ABParams,
    CIFParams,
    CIOptParams,
    CIParams,
    Dataset,
    FitReport,
    weighted_mean_frequency,
)
from .fitters import (
    DegenerateDesignError,
    FitError,
    RegressionDesign,
    SingularDesignError,
)

_CHUNK = 20_000  # grid rows evaluated per block to bound memory


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step <= 0 or hi < lo:
        raise FitError(f"bad grid ({lo}, {hi}, {step})")
    # tiny nudge so e.g. (50 - 0.1) / 0.01 includes the upper endpoint
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def _solve(matrix: np.ndarray, rhs: np.ndarray, context: str) -> np.ndarray:
    try:
        return np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularDesignError(f"{context}: {exc}") from exc


def oracle_fit(ds: Dataset, kind: str, *,
               n_grid: tuple[float, float, float] = (0.0, 10.0, 1e-4),
               d0_grid: tuple[float, float, float] = (0.1, 50.0, 0.01),
               f0: float | str = "auto") -> FitReport:
    """Minimum-sigma fit by dense grid search (ci, ci_opt) or generic linear
    solve of the normal equations (abg, ab, cif)."""
    design = RegressionDesign.from_dataset(ds)
    if kind == "ci":
        return _oracle_ci_grid(design, n_grid)
    if kind == "ci_opt":
        return _oracle_ci_opt_grid(design, d0_grid)
    if kind == "abg":
        return _oracle_abg(design)
    if kind == "ab":
        return _oracle_ab(design)
    if kind == "cif":
        f0_value = float(weighted_mean_frequency(ds)) if f0 == "auto" else float(f0)
        return _oracle_cif(design, f0_value)
    raise FitError(f"unknown oracle kind {kind!r}")


def _oracle_ci_grid(design: RegressionDesign, n_grid) -> FitReport:
    candidates = _grid(*n_grid)
    if candidates.size == 0:
        raise FitError("empty n grid")
    best_n, best_sigma = 0.0, np.inf
    for start in range(0, candidates.size, _CHUNK):
        block = candidates[start:start + _CHUNK]
        res = design.A[None, :] - block[:, None] * design.D[None, :]
        sigmas = np.sqrt(np.mean(res * res, axis=1))
        i = int(np.argmin(sigmas))
        if sigmas[i] < best_sigma:
            best_sigma, best_n = float(sigmas[i]), float(block[i])
    return FitReport.from_residuals(CIParams(best_n), design.A - best_n * design.D)


def _oracle_ci_opt_grid(design: RegressionDesign, d0_grid) -> FitReport:
    if np.unique(design.D).size < 2:
        raise DegenerateDesignError("ci_opt oracle needs two distinct distances")
    d0s = _grid(*d0_grid)
    if d0s.size == 0:
        raise FitError("empty d0 grid")
    best = (np.inf, 0.0, 1.0)  # sigma, n, d0
    for start in range(0, d0s.size, _CHUNK):
        block = d0s[start:start + _CHUNK]
        b10 = 10.0 * np.log10(block)[:, None]
        d_shift = design.D[None, :] - b10
        a_shift = design.A[None, :] - 2.0 * b10
        den = np.sum(d_shift * d_shift, axis=1)
        n = np.sum(d_shift * a_shift, axis=1) / den
        res = a_shift - n[:, None] * d_shift
        sigmas = np.sqrt(np.mean(res * res, axis=1))
        i = int(np.argmin(sigmas))
        if sigmas[i] < best[0]:
            best = (float(sigmas[i]), float(n[i]), float(block[i]))
    _, n_best, d0_best = best
    b10 = 10.0 * np.log10(d0_best)
    residuals = (design.A - 2.0 * b10) - n_best * (design.D - b10)
    return FitReport.from_residuals(CIOptParams(n_best, d0_best), residuals)


def _oracle_abg(design: RegressionDesign) -> FitReport:
    d, f_log, b = design.D, design.F, design.B
    n_pts = len(design)
    matrix = np.array([
        [np.dot(d, d), d.sum(), np.dot(d, f_log)],
        [d.sum(), float(n_pts), f_log.sum()],
        [np.dot(d, f_log), f_log.sum(), np.dot(f_log, f_log)],
    ])
    rhs = np.array([np.dot(d, b), b.sum(), np.dot(f_log, b)])
    alpha, beta, gamma = (float(v) for v in _solve(matrix, rhs, "abg oracle"))
    residuals = b - alpha * d - beta - gamma * f_log
    return FitReport.from_residuals(ABGParams(alpha, beta, gamma), residuals)


def _oracle_ab(design: RegressionDesign) -> FitReport:
    d = design.D
    y = design.B - 2.0 * design.F
    n_pts = len(design)
    matrix = np.array([[np.dot(d, d), d.sum()], [d.sum(), float(n_pts)]])
    rhs = np.array([np.dot(d, y), y.sum()])
    alpha, beta = (float(v) for v in _solve(matrix, rhs, "ab oracle"))
    residuals = y - alpha * d - beta
    return FitReport.from_residuals(ABParams(alpha, beta), residuals)


def _oracle_cif(design: RegressionDesign, f0: float) -> FitReport:
    d, freq = design.D, design.f
    df = d * freq
    matrix = np.array([[np.dot(d, d), np.dot(d, df)], [np.dot(d, df), np.dot(df, df)]])
    rhs = np.array([np.dot(d, design.A), np.dot(df, design.A)])
    a, g = (float(v) for v in _solve(matrix, rhs, "cif oracle"))
    n = a + g * f0
    if n == 0.0:
        raise FitError("cif oracle: fitted n is zero, b undefined")
    residuals = design.A - d * (a + g * freq)
    return FitReport.from_residuals(CIFParams(n, g * f0 / n, f0), residuals)


def ci_slope_lstsq(ds: Dataset) -> float:
    """CI slope by SVD least squares (numpy lstsq), independent of the closed form."""
    design = RegressionDesign.from_dataset(ds)
    solution, *_ = np.linalg.lstsq(design.D[:, None], design.A, rcond=None)
    return float(solution[0])
