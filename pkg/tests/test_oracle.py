"""Grid-search and generic-solver oracle behavior (bracketing, agreement)."""

import pytest

from pathlossfit import (
    CIParams,
    CIFParams,
    SingularDesignError,
    SyntheticSpec,
    fit_ci,
    fit_ci_opt,
    generate,
    prediction_sigma,
)
from pathlossfit.fitters import FitError
from pathlossfit.oracle import ci_slope_lstsq, oracle_fit
from conftest import make_dataset


@pytest.fixture(scope="module")
def noisy_ds():
    spec = SyntheticSpec(truth=CIParams(3.1), sigma=6.0, seed=2024,
                         frequencies=((2.0, 20), (28.0, 20)),
                         distance_range=(10.0, 500.0))
    return generate(spec)


class TestCiGrid:
    def test_brackets_the_closed_form(self, noisy_ds):
        exact = fit_ci(noisy_ds)
        grid = oracle_fit(noisy_ds, "ci", n_grid=(0.0, 10.0, 1e-4))
        # the grid minimum can never beat the true minimum, and the nearest
        # grid node is within half a step of it
        assert grid.sigma >= exact.sigma - 1e-12
        assert abs(grid.params.n - exact.params.n) <= 1e-4
        nearest = round(exact.params.n / 1e-4) * 1e-4
        assert grid.sigma <= prediction_sigma(CIParams(nearest), noisy_ds) + 1e-12

    def test_lstsq_slope_agrees_with_closed_form(self, noisy_ds):
        assert ci_slope_lstsq(noisy_ds) == pytest.approx(
            fit_ci(noisy_ds).params.n, abs=1e-12)


class TestCiOptGrid:
    def test_agrees_with_joint_closed_form(self, noisy_ds):
        grid = oracle_fit(noisy_ds, "ci_opt")
        exact = fit_ci_opt(noisy_ds)
        assert exact.sigma <= grid.sigma + 1e-9
        assert abs(grid.params.d0 - exact.params.d0) <= 0.01 + 1e-9

    def test_grid_endpoints_included(self):
        from pathlossfit.oracle import _grid
        grid = _grid(0.1, 50.0, 0.01)
        assert grid[0] == pytest.approx(0.1)
        assert grid[-1] == pytest.approx(50.0)
        assert len(grid) == 4991


class TestGenericSolvers:
    def test_singular_system_raises(self):
        rows = [(float(v), float(v), 100.0 + v) for v in (10.0, 20.0, 50.0, 100.0)]
        with pytest.raises(SingularDesignError):
            oracle_fit(make_dataset(rows), "abg")

    def test_cif_oracle_respects_given_f0(self, noisy_ds):
        report = oracle_fit(noisy_ds, "cif", f0=15.0)
        assert isinstance(report.params, CIFParams)
        assert report.params.f0 == 15.0

    def test_bad_grid_rejected(self, noisy_ds):
        with pytest.raises(FitError):
            oracle_fit(noisy_ds, "ci", n_grid=(0.0, 10.0, -1.0))
        with pytest.raises(FitError):
            oracle_fit(noisy_ds, "ci", n_grid=(10.0, 0.0, 0.1))

    def test_unknown_kind_rejected(self, noisy_ds):
        with pytest.raises(FitError):
            oracle_fit(noisy_ds, "nope")
