# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest
from models.beta_map import BetaMap
from models.boundary_datum import BoundaryDatum
from models.smooth_bump import SmoothBump
from models.solve_config import SolveConfig
from services.convergence_service import (
    bar_omega_builder, cauchy_trend, check_eps_list, default_h_map, energy_scan, equi_modulus_check, fit_loglog,
    gradient_convergence_in_measure, limit_passage_terms, near_jump_energy, resolvable_eps, run_sweep, truncate
)
from utils.config_manager import ConfigError, thread_cap
from utils.constants import THREADS_ENV_VAR
from utils.enums import CheckStatus


@pytest.fixture
def inactive_sweep(make_params, make_interval, heat_datum):
    """a = 10 keeps the jump out of range, so every eps yields the same solution."""
    D = make_interval()
    P = make_params(a=10.0)
    return run_sweep(D, P, heat_datum, [0.4, 0.2, 0.1], SolveConfig(), threads=2)


class TestEpsList:
    def test_resolvable_width(self, make_interval):
        assert resolvable_eps(make_interval(), BetaMap()) == pytest.approx(1.0 / 16.0)
        assert resolvable_eps(make_interval(), BetaMap(0.5)) == pytest.approx(1.5 / 16.0)

    def test_rejections(self, make_interval):
        D = make_interval()
        with pytest.raises(ValueError, match="must not be empty"):
            check_eps_list([], D, BetaMap())
        with pytest.raises(ValueError, match="strictly decreasing"):
            check_eps_list([0.1, 0.2], D, BetaMap())
        with pytest.raises(ValueError, match="smallest admissible eps"):
            check_eps_list([0.2, 0.01], D, BetaMap())
        assert check_eps_list([0.2, 0.1], D, BetaMap()) == [0.2, 0.1]


class TestSweep:
    def test_inactive_jump_gives_identical_solutions(self, inactive_sweep):
        assert len(inactive_sweep) == 3
        np.testing.assert_array_equal(inactive_sweep.distances, np.zeros((3, 3)))
        assert all(r.passed for r in inactive_sweep.diagnostics["max_principle"])
        assert cauchy_trend(inactive_sweep).status == CheckStatus.PASS

    def test_thread_count_does_not_change_results(self, inactive_sweep, make_params, make_interval, heat_datum):
        serial = run_sweep(make_interval(), make_params(a=10.0), heat_datum, [0.4, 0.2, 0.1], SolveConfig(),
                           threads=1)
        for a, b in zip(serial.solutions, inactive_sweep.solutions):
            np.testing.assert_array_equal(a.values, b.values)

    def test_equi_modulus_with_frozen_constant(self, inactive_sweep, make_params):
        P = make_params(a=10.0)
        omega_bar = bar_omega_builder(lambda s: s, inactive_sweep.datum)
        report = equi_modulus_check(inactive_sweep, omega_bar, default_h_map(P, P.alpha_mp), pairs=500, seed=3)
        assert report.status == CheckStatus.PASS
        assert report.fitted_constant == 0.0
        assert all(row["violations"] == 0 for row in report.detail["rows"])

    def test_gradient_measures_vanish(self, inactive_sweep):
        result = gradient_convergence_in_measure(inactive_sweep, 0.5, 0.1)
        assert [row["E"] for row in result["pairs"]] == [0.0, 0.0]
        assert result["report"].status == CheckStatus.PASS
        with pytest.raises(ValueError, match="must exceed the largest eps"):
            gradient_convergence_in_measure(inactive_sweep, 0.3, 0.1)

    def test_limit_passage_without_near_jump_flux(self, inactive_sweep):
        phi = SmoothBump([0.5], 0.25)
        D = inactive_sweep.domain
        result = limit_passage_terms(inactive_sweep, 0.5, phi, [0.0, D.T], phi.support_box, sigmas=[0.5, 0.25])
        assert set(result["terms"]) == {"boundary", "time", "flux_far", "flux_near"}
        assert result["terms"]["flux_near"] == 0.0
        assert result["report"].status == CheckStatus.UNDECIDED


class TestThreadCap:
    def test_default_is_serial(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV_VAR, raising=False)
        assert thread_cap() == 1

    def test_reads_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV_VAR, "3")
        assert thread_cap() == 3

    @pytest.mark.parametrize("raw", ["0", "-2", "many"])
    def test_invalid_values(self, monkeypatch, raw):
        monkeypatch.setenv(THREADS_ENV_VAR, raw)
        with pytest.raises(ConfigError, match=THREADS_ENV_VAR):
            thread_cap()


def test_truncate_clips_both_sides():
    np.testing.assert_array_equal(truncate(np.array([-3.0, 0.5, 2.0]), 1.0), [-1.0, 0.5, 1.0])
    with pytest.raises(ValueError):
        truncate(1.0, 0.0)


def test_fit_loglog_recovers_power():
    x = np.array([0.2, 0.1, 0.05, 0.025])
    fit = fit_loglog(x, 3.0 * x ** 2)
    assert fit["slope"] == pytest.approx(2.0)
    assert fit["r2"] == pytest.approx(1.0)
    assert fit_loglog([0.1, 0.2], [0.0, 1.0])["slope"] is None


def test_bar_omega_shape():
    shape = bar_omega_builder(lambda s: s, BoundaryDatum("constant", value=0.0))
    np.testing.assert_allclose(shape([0.0, 0.25]), [0.0, 2.0])


def test_h_map_falls_back_to_one_over_tau(make_params):
    P = make_params()
    h_map = default_h_map(P, P.alpha_mp)
    assert h_map(5.0) == pytest.approx(1.0 / P.tau)
    assert 0.0 < h_map(1e-6) < h_map(1e-3) < 1.0 / P.tau


class TestNearJumpEnergy:
    @pytest.fixture
    def linear(self, make_interval, grid_function):
        D = make_interval(h=1.0 / 128.0)
        return grid_function(D, lambda x, t: x[..., 0] - 0.5)

    def test_energy_grows_with_sigma(self, linear):
        phi = SmoothBump([0.5], 4.0, time_profile="constant")
        energies = [near_jump_energy(linear, s, phi, 0.0, 2.0) for s in (0.05, 0.1, 0.2)]
        assert energies[0] < energies[1] < energies[2]
        assert near_jump_energy(linear, 0.1, phi, 5.0, 2.0) == 0.0

    def test_scan_slope_is_linear_in_sigma(self, linear):
        phi = SmoothBump([0.5], 4.0, time_profile="constant")
        result = energy_scan(linear, [0.2, 0.1, 0.05, 0.025], phi, 0.0, 2.0)
        assert result["report"].status == CheckStatus.PASS
        assert 0.8 <= result["slope"] <= 1.2
        assert [row["sigma"] for row in result["rows"]] == [0.2, 0.1, 0.05, 0.025]
