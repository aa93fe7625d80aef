# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest
from models.boundary_datum import BoundaryDatum
from models.cylinder import Cutoff, Cylinder, ShrinkFamily
from models.exponent_pack import ExponentPack
from models.grid_domain import GridDomain
from models.inequality_report import InequalityReport
from models.solve_config import SolveConfig
from services.analysis_service import (
    caccioppoli_check, classify_alternative, datum_values, density_estimates, initial_reduction_check,
    lateral_reduction_check, log_lemma_check, oscillation_cascade, quantified_modulus_check, refinement_stability,
    sobolev_check
)
from services.geometry_service import lateral_cylinders, rescale_solution
from services.iteration_service import build_sequences
from services.solver_service import solve_regularized
from utils.enums import AlternativeTag, CheckStatus, FamilyKind


@pytest.fixture
def ramp(make_interval, grid_function):
    """(t/T)(1 - 4(x - 1/2)^2): zero initially, a bump that grows in time."""
    D = make_interval()
    return grid_function(D, lambda x, t: (t / D.T) * (1.0 - 4.0 * (x[..., 0] - 0.5) ** 2))


@pytest.fixture
def centred_cutoff(make_interval):
    D = make_interval()
    return Cutoff(ShrinkFamily(FamilyKind.LATERAL_3, [0.5], D.T, 0.5, D.T, 2.0), 0)


class TestClassify:
    @pytest.fixture
    def setting(self, make_interval, grid_function):
        D = make_interval()
        w = grid_function(D, lambda x, t: x[..., 0] - 0.5)
        Q3 = Cylinder.backward([0.9], D.T, 0.5, D.T)
        return w, Q3

    def test_jump_out_of_range(self, setting, make_params):
        w, Q3 = setting
        tag, witness = classify_alternative(w, Q3, make_params(a=2.0), 1.0, tilde=0.1)
        assert tag == AlternativeTag.NO_JUMP
        assert witness["mu_plus"] == pytest.approx(0.5)
        assert witness["mu_minus"] == pytest.approx(13.0 / 32.0 - 0.5)

    def test_jump_far_below_supremum(self, setting, make_params):
        w, Q3 = setting
        tag, _witness = classify_alternative(w, Q3, make_params(a=0.0), 1.0, tilde=0.1)
        assert tag == AlternativeTag.ALT1

    def test_jump_near_supremum(self, setting, make_params):
        w, Q3 = setting
        P = make_params(a=0.45, eps=0.01, eps1=0.01)
        tag, witness = classify_alternative(w, Q3, P, 1.0, tilde=0.1)
        assert tag == AlternativeTag.ALT2_1
        assert witness["jump_average"] > witness["threshold"]
        assert witness["admissible"]
        small, _witness = classify_alternative(w, Q3, P.with_overrides(eps1=0.5), 1.0, tilde=0.1)
        assert small == AlternativeTag.ALT2_2

    def test_oscillation_hypothesis(self, setting, make_params):
        w, Q3 = setting
        with pytest.raises(ValueError, match="oscillation hypothesis"):
            classify_alternative(w, Q3, make_params(), 0.1, tilde=0.1)

    @pytest.mark.parametrize("a, eps1", [(2.0, 0.01), (0.0, 0.01), (0.45, 0.01), (0.45, 0.5)])
    def test_tag_is_invariant_under_shift(self, setting, make_params, grid_function, a, eps1):
        w, Q3 = setting
        shifted = grid_function(w.domain, lambda x, t: x[..., 0] - 0.5 + 0.3)
        P = make_params(a=a, eps=0.01, eps1=eps1)
        tag, witness = classify_alternative(w, Q3, P, 1.0, tilde=0.1)
        moved, moved_witness = classify_alternative(shifted, Q3, P.with_overrides(a=a + 0.3), 1.0, tilde=0.1)
        assert moved == tag
        assert moved_witness["mu_plus"] == pytest.approx(witness["mu_plus"] + 0.3)
        assert moved_witness["b"] == pytest.approx(witness["b"] + 0.3)
        if "jump_average" in witness:
            assert moved_witness["jump_average"] == pytest.approx(witness["jump_average"], abs=1e-12)

    @pytest.mark.parametrize("a, expected", [(2.0, AlternativeTag.NO_JUMP), (0.0, AlternativeTag.ALT1)])
    def test_tag_is_invariant_under_rescaling(self, setting, make_params, grid_function, a, expected):
        w, Q3 = setting
        lam = 4.0
        scaled = grid_function(w.domain, lambda x, t: lam * (x[..., 0] - 0.5))
        tag, witness = classify_alternative(w, Q3, make_params(a=a, eps=0.01), 1.0, tilde=0.1)
        big, big_witness = classify_alternative(scaled, Q3, make_params(a=lam * a, eps=lam * 0.01), lam,
                                                tilde=lam * 0.1)
        assert tag == big == expected
        assert big_witness["mu_plus"] == pytest.approx(lam * witness["mu_plus"])
        assert big_witness["admissible"] == witness["admissible"]


def test_caccioppoli_on_growing_bump(ramp, centred_cutoff, make_params):
    P = make_params(a=0.5, eps=0.05)
    report = caccioppoli_check(ramp, centred_cutoff.cylinder, 0.25, centred_cutoff, P.heaviside(), p=2.0)
    assert report.status == CheckStatus.PASS
    assert report.rhs_terms["gradient"] > 0.0
    assert report.detail["energy"] > 0.0


def test_caccioppoli_rejects_level_below_datum(ramp, centred_cutoff, make_params):
    D = ramp.domain
    Q = Cylinder.backward([0.5], D.T, 0.25, D.T)
    with pytest.raises(ValueError, match="level below boundary datum"):
        caccioppoli_check(ramp, Q, -0.1, centred_cutoff, make_params().heaviside())


def test_sobolev_reports_sup_norm_in_one_dimension(ramp, centred_cutoff):
    report = sobolev_check(ramp, centred_cutoff, centred_cutoff.cylinder, ExponentPack(2.0, 1, 3.0))
    assert report.status == CheckStatus.PASS
    assert report.detail["kappa"] == "inf"
    assert "sup_norm_p" in report.detail


class TestLogLemma:
    def test_rising_profile(self, make_interval, grid_function):
        D = make_interval()
        w = grid_function(D, lambda x, t: -0.5 + (t / D.T) * (1.0 - x[..., 0]))
        Q = Cylinder([0.0], 0.0, 0.5, 0.0, D.T, label="initial")
        report = log_lemma_check(w, Q, [0.25, 0.0625], 1.0)
        assert report.status == CheckStatus.PASS
        assert [row["theta"] for row in report.detail["thetas"]] == [0.25, 0.0625]
        assert 0.0 < report.lhs <= 1.0

    def test_initial_gap_required(self, make_interval, grid_function):
        D = make_interval()
        w = grid_function(D, lambda x, t: np.zeros(x.shape[:-1]))
        Q = Cylinder([0.0], 0.0, 0.5, 0.0, D.T)
        with pytest.raises(ValueError, match="initial gap"):
            log_lemma_check(w, Q, [0.25], 1.0)


class TestReductions:
    def test_lateral_reduction(self, make_interval, grid_function, make_params):
        D = make_interval()
        w = grid_function(D, lambda x, t: x[..., 0] - 0.5)
        P = make_params(eps1=0.25, eps2=0.5)
        report = lateral_reduction_check(w, [0.5], D.T, 0.5, 1.0, P)
        assert report.status == CheckStatus.PASS
        assert report.lhs == pytest.approx(0.0625)
        assert report.rhs_terms["osc_Q3"] == pytest.approx(1.0)

    def test_initial_reduction(self, make_interval, grid_function, make_params):
        D = make_interval()
        w = grid_function(D, lambda x, t: x[..., 0] ** 2)
        report = initial_reduction_check(w, [0.0], 1.0, 1.0, make_params())
        assert report.status == CheckStatus.PASS
        assert report.detail["measured_eps4"] == pytest.approx(0.9375)
        assert report.detail["T4"] == pytest.approx(D.T)


def test_density_estimates_follow_the_tag(make_interval, grid_function, make_params):
    D = make_interval()
    w = grid_function(D, lambda x, t: x[..., 0] - 0.5)
    P = make_params(eps1=0.25, eps2=0.5)
    cylinders = lateral_cylinders([0.5], D.T, 0.5, 1.0, P)
    reports = density_estimates(w, cylinders, P, 1.0, tag=AlternativeTag.ALT1)
    assert [r.name for r in reports] == [
        "density_first_alternative", "density_second_alternative", "density_small_jump_mass"]
    assert reports[1].status == CheckStatus.UNDECIDED
    assert reports[2].detail["reason"] == "alternative mismatch"
    with pytest.raises(ValueError):
        density_estimates(w, cylinders, P, 1.0, tag=AlternativeTag.NO_JUMP)


def test_cascade_on_constant_state_is_undecided(make_interval, grid_function, make_params):
    D = make_interval()
    w = grid_function(D, lambda x, t: np.full(x.shape[:-1], 0.25))
    P = make_params()
    g = BoundaryDatum("constant", value=0.25)
    result = oscillation_cascade(w, [0.0], D.T, P, P.exponents(), g, 5)
    assert result["rows"] == []
    assert result["lambda"] == 1.0
    assert result["report"].status == CheckStatus.UNDECIDED
    assert result["modulus"].status == CheckStatus.PASS
    assert result["modulus"].fitted_constant == 0.0


def test_datum_on_rescaled_solution_reads_original_times(make_interval, grid_function, make_params):
    D = make_interval()
    P = make_params(p=3.0)
    g = BoundaryDatum("ramp", p=3.0, cold=-2.0, hot=2.0, t_ramp=D.T)
    w = grid_function(D, lambda x, t: g.evaluate(x, t))
    v, _jump = rescale_solution(w, 2.0, 0.0, P)
    assert v.times[1] == pytest.approx(0.015625)
    left = np.zeros(v.values.shape, dtype=bool)
    left[:5, 0] = True
    values = datum_values(g, P.beta(), v.domain, left, w.times, 2.0)
    np.testing.assert_allclose(values, [-1.0, -0.75, -0.5, -0.25, 0.0])
    np.testing.assert_allclose(values, v.values[:5, 0])


@pytest.mark.slow
def test_cascade_on_resolved_radii_is_stable_under_refinement(make_params):
    P = make_params(p=3.0, a=0.0, eps=0.05, q=3.0, theta=0.1, eps1=1e-4)
    E = P.exponents()
    S = build_sequences(P, E, 5, radius_override=[1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125])
    g = BoundaryDatum("holder", p=3.0, gamma=0.5, amplitude=1.0, center=0.0, offset=-0.25)
    endpoints = []
    for h in (1.0 / 32.0, 1.0 / 64.0):
        D = GridDomain.interval(0.0, 1.0, h, 1.0 / 16.0, h / 8.0)
        w, _log = solve_regularized(D, P, g, SolveConfig())
        result = oscillation_cascade(w, [0.0], D.T, P, E, g, 5, S=S)
        assert result["report"].status == CheckStatus.PASS
        assert [row["j"] for row in result["rows"]] == [0, 1, 2, 3, 4]
        assert all(row["osc_next"] <= row["bound"] for row in result["rows"])
        endpoints.append(result["modulus"])
    assert refinement_stability(endpoints).status == CheckStatus.PASS


def test_quantified_modulus_on_constant_state(make_interval, grid_function, make_params):
    D = make_interval()
    w = grid_function(D, lambda x, t: np.full(x.shape[:-1], -0.3))
    P = make_params()
    S = build_sequences(P, P.exponents(), 5)
    report = quantified_modulus_check(w, [0.5], D.T, S, P)
    assert report.status == CheckStatus.PASS
    assert report.fitted_constant == 0.0
    assert report.detail["h_eps"] > 0.0


class TestRefinementStability:
    @staticmethod
    def _reports(*fitted):
        return [InequalityReport("caccioppoli", lhs=1.0, fitted_constant=c) for c in fitted]

    def test_stable_fit(self):
        report = refinement_stability(self._reports(1.0, 1.2))
        assert report.status == CheckStatus.PASS
        assert report.refinement_series == [1.0, 1.2]
        assert report.name == "caccioppoli_refinement"

    def test_drifting_fit(self):
        assert refinement_stability(self._reports(1.0, 3.0)).status == CheckStatus.FAIL

    def test_single_level_is_undecided(self):
        assert refinement_stability(self._reports(1.0)).status == CheckStatus.UNDECIDED
