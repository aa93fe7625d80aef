# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import pytest
from models.beta_map import BetaMap
from models.exponent_pack import ExponentPack
from models.grid_domain import GridDomain
from models.heaviside import EnthalpyMap, MollifiedHeaviside
from models.model_params import ModelParams
from models.smooth_bump import SmoothBump
from models.vector_field import VectorField
from services.model_service import bar_flux, bar_q, check_outer_density, flux_eval
from utils.enums import CheckStatus, NodeKind


@pytest.mark.parametrize("n, p, expected", [
    (1, 2.0, 2.0),
    (2, 2.0, 2.0),
    (2, 3.0, 2.0),
    (3, 2.0, 2.5),
    (3, 2.5, 2.2),
])
def test_bar_q_branches(n, p, expected):
    assert bar_q(n, p) == pytest.approx(expected)


class TestMollifiedHeaviside:
    def test_step_outside_support(self):
        H = MollifiedHeaviside(0.3, 0.05)
        assert H.value(0.3 - 0.06) == 0.0
        assert H.value(0.3 + 0.06) == 1.0
        assert H.value(0.3) == pytest.approx(0.5, abs=1e-9)

    def test_monotone_with_unit_mass(self):
        H = MollifiedHeaviside(0.0, 0.1)
        s = np.linspace(-0.2, 0.2, 40001)
        values = H.value(s)
        assert np.all(np.diff(values) >= 0.0)
        mass = np.sum(H.derivative(s)) * (s[1] - s[0])
        assert mass == pytest.approx(1.0, abs=1e-6)
        assert np.all(H.derivative(np.array([-0.1, 0.1, 0.5])) == 0.0)

    def test_moment_above(self):
        H = MollifiedHeaviside(0.0, 0.05)
        assert H.moment_above(0.5, 0.2) == 0.0
        # k below the support: the moment is the distance from k to the centre
        assert H.moment_above(-1.0, 1.0) == pytest.approx(1.0, abs=1e-6)

    def test_rescaled_matches_scaling(self):
        H = MollifiedHeaviside(0.2, 0.08)
        lam = 4.0
        s = np.linspace(0.0, 0.4, 17)
        np.testing.assert_allclose(H.rescaled(lam).value(s / lam), H.value(s) / lam, atol=1e-12)

    def test_rejects_nonpositive_width(self):
        with pytest.raises(ValueError):
            MollifiedHeaviside(0.0, 0.0)


def test_enthalpy_inverse_inside_jump():
    E = EnthalpyMap(MollifiedHeaviside(0.0, 0.05))
    e = np.array([-0.3, 0.01, 0.5, 1.4])
    s = E.invert(e)
    np.testing.assert_allclose(E.value(s), e, atol=1e-10)


class TestBetaMap:
    def test_identity(self):
        beta = BetaMap()
        assert beta.is_identity
        assert beta.inverse(0.7) == 0.7

    def test_inverse_and_bounds(self):
        beta = BetaMap(0.5)
        u = np.linspace(-3.0, 3.0, 13)
        np.testing.assert_allclose(beta.inverse(beta.value(u)), u, atol=1e-12)
        assert beta.Lambda_beta == pytest.approx(2.0)
        assert beta.lipschitz == pytest.approx(1.5)

    def test_rejects_non_monotone(self):
        with pytest.raises(ValueError, match="beta_kappa"):
            BetaMap(1.0)


class TestVectorField:
    def test_p_laplacian_kernel(self):
        field = VectorField("p_laplacian", p=3.0)
        xi = np.array([[3.0, 4.0]])
        np.testing.assert_allclose(field.kernel(xi), [5.0])
        np.testing.assert_allclose(flux_eval(field, np.zeros((1, 2)), 0.0, 0.0, xi), [[15.0, 20.0]])

    def test_negative_regularization_rejected(self):
        with pytest.raises(ValueError):
            flux_eval(VectorField(), np.zeros((1, 1)), 0.0, 0.0, np.ones((1, 1)), mu=-1.0)

    def test_coefficient_bounds(self):
        with pytest.raises(ValueError, match="coefficient_amplitude"):
            VectorField("p_laplacian_with_coefficient", p=2.0, coefficient_amplitude=1.0)
        field = VectorField("p_laplacian_with_coefficient", p=2.0, coefficient_amplitude=0.5)
        assert field.Lambda == pytest.approx(2.0)


def test_bar_flux_reduces_to_field_for_identity_beta():
    field = VectorField("p_laplacian", p=3.0)
    xi = np.array([[0.5], [-2.0]])
    x = np.zeros((2, 1))
    np.testing.assert_allclose(bar_flux(field, BetaMap(), x, 0.0, np.zeros(2), xi),
                               field.evaluate(x, 0.0, 0.0, xi))


class TestGridDomain:
    def test_interval_weights_and_boundary(self):
        D = GridDomain.interval(0.0, 1.0, 0.25, 0.5, 0.125)
        np.testing.assert_allclose(D.weights, [0.5, 1.0, 1.0, 1.0, 0.5])
        assert np.count_nonzero(D.lateral) == 2
        kinds = D.classify_nodes()
        assert kinds[0, 2] == NodeKind.INITIAL
        assert kinds[3, 0] == NodeKind.LATERAL
        assert kinds[3, 2] == NodeKind.INTERIOR

    def test_periodic_has_no_lateral_nodes(self):
        D = GridDomain.interval(0.0, 1.0, 0.25, 0.5, 0.125, periodic=True)
        assert D.shape == (4,)
        assert not np.any(D.lateral)

    def test_rectangle_mass(self):
        D = GridDomain.rectangle([[0.0, 1.0], [0.0, 0.5]], 0.125, 0.25, 0.125)
        _vertices, _grads, volumes, _centroids = D.elements()
        assert np.sum(volumes) == pytest.approx(0.5)
        assert np.sum(D.lumped_mass()) == pytest.approx(0.5)

    def test_rejects_incommensurate_grid(self):
        with pytest.raises(ValueError, match="not a multiple"):
            GridDomain.interval(0.0, 1.0, 0.3, 0.5, 0.125)
        with pytest.raises(ValueError, match="not a multiple"):
            GridDomain.interval(0.0, 1.0, 0.25, 0.5, 0.3)


def test_outer_density_on_interval():
    D = GridDomain.interval(0.0, 1.0, 1.0 / 32.0, 0.125, 1.0 / 64.0)
    report = check_outer_density(D, 0.5, 0.25)
    assert report.status == CheckStatus.PASS
    assert report.lhs == pytest.approx(0.5)
    assert check_outer_density(D, 0.6, 0.25).status == CheckStatus.FAIL


class TestExponentPack:
    def test_one_dimensional_pack(self):
        E = ExponentPack(2.0, 1, 3.0)
        assert E.kappa_infinite
        assert float(E.alpha) == pytest.approx(1.0 / 6.0)
        assert float(E.zeta) == pytest.approx(1.0 / 3.0)
        assert E.kappa_label == "inf"

    def test_borderline_dimension(self):
        E = ExponentPack(2.0, 2, 3.0)
        assert float(E.kappa) == pytest.approx(3.0)
        assert float(E.zeta) == pytest.approx(1.0 / 9.0)

    def test_q_must_exceed_q_bar(self):
        with pytest.raises(ValueError, match="constants.q"):
            ExponentPack(2.0, 1, 2.0)

    def test_random_packs_satisfy_alpha_window(self, rng):
        for _draw in range(200):
            n = int(rng.integers(1, 3))
            p = 2.0 + 2.0 * rng.random()
            q = bar_q(n, p) + 0.5 + 3.0 * rng.random()
            try:
                E = ExponentPack(p, n, q)
            except ValueError as e:
                assert "absorption" in str(e)
                continue
            assert 0 < E.alpha < 1 / (E.p_prime * E.q_bar)


class TestModelParams:
    def test_defaults_are_valid(self):
        P = ModelParams()
        assert P.p_prime == pytest.approx(2.0)
        assert P.alpha == pytest.approx(1.0 / 6.0)

    def test_field_named_in_errors(self):
        with pytest.raises(ValueError, match="model.p"):
            ModelParams(p=1.5)
        with pytest.raises(ValueError, match="model.delta"):
            ModelParams(delta=1.0)

    def test_strict_chain(self):
        with pytest.raises(ValueError, match="constants.eps1"):
            ModelParams(eps1=0.01)
        assert ModelParams(eps1=0.01, strict=False).eps1 == 0.01

    def test_with_eps_keeps_other_fields(self):
        P = ModelParams(a=0.2)
        Q = P.with_eps(0.01)
        assert Q.eps == 0.01 and Q.a == 0.2 and P.eps == 0.05


class TestSmoothBump:
    def test_compact_profile_vanishes_at_the_window_ends(self):
        phi = SmoothBump([0.5], 0.25, time_profile="compact", window=[0.25, 0.75])
        x = np.array([[0.5]])
        assert phi.value(x, 0.25)[0] == pytest.approx(0.0, abs=1e-15)
        assert phi.value(x, 0.75)[0] == pytest.approx(0.0, abs=1e-15)
        assert phi.value(x, 0.5)[0] == pytest.approx(1.0)
        assert phi.value(x, 0.1)[0] == 0.0

    def test_compact_time_slope_matches_difference_quotient(self):
        phi = SmoothBump([0.5], 0.25, time_profile="compact", window=[0.0, 1.0])
        coords = np.array([[0.45], [0.5]])
        times = np.array([0.3, 0.3 + 1e-6])
        values, grads, dphi_dt = phi.evaluate(coords, times)
        np.testing.assert_allclose((values[1] - values[0]) / 1e-6, dphi_dt[0], rtol=1e-4)
        np.testing.assert_allclose(grads[0], phi.gradient(coords, 0.3))

    def test_space_factor_ignores_time(self):
        phi = SmoothBump([0.5], 0.25, time_profile="compact", window=[0.25, 0.75])
        coords = np.array([[0.5], [0.75], [0.9]])
        np.testing.assert_allclose(phi.space_value(coords), [1.0, 0.0, 0.0], atol=1e-15)

    def test_compact_profile_needs_a_window(self):
        with pytest.raises(ValueError, match="window"):
            SmoothBump([0.5], 0.25, time_profile="compact")
        with pytest.raises(ValueError, match="empty"):
            SmoothBump([0.5], 0.25, time_profile="compact", window=[0.5, 0.5])
        with pytest.raises(ValueError, match="time profile"):
            SmoothBump([0.5], 0.25, time_profile="gaussian")
