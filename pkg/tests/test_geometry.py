# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import math
import numpy as np
import pytest
from models.cylinder import Cutoff, Cylinder, ShrinkFamily
from models.exponent_pack import ExponentPack
from services.geometry_service import (
    T4, cutoff_build, intrinsic_cylinder_sequence, lateral_cylinders, oscillation, rescale_solution,
    sequence_nested, shrink_families, tilde_omega, time_scales
)
from services.iteration_service import build_sequences
from utils.enums import CylinderKind, FamilyKind
from utils.precision import mpf


class TestCylinder:
    def test_symmetric_and_stretched(self):
        Q = Cylinder.symmetric([0.5], 1.0, 0.5, 3.0)
        assert Q.length == pytest.approx(0.25)
        R = Cylinder.stretched([0.5], 1.0, 0.5, 0.5, 3.0)
        assert R.kind == CylinderKind.STRETCHED
        assert R.length == pytest.approx(2.0 * 2.0 * 0.125)

    def test_backward_scaling_keeps_top(self):
        Q = Cylinder.backward([0.5], 1.0, 0.4, 0.8)
        half = Q.scaled(0.5)
        assert half.radius == pytest.approx(0.2)
        assert half.lower == pytest.approx(0.6)
        assert half.upper == pytest.approx(1.0)

    def test_contains_uses_domain_closure(self, make_interval):
        D = make_interval()
        Q = Cylinder.backward([0.0], D.T, 0.125, 2.0 * D.dt)
        selection = Q.contains(D)
        assert selection.shape == (D.steps + 1,) + D.shape
        assert np.count_nonzero(selection.any(axis=1)) == 3
        assert np.count_nonzero(selection[-1]) == 5

    def test_radius_must_be_positive(self):
        with pytest.raises(ValueError):
            Cylinder([0.0], 0.0, 0.0, 0.0, 1.0)


def test_T4_is_capped_by_final_time():
    assert T4(1.0, 0.5, 10.0, 2.0) == pytest.approx(0.25)
    assert T4(0.5, 0.5, 0.1, 3.0) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        T4(0.0, 0.5, 1.0)


def test_time_scale_ordering_on_random_admissible_draws(make_params, rng):
    for _draw in range(300):
        p = 2.0 + rng.random()
        eps2 = 0.1 + 0.8 * rng.random()
        eps1 = 0.02 + (eps2 ** (p - 2.0) - 0.02) * rng.random()
        omega = 0.5 + 0.5 * rng.random()
        r = 0.05 + rng.random()
        P = make_params(p=p, q=3.0, eps1=eps1, eps2=eps2)
        T1, T2, T3, wt = time_scales(omega, r, P)
        middle = wt ** (2 - mpf(p)) * mpf(r) ** mpf(p)
        assert T1 <= middle <= T2 <= T3
        assert wt < mpf(eps1) * mpf(omega) / 2


def test_time_scales_reject_inconsistent_eps(make_params):
    P = make_params(p=3.0, eps1=0.5, eps2=0.25)
    with pytest.raises(ValueError, match="eps2"):
        time_scales(1.0, 0.5, P)
    with pytest.raises(ValueError, match="omega"):
        time_scales(1.5, 0.5, make_params())


def test_tilde_omega_underflow_is_reported(make_params):
    P = make_params(eps1=1e-6, eps2=2.0 ** -10)
    assert tilde_omega(1.0, P) == 0
    with pytest.raises(ValueError, match="underflows"):
        time_scales(1.0, 0.5, P)


def test_lateral_cylinders_grow_with_index(make_params):
    P = make_params(p=3.0, eps1=1e-3, eps2=0.5)
    cylinders = lateral_cylinders([0.5], 1.0, 0.25, 1.0, P)
    lengths = [cylinders[i].length for i in (1, 2, 3)]
    assert lengths == sorted(lengths)
    assert all(cylinders[i].kind == CylinderKind.BACKWARD for i in (1, 2, 3))


class TestShrinkFamilies:
    def test_lateral_bases(self):
        F12 = ShrinkFamily(FamilyKind.LATERAL_1_2, [0.0], 1.0, 1.0, 0.5, 2.0)
        F3 = ShrinkFamily(FamilyKind.LATERAL_3, [0.0], 1.0, 1.0, 0.5, 2.0)
        assert F12.sigma(0) == pytest.approx(1.0 / 8.0)
        assert F3.sigma(0) == pytest.approx(0.5)
        assert F3.limit == pytest.approx(0.25)
        radii = [F3.radius(j) for j in range(6)]
        assert all(b < a for a, b in zip(radii, radii[1:]))

    def test_initial_family_is_time_independent(self, make_params):
        P = make_params(p=2.0, eps1=0.01, eps2=0.5)
        families = shrink_families([0.0], 0.5, 0.5, 1.0, P, T=0.1)
        initial = families["initial"]
        assert initial.kind == FamilyKind.INITIAL
        cutoff = cutoff_build(initial, 1)
        assert not cutoff.time_dependent
        assert cutoff.cylinder.lower == 0.0 and cutoff.cylinder.upper == pytest.approx(0.1)


class TestCutoff:
    def _cutoff(self):
        family = ShrinkFamily(FamilyKind.LATERAL_3, [0.5], 1.0, 1.0, 1.0, 2.0)
        return Cutoff(family, 0)

    def test_one_inside_zero_outside(self, make_interval):
        phi = self._cutoff()
        D = make_interval(h=1.0 / 64.0, dt=1.0 / 64.0, T=1.0)
        values, grad, _dt = phi.evaluate(D.coords, D.times)
        dist = np.abs(D.coords[..., 0] - 0.5)
        top = values[-1]
        assert np.all(top[dist <= phi.inner_radius] == 1.0)
        assert np.all(top[dist >= phi.outer_radius] == 0.0)
        assert np.all(values[0] == 0.0)
        assert np.max(np.abs(grad)) <= phi.grad_bound + 1e-12

    def test_grad_constant_scales_with_index(self):
        family = ShrinkFamily(FamilyKind.LATERAL_3, [0.5], 1.0, 1.0, 1.0, 2.0)
        for j in range(4):
            phi = Cutoff(family, j)
            assert phi.grad_constant <= 6.0 + 1e-12
        with pytest.raises(ValueError):
            Cutoff(family, -1)


def test_oscillation_and_empty_cylinder(make_interval, grid_function):
    D = make_interval()
    w = grid_function(D, lambda x, t: x[..., 0] + t)
    Q = Cylinder.backward([0.5], D.T, 0.25, D.T)
    assert oscillation(w, Q) == pytest.approx(0.5 + D.T)
    outside = Cylinder.backward([5.0], D.T, 0.25, D.T)
    with pytest.raises(ValueError, match="no grid node"):
        oscillation(w, outside)


class TestRescale:
    def test_exact_levels(self, make_interval, grid_function, make_params):
        D = make_interval()
        w = grid_function(D, lambda x, t: 2.0 * x[..., 0])
        P = make_params(p=3.0, a=0.4, eps=0.1, eps1=1e-3, eps2=0.5)
        v, jump = rescale_solution(w, 2.0, D.T, P)
        np.testing.assert_allclose(v.values, w.values / 2.0)
        np.testing.assert_allclose(v.times, D.T + (D.times - D.T) * 2.0)
        assert jump["a"] == pytest.approx(0.2) and jump["eps"] == pytest.approx(0.05)
        assert jump["heaviside"].amplitude == pytest.approx(0.5)

    def test_interpolated_levels(self, make_interval, grid_function):
        D = make_interval()
        w = grid_function(D, lambda x, t: x[..., 0] + 3.0 * t)
        times = np.array([D.T - 0.03, D.T - 0.01])
        v, _jump = rescale_solution(w, 1.5, D.T, times=times)
        expected = (D.coords[..., 0][None, :] + 3.0 * times[:, None]) / 1.5
        np.testing.assert_allclose(v.values, expected, atol=1e-12)

    def test_lambda_below_one(self, make_interval, grid_function):
        w = grid_function(make_interval(), lambda x, t: x[..., 0])
        with pytest.raises(ValueError):
            rescale_solution(w, 0.5, 0.0)


def test_intrinsic_sequence_stops_below_the_grid(make_params, make_interval):
    P = make_params(theta=0.3, tau=0.3)
    E = ExponentPack(P.p, P.n, P.q)
    S = build_sequences(P, E, 10)
    assert sequence_nested(S)
    cylinders = intrinsic_cylinder_sequence([0.0], 0.0, S, make_interval())
    assert cylinders[0].usable
    assert not cylinders[-1].usable
    assert math.isfinite(cylinders[0].radius)
