# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import math
import numpy as np
from utils.enums import CylinderKind, FamilyKind
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


def _smoothstep(s):
    s = np.clip(s, 0.0, 1.0)
    return s * s * (3.0 - 2.0 * s)


def _smoothstep_slope(s):
    inside = (s > 0.0) & (s < 1.0)
    return np.where(inside, 6.0 * s * (1.0 - s), 0.0)


class Cylinder:
    """
    B_r(x0) x [lower, upper]. Node membership uses the closed cylinder;
    infinite time bounds mean the cylinder covers every available level.
    """

    def __init__(self, center, t0, radius, lower, upper, kind=CylinderKind.WINDOW, stretch=None, label="", usable=True):
        if not radius > 0:
            raise ValueError(_("Cylinder radius must be positive, got {r}").format(r=radius))
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.t0 = float(t0)
        self.radius = float(radius)
        self.lower = float(lower)
        self.upper = float(upper)
        self.kind = CylinderKind(kind)
        self.stretch = stretch
        self.label = label
        self.usable = usable

    @classmethod
    def symmetric(cls, center, t0, r, p):
        half = r ** p
        return cls(center, t0, r, t0 - half, t0 + half, CylinderKind.SYMMETRIC)

    @classmethod
    def stretched(cls, center, t0, r, rho, p):
        half = rho ** (2.0 - p) * r ** p
        return cls(center, t0, r, t0 - half, t0 + half, CylinderKind.STRETCHED, stretch=rho)

    @classmethod
    def backward(cls, center, t0, r, length):
        return cls(center, t0, r, t0 - length, t0, CylinderKind.BACKWARD)

    @classmethod
    def centered(cls, center, t0, r, half_length):
        return cls(center, t0, r, t0 - half_length, t0 + half_length, CylinderKind.WINDOW)

    @property
    def length(self):
        return self.upper - self.lower

    def scaled(self, sigma):
        """sigma Q for a backward cylinder: radius and time length both scale by sigma."""
        return Cylinder(self.center, self.t0, sigma * self.radius, self.t0 - sigma * (self.t0 - self.lower),
                        self.upper, self.kind, self.stretch, self.label)

    def contains(self, domain, times=None):
        """Boolean (levels, *shape) selection of grid nodes in the closed cylinder and in the domain closure."""
        times = domain.times if times is None else np.asarray(times, dtype=float)
        in_ball = domain.ball(self.center, self.radius) & domain.mask
        tol = 1e-9 * domain.dt
        in_time = (times >= self.lower - tol) & (times <= self.upper + tol)
        return in_time.reshape((-1,) + (1,) * domain.n) & in_ball[None, ...]

    def to_dict(self):
        return {
            "center": self.center.tolist(), "t0": self.t0, "radius": self.radius,
            "lower": self.lower, "upper": self.upper, "kind": self.kind.value,
            "stretch": self.stretch, "label": self.label, "usable": self.usable,
        }


class ShrinkFamily:
    """
    sigma_j Q^i with sigma_j = (1 + 2^-j)/16 for the first two lateral
    cylinders, (1 + 2^-j)/4 for the third and for the initial family.
    """

    def __init__(self, kind, center, t0, r, time_scale, p=2.0):
        self.kind = FamilyKind(kind)
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.t0 = float(t0)
        self.r = float(r)
        self.time_scale = float(time_scale)
        self.p = float(p)

    @property
    def base(self):
        return 1.0 / 16.0 if self.kind == FamilyKind.LATERAL_1_2 else 0.25

    def sigma(self, j):
        return self.base * (1.0 + 2.0 ** (-j))

    @property
    def limit(self):
        return self.base

    def radius(self, j):
        return self.sigma(j) * self.r

    def time_length(self, j):
        if self.kind == FamilyKind.INITIAL:
            return self.time_scale
        return self.sigma(j) * self.time_scale

    def cylinder(self, j):
        if self.kind == FamilyKind.INITIAL:
            return Cylinder(self.center, 0.0, self.radius(j), 0.0, self.time_scale, CylinderKind.WINDOW,
                            label=f"{self.kind.value}[{j}]")
        return Cylinder(self.center, self.t0, self.radius(j), self.t0 - self.time_length(j), self.t0,
                        CylinderKind.BACKWARD, label=f"{self.kind.value}[{j}]")


class Cutoff:
    """
    phi = psi(|x - x0|) chi(t): C^1 cubic ramps, 1 on the next inner cylinder and
    0 on the parabolic boundary of the current one. The initial family uses
    time-independent cutoffs.
    """

    def __init__(self, family, j):
        if j < 0:
            raise ValueError(_("Cutoff index must be non-negative"))
        self.family = family
        self.j = int(j)
        self.outer_radius = family.radius(j)
        self.inner_radius = family.radius(j + 1)
        self.cylinder = family.cylinder(j)
        self.inner_cylinder = family.cylinder(j + 1)
        self.time_dependent = family.kind != FamilyKind.INITIAL and math.isfinite(family.time_scale)
        if self.time_dependent:
            self.bottom = family.t0 - family.time_length(j)
            self.inner_bottom = family.t0 - family.time_length(j + 1)

    @property
    def grad_bound(self):
        return 1.5 / (self.outer_radius - self.inner_radius)

    @property
    def dt_phi_p_bound(self):
        if not self.time_dependent:
            return 0.0
        return self.family.p * 1.5 / (self.inner_bottom - self.bottom)

    @property
    def grad_constant(self):
        """max|D phi| * radius_j / 2^j."""
        return self.grad_bound * self.outer_radius / 2.0 ** self.j

    @property
    def time_constant(self):
        if not self.time_dependent:
            return 0.0
        return self.dt_phi_p_bound * self.family.time_scale / 2.0 ** self.j

    def _space(self, coords):
        offset = coords - self.family.center
        dist = np.sqrt(np.sum(offset * offset, axis=-1))
        width = self.outer_radius - self.inner_radius
        s = (self.outer_radius - dist) / width
        psi = _smoothstep(s)
        slope = -_smoothstep_slope(s) / width
        safe = np.where(dist > 0.0, dist, 1.0)
        grad = (slope / safe)[..., None] * offset
        grad = np.where((dist > 0.0)[..., None], grad, 0.0)
        return psi, grad

    def _time(self, times):
        times = np.asarray(times, dtype=float)
        if not self.time_dependent:
            return np.ones_like(times), np.zeros_like(times)
        width = self.inner_bottom - self.bottom
        s = (times - self.bottom) / width
        return _smoothstep(s), _smoothstep_slope(s) / width

    def evaluate(self, coords, times):
        """Values, spatial gradients and time derivatives on (levels, *shape)."""
        psi, grad_psi = self._space(coords)
        chi, dchi = self._time(times)
        extra = (1,) * psi.ndim
        chi_b = chi.reshape((-1,) + extra)
        dchi_b = dchi.reshape((-1,) + extra)
        phi = chi_b * psi[None, ...]
        grad = chi_b[..., None] * grad_psi[None, ...]
        dphi_dt = dchi_b * psi[None, ...]
        return phi, grad, dphi_dt

    def nodal_values(self, domain, times=None):
        times = domain.times if times is None else times
        phi, _grad, _dt = self.evaluate(domain.coords, times)
        return np.where(domain.mask[None, ...], phi, 0.0)
