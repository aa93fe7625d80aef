# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
from utils.enums import FieldKind
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


class VectorField:
    """
    The diffusion field A(x, t, u, xi) = c(x, t) (|xi|^2 + mu^2)^((p-2)/2) xi.

    For the pure p-Laplacian c == 1. The coefficient family is
    c(x, t) = 1 + amplitude * sin(2 pi x_1) * cos(pi t) with |amplitude| < 1,
    smooth in (x, t) and independent of u.
    """

    def __init__(self, kind=FieldKind.P_LAPLACIAN, p=2.0, coefficient_amplitude=0.0):
        self.kind = FieldKind(kind)
        self.p = float(p)
        self.coefficient_amplitude = float(coefficient_amplitude)
        if self.kind == FieldKind.P_LAPLACIAN:
            self.coefficient_amplitude = 0.0
        if not abs(self.coefficient_amplitude) < 1.0:
            raise ValueError(_("model.coefficient_amplitude must satisfy |c| < 1, got {value}").format(
                value=self.coefficient_amplitude))

    @property
    def coefficient_bounds(self):
        amp = abs(self.coefficient_amplitude)
        return 1.0 - amp, 1.0 + amp

    @property
    def Lambda(self):
        c_min, c_max = self.coefficient_bounds
        return max(c_max, 1.0 / c_min)

    def coefficient(self, x, t):
        x = np.asarray(x, dtype=float)
        if self.coefficient_amplitude == 0.0:
            return np.ones(x.shape[:-1])
        x1 = x[..., 0]
        return 1.0 + self.coefficient_amplitude * np.sin(2.0 * np.pi * x1) * np.cos(np.pi * t)

    def kernel(self, xi, mu=0.0):
        """(|xi|^2 + mu^2)^((p-2)/2), the scalar factor multiplying xi."""
        xi = np.asarray(xi, dtype=float)
        sq = np.sum(xi * xi, axis=-1) + mu * mu
        if self.p == 2.0:
            return np.ones_like(sq)
        return sq ** (0.5 * (self.p - 2.0))

    def kernel_jacobian(self, xi, mu=0.0):
        """D_xi of (|xi|^2 + mu^2)^((p-2)/2) xi, shape (..., n, n)."""
        xi = np.asarray(xi, dtype=float)
        n = xi.shape[-1]
        eye = np.eye(n)
        if self.p == 2.0:
            return np.broadcast_to(eye, xi.shape[:-1] + (n, n)).copy()
        sq = np.sum(xi * xi, axis=-1) + mu * mu
        degenerate = sq <= 0.0
        safe_sq = np.where(degenerate, 1.0, sq)
        factor = np.where(degenerate, 0.0, safe_sq ** (0.5 * (self.p - 2.0)))
        outer = xi[..., :, None] * xi[..., None, :] / safe_sq[..., None, None]
        jac = factor[..., None, None] * (eye + (self.p - 2.0) * outer)
        return jac

    def evaluate(self, x, t, u, xi, mu=0.0):
        xi = np.asarray(xi, dtype=float)
        coeff = np.asarray(self.coefficient(x, t), dtype=float)
        scale = coeff * self.kernel(xi, mu)
        return np.asarray(scale)[..., None] * xi

    def modulus_u(self, rho):
        """The field does not depend on u."""
        return np.zeros_like(np.asarray(rho, dtype=float))

    def modulus_xi(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.minimum(1.0, rho)

    def bound_K(self, M, M_tilde):
        """Local Lipschitz constant of xi -> A on {|xi| <= M_tilde}; M enters only through u."""
        _c_min, c_max = self.coefficient_bounds
        if self.p == 2.0:
            return c_max
        return c_max * max(1.0, (self.p - 1.0) * (2.0 * M_tilde) ** (self.p - 2.0))

    def to_dict(self):
        return {"kind": self.kind.value, "p": self.p, "coefficient_amplitude": self.coefficient_amplitude}
