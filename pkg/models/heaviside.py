# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import threading
import numpy as np
from scipy.interpolate import PchipInterpolator
from utils.constants import (
    MOLLIFIER_PANELS, MOLLIFIER_GAUSS_POINTS, HEAVISIDE_EDGE_TOL, ENTHALPY_INVERT_RTOL
)
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


def _out(values, like):
    return float(values) if np.ndim(like) == 0 else values


def _bump(z):
    z = np.asarray(z, dtype=float)
    inside = np.abs(z) < 1.0
    safe = np.where(inside, z, 0.0)
    return np.where(inside, np.exp(-1.0 / (1.0 - safe * safe)), 0.0)


class MollifierTable:
    """Cumulative integral of the normalized bump rho(z) = C exp(-1/(1-z^2)) on [-1, 1]."""
    _instance = None
    _lock = threading.Lock()

    @staticmethod
    def get_instance():
        if MollifierTable._instance is None:
            with MollifierTable._lock:
                if MollifierTable._instance is None:
                    MollifierTable._instance = MollifierTable()
        return MollifierTable._instance

    def __init__(self, panels=MOLLIFIER_PANELS, gauss_points=MOLLIFIER_GAUSS_POINTS):
        self.nodes = np.linspace(-1.0, 1.0, panels + 1)
        gl_x, gl_w = np.polynomial.legendre.leggauss(gauss_points)
        left = self.nodes[:-1, None]
        half = 0.5 * (self.nodes[1:] - self.nodes[:-1])[:, None]
        samples = left + half * (gl_x[None, :] + 1.0)
        panel_mass = np.sum(half * gl_w[None, :] * _bump(samples), axis=1)
        cumulative = np.concatenate(([0.0], np.cumsum(panel_mass)))
        total = cumulative[-1]
        self.normalization = 1.0 / total
        self.cdf = cumulative / total
        self.cdf[-1] = 1.0
        self._interp = PchipInterpolator(self.nodes, self.cdf, extrapolate=False)
        self._antiderivative = self._interp.antiderivative()
        self.cdf_integral = float(self._antiderivative(1.0))
        logger.debug(f"Mollifier table built: {panels} panels x {gauss_points} Gauss points, C = {self.normalization:.12g}")

    def density(self, z):
        return self.normalization * _bump(z)

    def cdf_at(self, z):
        z = np.asarray(z, dtype=float)
        low = z <= -1.0 + HEAVISIDE_EDGE_TOL
        high = z >= 1.0 - HEAVISIDE_EDGE_TOL
        inner = np.clip(z, -1.0, 1.0)
        values = self._interp(inner)
        values = np.where(low, 0.0, np.where(high, 1.0, values))
        return np.clip(values, 0.0, 1.0)

    def cdf_antiderivative(self, z):
        """Integral of the cdf from -1 to z."""
        z = np.asarray(z, dtype=float)
        inner = np.clip(z, -1.0, 1.0)
        values = self._antiderivative(inner)
        values = np.where(z <= -1.0, 0.0, values)
        return np.where(z >= 1.0, self.cdf_integral + (z - 1.0), values)


class MollifiedHeaviside:
    """
    H_{a,eps}: the Heaviside step at a smoothed by the bump of half-width eps.

    ``amplitude`` scales the step height; the rescaled nonlinearity
    H_{a/lam, eps/lam} / lam is ``MollifiedHeaviside(a/lam, eps/lam, 1/lam)``.
    """

    def __init__(self, a, eps, amplitude=1.0):
        if not eps > 0:
            raise ValueError(_("model.eps must be positive, got {value}").format(value=eps))
        if not amplitude > 0:
            raise ValueError(_("Heaviside amplitude must be positive, got {value}").format(value=amplitude))
        self.a = float(a)
        self.eps = float(eps)
        self.amplitude = float(amplitude)
        self._table = MollifierTable.get_instance()

    @property
    def cdf_table(self):
        return self._table.cdf

    @property
    def support(self):
        return (self.a - self.eps, self.a + self.eps)

    def _z(self, s):
        return (np.asarray(s, dtype=float) - self.a) / self.eps

    def value(self, s):
        return _out(self.amplitude * self._table.cdf_at(self._z(s)), s)

    def derivative(self, s):
        return _out(self.amplitude * self._table.density(self._z(s)) / self.eps, s)

    def integral(self, s):
        """Integral of H from -inf to s."""
        return _out(self.amplitude * self.eps * self._table.cdf_antiderivative(self._z(s)), s)

    def mass_between(self, lower, s):
        """Signed integral of H' from ``lower`` to ``s``."""
        return _out(np.asarray(self.value(s)) - np.asarray(self.value(lower)), np.add(s, lower))

    def moment_above(self, k, v):
        """Integral over (k, v) of H'(xi) (xi - k)_+; zero when v <= k."""
        k_arr = np.asarray(k, dtype=float)
        v_arr = np.asarray(v, dtype=float)
        top = np.maximum(v_arr, k_arr)
        moment = (np.asarray(self.value(top)) * (top - k_arr)
                  - (np.asarray(self.integral(top)) - np.asarray(self.integral(k_arr))))
        return _out(np.maximum(moment, 0.0), np.add(k, v))

    def rescaled(self, lam):
        return MollifiedHeaviside(self.a / lam, self.eps / lam, self.amplitude / lam)

    def shifted(self, shift):
        return MollifiedHeaviside(self.a + shift, self.eps, self.amplitude)

    def to_dict(self):
        return {"a": self.a, "eps": self.eps, "amplitude": self.amplitude}


class EnthalpyMap:
    """s -> s + H_{a,eps}(s)."""

    def __init__(self, heaviside):
        self.heaviside = heaviside

    def value(self, s):
        s_arr = np.asarray(s, dtype=float)
        return _out(s_arr + np.asarray(self.heaviside.value(s_arr)), s)

    def derivative(self, s):
        s_arr = np.asarray(s, dtype=float)
        return _out(1.0 + np.asarray(self.heaviside.derivative(s_arr)), s)

    def invert(self, e):
        e_arr = np.asarray(e, dtype=float)
        lo = e_arr - self.heaviside.amplitude
        hi = e_arr.copy()
        tol = ENTHALPY_INVERT_RTOL * np.maximum(1.0, np.abs(e_arr))
        for _i in range(200):
            mid = 0.5 * (lo + hi)
            below = np.asarray(self.value(mid)) < e_arr
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= np.spacing(np.maximum(np.abs(hi), 1.0))):
                break
        s = 0.5 * (lo + hi)
        residual = np.abs(np.asarray(self.value(s)) - e_arr)
        if np.any(residual > tol):
            logger.debug(f"Enthalpy inversion residual {float(np.max(residual)):.3e} above tolerance")
        return _out(s, e)
