# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
from utils.localization import _
import logging
logger = logging.getLogger(__name__)

TIME_PROFILES = ("constant", "sine", "compact")


class SmoothBump:
    """
    Test function phi(x, t) = chi(t) * prod_d cos^2(pi (x_d - c_d) / (2 radius)),
    supported in the box |x_d - c_d| <= radius. ``time_profile`` is one of
    "constant" (chi = 1), "sine" (chi = 1 + sin(2 pi t) / 2) or "compact"
    (chi = sin^2(pi (t - t1) / (t2 - t1)) on ``window`` = [t1, t2], zero outside),
    the last one vanishing at both ends of the window.
    """

    def __init__(self, center, radius, time_profile="sine", window=None):
        self.center = np.atleast_1d(np.asarray(center, dtype=float))
        self.radius = float(radius)
        if not self.radius > 0:
            raise ValueError(_("Test function radius must be positive"))
        if time_profile not in TIME_PROFILES:
            raise ValueError(_("Unknown test function time profile '{p}'").format(p=time_profile))
        self.time_profile = time_profile
        self.window = None
        if time_profile == "compact":
            if window is None:
                raise ValueError(_("The compact time profile needs a time window"))
            t1, t2 = (float(t) for t in window)
            if not t2 > t1:
                raise ValueError(_("Test function window [{t1}, {t2}] is empty").format(t1=t1, t2=t2))
            self.window = (t1, t2)

    @property
    def support_box(self):
        return self.center - self.radius, self.center + self.radius

    def _phase(self, t):
        t1, t2 = self.window
        s = (t - t1) / (t2 - t1)
        return s, (s >= 0.0) & (s <= 1.0), t2 - t1

    def _chi(self, t):
        t = np.asarray(t, dtype=float)
        if self.time_profile == "constant":
            return np.ones_like(t)
        if self.time_profile == "compact":
            s, inside, _length = self._phase(t)
            return np.where(inside, np.sin(np.pi * s) ** 2, 0.0)
        return 1.0 + 0.5 * np.sin(2.0 * np.pi * t)

    def _chi_slope(self, t):
        t = np.asarray(t, dtype=float)
        if self.time_profile == "constant":
            return np.zeros_like(t)
        if self.time_profile == "compact":
            s, inside, length = self._phase(t)
            return np.where(inside, np.pi / length * np.sin(2.0 * np.pi * s), 0.0)
        return np.pi * np.cos(2.0 * np.pi * t)

    def _space_factors(self, coords):
        s = coords - self.center
        inside = np.abs(s) < self.radius
        a = np.pi / (2.0 * self.radius)
        factor = np.where(inside, np.cos(a * s) ** 2, 0.0)
        slope = np.where(inside, -a * np.sin(2.0 * a * s), 0.0)
        return factor, slope

    def space_value(self, coords):
        factor, _slope = self._space_factors(np.asarray(coords, dtype=float))
        return np.prod(factor, axis=-1)

    def space_gradient(self, coords):
        factor, slope = self._space_factors(np.asarray(coords, dtype=float))
        n = factor.shape[-1]
        parts = []
        for d in range(n):
            others = np.prod(np.delete(factor, d, axis=-1), axis=-1) if n > 1 else 1.0
            parts.append(slope[..., d] * others)
        return np.stack(parts, axis=-1)

    def value(self, coords, t):
        return self._chi(t) * self.space_value(coords)

    def gradient(self, coords, t):
        return self._chi(t) * self.space_gradient(coords)

    def evaluate(self, coords, times):
        """Values, spatial gradients and time derivatives on (levels, *shape)."""
        coords = np.asarray(coords, dtype=float)
        times = np.asarray(times, dtype=float)
        psi = self.space_value(coords)
        grad_psi = self.space_gradient(coords)
        extra = (1,) * psi.ndim
        chi = self._chi(times).reshape((-1,) + extra)
        dchi = self._chi_slope(times).reshape((-1,) + extra)
        return chi * psi[None, ...], chi[..., None] * grad_psi[None, ...], dchi * psi[None, ...]

    def to_dict(self):
        return {"center": self.center.tolist(), "radius": self.radius, "time_profile": self.time_profile,
                "window": None if self.window is None else list(self.window)}
