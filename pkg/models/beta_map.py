# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
from utils.constants import BETA_INVERT_ITERATIONS
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


def _out(values, like):
    return float(values) if np.ndim(like) == 0 else values


class BetaMap:
    """beta(u) = u + kappa_b * sin(u), a bi-Lipschitz temperature map."""

    def __init__(self, kappa_b=0.0):
        kappa_b = float(kappa_b)
        if not 0.0 <= kappa_b < 1.0:
            raise ValueError(_("model.beta_kappa must lie in [0, 1), got {value}").format(value=kappa_b))
        self.kappa_b = kappa_b

    @property
    def is_identity(self):
        return self.kappa_b == 0.0

    @property
    def Lambda_beta(self):
        return 1.0 / (1.0 - self.kappa_b)

    @property
    def lipschitz(self):
        return 1.0 + self.kappa_b

    def value(self, u):
        u_arr = np.asarray(u, dtype=float)
        if self.is_identity:
            return _out(u_arr.copy(), u)
        return _out(u_arr + self.kappa_b * np.sin(u_arr), u)

    def derivative(self, u):
        u_arr = np.asarray(u, dtype=float)
        return _out(1.0 + self.kappa_b * np.cos(u_arr), u)

    def second_derivative(self, u):
        u_arr = np.asarray(u, dtype=float)
        return _out(-self.kappa_b * np.sin(u_arr), u)

    def inverse(self, w):
        w_arr = np.asarray(w, dtype=float)
        if self.is_identity:
            return _out(w_arr.copy(), w)
        # |beta(u) - u| <= kappa_b brackets the preimage
        lo = w_arr - self.kappa_b
        hi = w_arr + self.kappa_b
        for _i in range(BETA_INVERT_ITERATIONS):
            mid = 0.5 * (lo + hi)
            below = mid + self.kappa_b * np.sin(mid) < w_arr
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 4.0 * np.spacing(np.maximum(np.abs(hi), 1.0))):
                break
        u = 0.5 * (lo + hi)
        finite = np.isfinite(w_arr)
        u = np.where(finite, u, np.nan)
        return _out(u, w)

    def to_dict(self):
        return {"beta_kappa": self.kappa_b, "Lambda_beta": self.Lambda_beta}
