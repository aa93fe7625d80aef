# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

from utils.precision import mp, mpf, to_float
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


class ExponentPack:
    """
    Exponent algebra of the iteration, in extended precision.

    ``kappa`` is None when it is infinite (p > n); consumers use
    ``inv_kappa`` which is then exactly zero.
    """

    def __init__(self, p, n, q, gamma=0.5):
        from services.model_service import bar_q
        from services.iteration_service import kappa_of
        self.p = mpf(p)
        self.n = int(n)
        self.q = mpf(q)
        self.gamma = mpf(gamma)
        self.p_prime = self.p / (self.p - 1)
        self.q_bar = mpf(bar_q(self.n, float(p)))
        self.alpha = 1 / (self.p_prime * self.q)
        self.kappa = kappa_of(self.n, float(p), float(q))
        self.kappa_infinite = self.kappa is None
        self.inv_kappa = mp.zero if self.kappa_infinite else 1 / self.kappa
        self.zeta = (1 - 1 / self.q) * (2 - self.inv_kappa) - 1
        self._validate()

    def _validate(self):
        if not self.q > self.q_bar:
            raise ValueError(_("constants.q = {q} must exceed q_bar = {qbar}").format(
                q=to_float(self.q), qbar=to_float(self.q_bar)))
        if not 0 < self.alpha < 1 / (self.p_prime * self.q_bar):
            raise ValueError(_("alpha = {alpha} leaves (0, 1/(p' q_bar))").format(alpha=to_float(self.alpha)))
        if not self.zeta > 0:
            raise ValueError(_("no absorption exponent: (1-1/q)(2-1/kappa) - 1 = {zeta}").format(
                zeta=to_float(self.zeta)))
        if not 0 < self.gamma < 1:
            raise ValueError(_("constants.gamma must lie in (0, 1)"))

    @property
    def kappa_label(self):
        return "inf" if self.kappa_infinite else mp.nstr(self.kappa, 17)

    def to_dict(self):
        return {
            "p": to_float(self.p), "p_prime": to_float(self.p_prime), "n": self.n, "q": to_float(self.q),
            "q_bar": to_float(self.q_bar), "alpha": to_float(self.alpha), "kappa": self.kappa_label,
            "zeta": to_float(self.zeta), "gamma": to_float(self.gamma),
        }
