# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import copy
from models.beta_map import BetaMap
from models.heaviside import MollifiedHeaviside, EnthalpyMap
from models.vector_field import VectorField
from utils.constants import DEFAULT_EPS2, DEFAULT_EPS4
from utils.precision import mp, mpf, to_float
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


class ModelParams:
    """
    Every constant of the model and of the oscillation-reduction argument.

    ``eps1``..``eps3`` and ``log_lambda0`` may be extended-precision numbers;
    ``log_lambda0`` stores log(lambda0) because lambda0 itself is a double
    exponential. ``strict`` enforces the smallness chain on eps1.
    """

    def __init__(self, p=2.0, n=1, Lambda=1.0, a=0.0, eps=0.05, delta=0.5, r_Omega=0.25,
                 q=3.0, theta=0.1, tau=0.25, eps1=DEFAULT_EPS2, eps2=DEFAULT_EPS2, eps3=None,
                 eps4=DEFAULT_EPS4, log_lambda0=None, R0=1.0, beta_kappa=0.0, mu_reg=0.0,
                 alpha_tilde=0.25, M_tilde=1.0, c_ell=1.0, bar_c=1.0, tilde_c=1.0, gamma=0.5,
                 field="p_laplacian", coefficient_amplitude=0.0, strict=True):
        self.p = float(p)
        self.n = int(n)
        self.Lambda = float(Lambda)
        self.a = float(a)
        self.eps = float(eps)
        self.delta = float(delta)
        self.r_Omega = float(r_Omega)
        self.q = float(q)
        self.theta = float(theta)
        self.tau = float(tau)
        self.eps1 = eps1
        self.eps2 = eps2
        self.eps3 = eps3 if eps3 is not None else 1.0 / (2.0 ** (3.0 * self.p) * c_ell * bar_c)
        self.eps4 = eps4
        self.R0 = float(R0)
        self.beta_kappa = float(beta_kappa)
        self.mu_reg = float(mu_reg)
        self.alpha_tilde = float(alpha_tilde)
        self.M_tilde = float(M_tilde)
        self.c_ell = float(c_ell)
        self.bar_c = float(bar_c)
        self.tilde_c = float(tilde_c)
        self.gamma = float(gamma)
        self.field = field
        self.coefficient_amplitude = float(coefficient_amplitude)
        self.strict = bool(strict)
        self.log_lambda0 = log_lambda0 if log_lambda0 is not None else self.auto_log_lambda0()
        self._validate()

    @property
    def p_prime(self):
        return self.p / (self.p - 1.0)

    @property
    def alpha(self):
        return 1.0 / (self.p_prime * self.q)

    @property
    def alpha_mp(self):
        p = mpf(self.p)
        return (p - 1) / (p * mpf(self.q))

    def auto_log_lambda0(self):
        """log(lambda0) for lambda0 = exp(exp(theta^(-1/alpha))), which makes omega(R0) = 1."""
        return mp.exp(mpf(self.theta) ** (-1 / self.alpha_mp))

    def _check(self, condition, field, message, **values):
        if not condition:
            raise ValueError(f"{field}: " + _(message).format(**values))

    def _validate(self):
        from services.model_service import bar_q
        self._check(self.n >= 1, "model.n", "dimension must be a positive integer")
        self._check(self.p >= 2.0, "model.p", "p must be at least 2, got {v}", v=self.p)
        self._check(self.Lambda >= 1.0, "model.Lambda", "Lambda must be at least 1, got {v}", v=self.Lambda)
        self._check(0.0 < self.delta < 1.0, "model.delta", "delta must lie in (0, 1), got {v}", v=self.delta)
        self._check(self.eps > 0.0, "model.eps", "eps must be positive, got {v}", v=self.eps)
        self._check(self.r_Omega > 0.0, "model.r_Omega", "r_Omega must be positive")
        self._check(0.0 <= self.beta_kappa < 1.0, "model.beta_kappa", "beta_kappa must lie in [0, 1)")
        self._check(self.mu_reg >= 0.0, "solver.mu_reg", "mu_reg must be non-negative")
        qbar = bar_q(self.n, self.p)
        self._check(self.q > qbar, "constants.q", "q = {q} must exceed q_bar(n, p) = {qbar}", q=self.q, qbar=qbar)
        self._check(0.0 < self.theta < 0.5, "constants.theta", "theta must lie in (0, 1/2), got {v}", v=self.theta)
        self._check(0.0 < self.tau < 0.5, "constants.tau", "tau must lie in (0, 1/2), got {v}", v=self.tau)
        for name in ("eps1", "eps2", "eps3", "eps4"):
            value = mpf(getattr(self, name))
            self._check(0 < value < 1, f"constants.{name}", "value must lie in (0, 1), got {v}", v=to_float(value))
        self._check(mpf(self.log_lambda0) >= 1, "constants.lambda0", "lambda0 must be at least e")
        self._check(self.R0 > 0.0, "constants.R0", "R0 must be positive")
        self._check(0.0 < self.alpha_tilde < 1.0, "constants.alpha_tilde", "alpha_tilde must lie in (0, 1)")
        self._check(self.M_tilde > 0.0, "constants.M_tilde", "M_tilde must be positive")
        self._check(0.0 < self.gamma < 1.0, "constants.gamma", "gamma must lie in (0, 1)")
        for name in ("c_ell", "bar_c", "tilde_c"):
            self._check(getattr(self, name) >= 1.0, f"constants.{name}", "structural constants must be at least 1")
        if self.strict:
            eps1, eps2 = mpf(self.eps1), mpf(self.eps2)
            self._check(eps1 <= eps2 ** (mpf(self.p) - 2), "constants.eps1", "eps1 must not exceed eps2^(p-2)")
            self._check(eps1 <= eps2, "constants.eps1", "eps1 must not exceed eps2")
            self._check(eps1 <= mpf(2) ** -10, "constants.eps1", "eps1 must not exceed 2^-10")

    def beta(self):
        return BetaMap(self.beta_kappa)

    def heaviside(self):
        return MollifiedHeaviside(self.a, self.eps)

    def enthalpy(self):
        return EnthalpyMap(self.heaviside())

    def vector_field(self):
        return VectorField(self.field, self.p, self.coefficient_amplitude)

    def exponents(self):
        from models.exponent_pack import ExponentPack
        return ExponentPack(self.p, self.n, self.q, self.gamma)

    def with_overrides(self, **changes):
        clone = copy.copy(self)
        for key, value in changes.items():
            if not hasattr(clone, key):
                raise AttributeError(key)
            setattr(clone, key, value)
        if "theta" in changes and "log_lambda0" not in changes:
            clone.log_lambda0 = clone.auto_log_lambda0()
        clone._validate()
        return clone

    def with_eps(self, eps):
        return self.with_overrides(eps=float(eps))

    def to_dict(self):
        return {
            "p": self.p, "n": self.n, "Lambda": self.Lambda, "a": self.a, "eps": self.eps,
            "delta": self.delta, "r_Omega": self.r_Omega, "q": self.q, "theta": self.theta, "tau": self.tau,
            "eps1": mp.nstr(mpf(self.eps1), 17), "eps2": mp.nstr(mpf(self.eps2), 17),
            "eps3": mp.nstr(mpf(self.eps3), 17), "eps4": mp.nstr(mpf(self.eps4), 17),
            "log_lambda0": mp.nstr(mpf(self.log_lambda0), 17), "R0": self.R0,
            "beta_kappa": self.beta_kappa, "mu_reg": self.mu_reg, "alpha": self.alpha,
            "alpha_tilde": self.alpha_tilde, "M_tilde": self.M_tilde, "c_ell": self.c_ell,
            "bar_c": self.bar_c, "tilde_c": self.tilde_c, "gamma": self.gamma, "strict": self.strict,
            "field": self.field, "coefficient_amplitude": self.coefficient_amplitude,
        }
