# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import logging
logger = logging.getLogger(__name__)


class IterationState:
    """
    The sequences omega_j, tilde_omega_j, R_j, T_j of the boundary iteration.

    When the sequence comes from the modulus, ``log_ratio[j] = log(R0/R_j)``
    and ``ell[j] = log log(lambda0 R0 / R_j)`` are kept alongside so that the
    recursion can be checked without cancellation. Hand-set sequences leave
    both as None. ``steps[j] = log(R_j / R_{j+1})`` is kept exactly as generated.
    """

    def __init__(self, omega, tilde_omega, R, T, theta, tau, alpha, p, R0, log_lambda0=None,
                 log_ratio=None, ell=None, modulus=None, truncated=False, truncated_at=None, steps=None):
        self.omega = list(omega)
        self.tilde_omega = list(tilde_omega)
        self.R = list(R)
        self.T = list(T)
        self.theta = theta
        self.tau = tau
        self.alpha = alpha
        self.p = p
        self.R0 = R0
        self.log_lambda0 = log_lambda0
        self.log_ratio = list(log_ratio) if log_ratio is not None else None
        self.ell = list(ell) if ell is not None else None
        self.steps = list(steps) if steps is not None else None
        self.modulus = modulus
        self.truncated = truncated
        self.truncated_at = truncated_at

    @property
    def J(self):
        return len(self.omega) - 1

    @property
    def from_modulus(self):
        return self.ell is not None and self.log_ratio is not None

    def __len__(self):
        return len(self.omega)
