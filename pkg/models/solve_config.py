# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

from copy import deepcopy
from utils.constants import DEFAULT_SOLVER
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


class SolveConfig:
    def __init__(self, newton_tol=1e-10, newton_max_iter=30, mu_schedule=None,
                 linesearch_factor=0.5, linesearch_max_steps=12):
        self.newton_tol = float(newton_tol)
        self.newton_max_iter = int(newton_max_iter)
        self.mu_schedule = [float(mu) for mu in (mu_schedule if mu_schedule is not None
                                                 else DEFAULT_SOLVER["mu_schedule"])]
        self.linesearch_factor = float(linesearch_factor)
        self.linesearch_max_steps = int(linesearch_max_steps)
        self._validate()

    def _validate(self):
        if not self.newton_tol > 0:
            raise ValueError(_("solver.newton_tol must be positive"))
        if self.newton_max_iter < 1:
            raise ValueError(_("solver.newton_max_iter must be at least 1"))
        if not self.mu_schedule or any(mu <= 0 for mu in self.mu_schedule):
            raise ValueError(_("solver.mu_schedule must be a non-empty list of positive values"))
        if any(b >= a for a, b in zip(self.mu_schedule, self.mu_schedule[1:])):
            raise ValueError(_("solver.mu_schedule must be strictly decreasing"))
        if not 0.0 < self.linesearch_factor < 1.0:
            raise ValueError(_("solver.linesearch.factor must lie in (0, 1)"))
        if self.linesearch_max_steps < 0:
            raise ValueError(_("solver.linesearch.max_steps must be non-negative"))

    @property
    def linear_tol(self):
        return 0.01 * self.newton_tol

    @property
    def max_principle_tol(self):
        return 10.0 * self.newton_tol

    @classmethod
    def from_dict(cls, data):
        merged = deepcopy(DEFAULT_SOLVER)
        merged.update(data or {})
        linesearch = merged.get("linesearch") or {}
        return cls(newton_tol=merged["newton_tol"], newton_max_iter=merged["newton_max_iter"],
                   mu_schedule=merged["mu_schedule"],
                   linesearch_factor=linesearch.get("factor", 0.5),
                   linesearch_max_steps=linesearch.get("max_steps", 12))

    def to_dict(self):
        return {
            "newton_tol": self.newton_tol, "newton_max_iter": self.newton_max_iter,
            "mu_schedule": list(self.mu_schedule),
            "linesearch": {"factor": self.linesearch_factor, "max_steps": self.linesearch_max_steps},
        }
