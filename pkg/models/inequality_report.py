# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import math
from utils.enums import CheckStatus
import logging
logger = logging.getLogger(__name__)


class InequalityReport:
    def __init__(self, name, lhs=0.0, rhs_terms=None, fitted_constant=None, status=CheckStatus.PASS,
                 detail=None, refinement_series=None):
        self.name = name
        self.lhs = float(lhs)
        self.rhs_terms = dict(rhs_terms or {})
        self.fitted_constant = fitted_constant
        self.status = status
        self.detail = dict(detail or {})
        self.refinement_series = list(refinement_series or [])

    @property
    def rhs(self):
        return float(sum(self.rhs_terms.values()))

    @property
    def passed(self):
        return self.status == CheckStatus.PASS

    @property
    def failed(self):
        return self.status == CheckStatus.FAIL

    @classmethod
    def undecided(cls, name, reason, **detail):
        detail["reason"] = reason
        return cls(name, status=CheckStatus.UNDECIDED, detail=detail)

    def is_finite(self):
        values = [self.lhs] + list(self.rhs_terms.values())
        if self.fitted_constant is not None:
            values.append(self.fitted_constant)
        return all(math.isfinite(v) for v in values)

    def to_row(self):
        fitted = "" if self.fitted_constant is None else repr(float(self.fitted_constant))
        return [self.name, repr(self.lhs), repr(self.rhs), fitted, self.status.value]

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs_terms": {k: float(v) for k, v in self.rhs_terms.items()},
            "fitted_constant": None if self.fitted_constant is None else float(self.fitted_constant),
            "refinement_series": [float(v) for v in self.refinement_series],
            "status": self.status.value,
            "detail": self.detail,
        }

    def __repr__(self):
        return f"InequalityReport({self.name!r}, lhs={self.lhs:.4g}, rhs={self.rhs:.4g}, status={self.status.value})"
