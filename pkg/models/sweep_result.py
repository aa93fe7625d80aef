# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import logging
logger = logging.getLogger(__name__)


class SweepResult:
    """Solutions of the regularized problem for a decreasing list of eps."""

    def __init__(self, eps_list, solutions, temperatures, newton_logs, distances, params, datum):
        self.eps_list = [float(e) for e in eps_list]
        self.solutions = list(solutions)
        self.temperatures = list(temperatures)
        self.newton_logs = list(newton_logs)
        self.distances = np.asarray(distances, dtype=float)
        self.params = params
        self.datum = datum
        self.diagnostics = {}

    @property
    def domain(self):
        return self.solutions[0].domain

    @property
    def consecutive_distances(self):
        return [float(self.distances[i, i + 1]) for i in range(len(self.eps_list) - 1)]

    @property
    def finest(self):
        return self.solutions[-1]

    def __len__(self):
        return len(self.eps_list)
