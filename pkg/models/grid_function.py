# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


class GridFunction:
    """
    Nodal values per (time level, node) on a GridDomain.

    ``values`` has shape (levels, *domain.shape); exterior nodes hold NaN.
    ``times`` normally equals ``domain.times`` but rescaled copies carry
    their own time levels.
    """

    def __init__(self, domain, values, times=None, label="w"):
        values = np.array(values, dtype=float)
        times = np.array(domain.times if times is None else times, dtype=float)
        if values.shape != (len(times),) + domain.shape:
            raise ValueError(_("Grid function shape {got} does not match {expected}").format(
                got=values.shape, expected=(len(times),) + domain.shape))
        values[:, ~domain.mask] = np.nan
        values.setflags(write=False)
        times.setflags(write=False)
        self.domain = domain
        self.values = values
        self.times = times
        self.label = label

    @classmethod
    def from_callable(cls, domain, func, times=None, label="w"):
        times = domain.times if times is None else np.asarray(times, dtype=float)
        values = np.stack([np.asarray(func(domain.coords, t), dtype=float) * np.ones(domain.shape)
                           for t in times])
        return cls(domain, values, times=times, label=label)

    @property
    def levels(self):
        return len(self.times)

    def at_level(self, m):
        return self.values[m]

    def level_of(self, t):
        m = int(np.argmin(np.abs(self.times - t)))
        return m

    def inside_values(self, selection):
        """Values at the selected (level, node) pairs restricted to the domain closure."""
        selection = selection & self.domain.mask[None, ...]
        return self.values[selection]

    def map_values(self, func, label=None):
        mapped = np.asarray(func(self.values), dtype=float)
        return GridFunction(self.domain, mapped, times=self.times, label=label or self.label)

    def with_values(self, values, label=None):
        return GridFunction(self.domain, values, times=self.times, label=label or self.label)

    def __add__(self, constant):
        return self.with_values(self.values + constant)

    def __neg__(self):
        return self.with_values(-self.values)

    def sup_abs(self):
        return float(np.nanmax(np.abs(self.values)))
