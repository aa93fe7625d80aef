# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

"""
Extended-precision context shared by the constants engine.

The context is private to this package and its precision is fixed at import,
so concurrent readers never observe a changing ``dps``.
"""

from mpmath import MPContext
from utils.constants import EXTENDED_DPS
import logging
logger = logging.getLogger(__name__)

mp = MPContext()
mp.dps = EXTENDED_DPS

_SERIES_CUTOFF = mp.mpf('1e-4')
_SERIES_TERMS = 24


def mpf(value):
    if isinstance(value, mp.mpf):
        return value
    try:
        return mp.mpf(value)
    except TypeError:
        return mp.mpf(float(value))


def x_minus_log1p(x):
    """x - log(1 + x) without cancellation for tiny |x|."""
    x = mpf(x)
    if abs(x) < _SERIES_CUTOFF:
        total = mp.zero
        power = x
        for k in range(2, _SERIES_TERMS + 2):
            power = power * x
            term = power / k
            total += term if k % 2 == 0 else -term
        return total
    return x - mp.log1p(x)


def neg_log1p_minus_x(y):
    """-log(1 - y) - y, nonnegative for y in [0, 1)."""
    return x_minus_log1p(-mpf(y))


def to_float(value):
    """Nearest double; overflow maps to inf and underflow to 0.0."""
    if isinstance(value, float):
        return value
    return float(mpf(value))


def as_string(value, digits=20):
    return mp.nstr(mpf(value), digits)
