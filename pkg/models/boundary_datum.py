# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
from scipy.interpolate import RegularGridInterpolator
from utils.enums import DatumKind
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


class BoundaryDatum:
    """
    Cauchy-Dirichlet datum g on the parabolic boundary, in temperature units.

    Built-in kinds and their concave moduli over parabolic cylinders of
    radius r <= 1 (time extent r^p <= r):

    - constant:        g = value,                              omega_g = 0
    - holder:          g = offset + A sgn(x1-c)|x1-c|^gamma,   omega_g = A 2^(1-gamma) r^gamma
    - separable_sine:  g = A e^(-rate t) prod sin(k pi x_d),   omega_g = min(2A, A(k pi sqrt(n) + rate) r)
    - ramp:            g = cold + (hot-cold) min(1, t/t_ramp), omega_g = |hot-cold| min(1, r / t_ramp^(1/p))
    - table:           bilinear interpolation in (t, x1),      omega_g = min(osc, (Lx + Lt) r)
    """

    def __init__(self, kind, p=2.0, n=1, **params):
        self.kind = DatumKind(kind)
        self.p = float(p)
        self.n = int(n)
        self.params = dict(params)
        self._interp = None
        if self.kind == DatumKind.HOLDER:
            gamma = float(self.params.get("gamma", 0.5))
            if not 0.0 < gamma <= 1.0:
                raise ValueError(_("datum.gamma must lie in (0, 1], got {value}").format(value=gamma))
        if self.kind == DatumKind.RAMP and not float(self.params.get("t_ramp", 0.05)) > 0:
            raise ValueError(_("datum.t_ramp must be positive"))
        if self.kind == DatumKind.TABLE:
            self._build_table()

    def _build_table(self):
        try:
            t_points = np.asarray(self.params["t_points"], dtype=float)
            x_points = np.asarray(self.params["x_points"], dtype=float)
            values = np.asarray(self.params["values"], dtype=float)
        except KeyError as e:
            raise ValueError(_("datum table is missing the field {field}").format(field=e.args[0]))
        if values.shape != (len(t_points), len(x_points)):
            raise ValueError(_("datum.values must have shape (len(t_points), len(x_points))"))
        self._interp = RegularGridInterpolator((t_points, x_points), values, bounds_error=False, fill_value=None)
        dx = np.abs(np.diff(values, axis=1)) / np.diff(x_points)[None, :] if len(x_points) > 1 else np.zeros(1)
        dt = np.abs(np.diff(values, axis=0)) / np.diff(t_points)[:, None] if len(t_points) > 1 else np.zeros(1)
        self._table_lipschitz = float(np.max(dx, initial=0.0) + np.max(dt, initial=0.0))
        self._table_osc = float(np.max(values) - np.min(values))

    @classmethod
    def from_dict(cls, data, p=2.0, n=1):
        data = dict(data or {})
        kind = data.pop("kind", DatumKind.CONSTANT.value)
        return cls(kind, p=p, n=n, **data)

    def _get(self, key, default):
        return float(self.params.get(key, default))

    @property
    def sine_rate(self):
        rate = self.params.get("rate", "auto")
        k = self._get("frequency", 1)
        if rate in (None, "auto"):
            return self.n * (k * np.pi) ** 2
        return float(rate)

    def evaluate(self, x, t):
        x = np.asarray(x, dtype=float)
        shape = x.shape[:-1]
        if self.kind == DatumKind.CONSTANT:
            return np.full(shape, self._get("value", 0.0))
        if self.kind == DatumKind.HOLDER:
            d = x[..., 0] - self._get("center", 0.5)
            gamma = self._get("gamma", 0.5)
            return self._get("offset", 0.0) + self._get("amplitude", 1.0) * np.sign(d) * np.abs(d) ** gamma
        if self.kind == DatumKind.SEPARABLE_SINE:
            k = self._get("frequency", 1)
            profile = np.prod(np.sin(k * np.pi * x), axis=-1)
            return self._get("amplitude", 1.0) * np.exp(-self.sine_rate * t) * profile
        if self.kind == DatumKind.RAMP:
            cold = self._get("cold", -0.5)
            hot = self._get("hot", 0.5)
            ramp = min(1.0, max(0.0, float(t)) / self._get("t_ramp", 0.05))
            return np.full(shape, cold + (hot - cold) * ramp)
        points = np.stack([np.full(shape, float(t)), x[..., 0]], axis=-1)
        return self._interp(points.reshape(-1, 2)).reshape(shape)

    def exact_heat_solution(self, x, t):
        """Closed-form solution of the heat equation for the separable datum."""
        if self.kind != DatumKind.SEPARABLE_SINE:
            raise ValueError(_("Only the separable_sine datum carries a closed-form heat solution"))
        return self.evaluate(x, t)

    def modulus(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == DatumKind.CONSTANT:
            return np.zeros_like(r)
        if self.kind == DatumKind.HOLDER:
            gamma = self._get("gamma", 0.5)
            return self._get("amplitude", 1.0) * 2.0 ** (1.0 - gamma) * r ** gamma
        if self.kind == DatumKind.SEPARABLE_SINE:
            amp = abs(self._get("amplitude", 1.0))
            k = self._get("frequency", 1)
            return np.minimum(2.0 * amp, amp * (k * np.pi * np.sqrt(self.n) + self.sine_rate) * r)
        if self.kind == DatumKind.RAMP:
            jump = abs(self._get("hot", 0.5) - self._get("cold", -0.5))
            return jump * np.minimum(1.0, r / self._get("t_ramp", 0.05) ** (1.0 / self.p))
        return np.minimum(self._table_osc, self._table_lipschitz * r)

    def to_dict(self):
        data = {"kind": self.kind.value}
        data.update(self.params)
        return data
