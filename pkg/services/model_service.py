# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import itertools
import numpy as np
from models.inequality_report import InequalityReport
from utils.enums import CheckStatus
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


def bar_q(n, p):
    if p < n:
        return 1.0 + n / p
    return 2.0


def heaviside_eval(H, s):
    return H.value(s)


def enthalpy_invert(E, e):
    return E.invert(e)


def flux_eval(A, x, t, u, xi, mu=0.0):
    if mu < 0:
        raise ValueError(_("Flux regularization mu must be non-negative"))
    return A.evaluate(x, t, u, xi, mu)


def bar_flux_factor(A, beta, x, t, w):
    """
    Scalar k(w) with A_bar(x, t, w, xi) = k(w) (|xi|^2 + mu^2)^((p-2)/2) xi, i.e. the
    field evaluated at u = beta^-1(w) and gradient xi / beta'(u), and its w-derivative.
    """
    coeff = np.asarray(A.coefficient(x, t), dtype=float)
    if beta.is_identity:
        return coeff, np.zeros_like(coeff)
    u = beta.inverse(w)
    d1 = np.asarray(beta.derivative(u))
    d2 = np.asarray(beta.second_derivative(u))
    s = 1.0 / d1
    factor = coeff * s ** (A.p - 1.0)
    # ds/dw = -beta''(u) / beta'(u)^3
    ds_dw = -d2 / d1 ** 3
    d_factor = coeff * (A.p - 1.0) * s ** (A.p - 2.0) * ds_dw
    return factor, d_factor


def bar_flux(A, beta, x, t, w, xi, mu=0.0):
    factor, _d = bar_flux_factor(A, beta, x, t, w)
    xi = np.asarray(xi, dtype=float)
    return (factor * A.kernel(xi, mu))[..., None] * xi


def _ball_offsets(k, n):
    span = range(-k, k + 1)
    offsets = np.array([o for o in itertools.product(span, repeat=n) if sum(c * c for c in o) <= k * k])
    return offsets


def check_outer_density(D, delta, r_Omega):
    """
    Ratio of domain cells in B_r(x0) over all lattice cells in B_r(x0), for every
    lateral node x0 and every grid radius r = k h <= r_Omega.
    """
    name = "outer_density"
    lateral = np.argwhere(D.lateral)
    if len(lateral) == 0:
        logger.warning("Outer density check on a domain without lateral boundary nodes")
        return InequalityReport.undecided(name, "no lateral boundary nodes", nodes=[])
    max_k = int(np.floor(r_Omega / D.h + 1e-9))
    if max_k < 1:
        return InequalityReport.undecided(name, "r_Omega below one cell", nodes=[])
    shape = np.asarray(D.shape)
    rows = []
    worst = 0.0
    for k in range(1, max_k + 1):
        offsets = _ball_offsets(k, D.n)
        targets = lateral[:, None, :] + offsets[None, :, :]
        valid = np.all((targets >= 0) & (targets < shape), axis=-1)
        clipped = np.where(valid[..., None], targets, 0)
        weights = D.weights[tuple(clipped[..., d] for d in range(D.n))]
        covered = np.sum(np.where(valid, weights, 0.0), axis=1)
        ratios = covered / len(offsets)
        worst = max(worst, float(np.max(ratios)))
        for node, ratio in zip(lateral, ratios):
            rows.append({"node": [int(i) for i in node], "radius": k * D.h, "ratio": float(ratio)})
    bound = 1.0 - delta
    status = CheckStatus.PASS if worst <= bound + 1e-12 else CheckStatus.FAIL
    return InequalityReport(name, lhs=worst, rhs_terms={"1-delta": bound},
                            fitted_constant=worst, status=status, detail={"nodes": rows})
