# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
from models.cylinder import Cylinder, Cutoff, ShrinkFamily
from models.grid_function import GridFunction
from services.iteration_service import damped
from utils.enums import CylinderKind, FamilyKind
from utils.precision import mp, mpf, to_float
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


def tilde_omega(omega, P):
    """eps1 omega exp(-[eps1 omega]^(-p' q))."""
    return damped(mpf(P.eps1) * mpf(omega), P.alpha_mp)


def time_scales(omega, r, P):
    """
    T1 = [eps1 omega]^(2-p) r^p, T2 = [eps2 tilde_omega]^(2-p) r^p, T3 = tilde_omega^(1-p) r^p,
    checked against T1 <= tilde_omega^(2-p) r^p <= T2 <= T3. Returns (T1, T2, T3, tilde_omega).
    """
    omega, r = mpf(omega), mpf(r)
    if not 0 < omega <= 1:
        raise ValueError(_("time scales: omega must lie in (0, 1], got {w}").format(w=to_float(omega)))
    if not r > 0:
        raise ValueError(_("time scales: radius must be positive"))
    p = mpf(P.p)
    eps1, eps2 = mpf(P.eps1), mpf(P.eps2)
    if eps1 > eps2 ** (p - 2):
        raise ValueError(_("time scales: eps1 exceeds eps2^(p-2)"))
    wt = tilde_omega(omega, P)
    if not wt > 0:
        raise ValueError(_("time scales: tilde_omega underflows the extended precision range"))
    rp = r ** p
    T1 = (eps1 * omega) ** (2 - p) * rp
    middle = wt ** (2 - p) * rp
    T2 = (eps2 * wt) ** (2 - p) * rp
    T3 = wt ** (1 - p) * rp
    if not (T1 <= middle <= T2 <= T3):
        raise ValueError(_("time scale ordering violated: T1={t1} T2={t2} T3={t3}; eps1 and eps2 are inconsistent").format(
            t1=mp.nstr(T1, 8), t2=mp.nstr(T2, 8), t3=mp.nstr(T3, 8)))
    return T1, T2, T3, wt


def T4(omega, r, T, p=2.0):
    """min(omega^(2-p) r^p, T)."""
    if not (omega > 0 and r > 0 and T > 0):
        raise ValueError(_("T4: omega, r and T must be positive"))
    return min(float(omega) ** (2.0 - p) * float(r) ** p, float(T))


def lateral_cylinders(x0, t0, r, omega, P):
    """The backward cylinders Q^i = B_r(x0) x (t0 - T^i, t0], i = 1, 2, 3."""
    T1, T2, T3, _wt = time_scales(omega, r, P)
    return {i: Cylinder.backward(x0, t0, r, to_float(length))
            for i, length in ((1, T1), (2, T2), (3, T3))}


def shrink_families(x0, t0, r, omega, P, T=None):
    """ShrinkFamily per lateral cylinder and, when T is given, the initial family on (0, T4)."""
    T1, T2, T3, _wt = time_scales(omega, r, P)
    families = {
        1: ShrinkFamily(FamilyKind.LATERAL_1_2, x0, t0, r, to_float(T1), P.p),
        2: ShrinkFamily(FamilyKind.LATERAL_1_2, x0, t0, r, to_float(T2), P.p),
        3: ShrinkFamily(FamilyKind.LATERAL_3, x0, t0, r, to_float(T3), P.p),
    }
    if T is not None:
        families["initial"] = ShrinkFamily(FamilyKind.INITIAL, x0, 0.0, r, T4(omega, r, T, P.p), P.p)
    return families


def intrinsic_cylinder_sequence(x0, t0, S, domain=None):
    """
    Q^j = B_{R_j}(x0) x (t0 - T_j, t0 + T_j). When a domain is given the first
    cylinder below one cell (or without grid nodes) is returned flagged as not
    usable and ends the sequence.
    """
    cylinders = []
    for j in range(len(S)):
        radius = to_float(S.R[j])
        half = to_float(S.T[j])
        too_small = radius <= 0.0 or (domain is not None and radius < domain.h)
        if radius <= 0.0:
            radius = np.finfo(float).tiny
        cyl = Cylinder(x0, t0, radius, t0 - half, t0 + half, CylinderKind.SYMMETRIC, label=f"Q^{j}")
        if domain is not None and not too_small:
            too_small = not np.any(cyl.contains(domain))
        if too_small:
            cyl.usable = False
            cylinders.append(cyl)
            logger.debug(f"Intrinsic cylinder sequence ends at j={j}: radius {radius:.3e} below the grid")
            break
        cylinders.append(cyl)
    return cylinders


def sequence_nested(S, upto=None):
    """Q^{j+1} inside Q^j for j < upto, compared in extended precision."""
    upto = S.J if upto is None else min(int(upto), S.J)
    return all(S.R[j + 1] < S.R[j] and S.T[j + 1] <= S.T[j] for j in range(upto))


def oscillation(w, Q):
    selection = Q.contains(w.domain, w.times)
    values = w.values[selection]
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise ValueError(_("Cylinder {label} contains no grid node").format(label=Q.label or Q.to_dict()))
    return float(np.max(values) - np.min(values))


def rescale_solution(w, lam, t0, P=None, times=None):
    """
    v(y, s) = w(y, t0 + lam^(2-p) (s - t0)) / lam.

    Without ``times`` the original levels are mapped exactly; otherwise w is
    interpolated linearly in time at the requested levels. Returns the
    rescaled function and the rescaled jump data (a/lam, eps/lam).
    """
    lam = float(lam)
    if lam < 1.0:
        raise ValueError(_("Rescaling needs lambda >= 1, got {lam}").format(lam=lam))
    p = 2.0 if P is None else P.p
    stretch = lam ** (2.0 - p)
    if times is None:
        new_times = t0 + (w.times - t0) / stretch
        values = w.values / lam
    else:
        new_times = np.asarray(times, dtype=float)
        source = t0 + stretch * (new_times - t0)
        tol = 1e-9 * w.domain.dt
        if np.any(source < w.times[0] - tol) or np.any(source > w.times[-1] + tol):
            raise ValueError(_("Rescaled time levels fall outside the computed window"))
        source = np.clip(source, w.times[0], w.times[-1])
        upper = np.clip(np.searchsorted(w.times, source, side='right'), 1, len(w.times) - 1)
        lower = upper - 1
        span = w.times[upper] - w.times[lower]
        weight = ((source - w.times[lower]) / span).reshape((-1,) + (1,) * w.domain.n)
        values = ((1.0 - weight) * w.values[lower] + weight * w.values[upper]) / lam
    rescaled = GridFunction(w.domain, values, times=new_times, label=f"{w.label}/lambda")
    jump = {"lambda": lam}
    if P is not None:
        jump.update({"a": P.a / lam, "eps": P.eps / lam, "heaviside": P.heaviside().rescaled(lam)})
    return rescaled, jump


def cutoff_build(F, j):
    return Cutoff(F, j)
