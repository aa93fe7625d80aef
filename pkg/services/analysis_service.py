# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

"""
Empirical checkers for the energy, density and oscillation estimates.

Estimates of the form lhs <= c * rhs with an unspecified c are reported with
the fitted c = lhs / rhs; they pass when the fit is finite, and stability of
the fit across grids is judged by refinement_stability. A cylinder whose grid
intersection holds fewer than UNDECIDED_MIN_NODES nodes yields UNDECIDED.
"""

import math
import numpy as np
from models.cylinder import Cylinder
from models.grid_function import GridFunction
from models.heaviside import MollifiedHeaviside
from models.inequality_report import InequalityReport
from services.geometry_service import (
    T4, intrinsic_cylinder_sequence, lateral_cylinders, oscillation, rescale_solution, tilde_omega
)
from services.iteration_service import build_sequences, h_of_eps, modulus
from services.solver_service import gradient_field, temperature
from utils.constants import OSC_TOL, REFINEMENT_STABILITY, UNDECIDED_MIN_NODES
from utils.enums import AlternativeTag, CascadeBranch, CheckStatus
from utils.precision import mp, mpf, to_float
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


def _selection(w, Q):
    return Q.contains(w.domain, w.times) & np.isfinite(w.values)


def _count(selection):
    return int(np.count_nonzero(selection))


def _node_weights(w):
    return np.broadcast_to(w.domain.measure_weights, w.values.shape)


def _mean(values, selection, weights):
    total = float(np.sum(weights[selection]))
    if total <= 0.0:
        return 0.0
    return float(np.sum(values[selection] * weights[selection])) / total


def _window_length(w, Q):
    lower = max(Q.lower, float(w.times[0]))
    upper = min(Q.upper, float(w.times[-1]))
    return max(upper - lower, w.domain.dt)


def _parabolic_selection(w):
    """Lateral nodes at every level plus the remaining nodes of the initial level."""
    domain = w.domain
    selection = np.zeros(w.values.shape, dtype=bool)
    selection[:, domain.lateral] = True
    selection[0, domain.mask] = True
    return selection


def _fields(phi, w):
    values, grad, dphi_dt = phi.evaluate(w.domain.coords, w.times)
    return values, grad, dphi_dt


def _gradients(values, w, levels):
    """Per-level D_h of a nodal array shaped like w.values."""
    field = GridFunction(w.domain, values, times=w.times)
    grads = np.zeros(w.values.shape + (w.domain.n,))
    for m in levels:
        grads[m] = np.nan_to_num(gradient_field(field, m))
    return grads


def _active_levels(selection):
    return np.nonzero(selection.reshape(selection.shape[0], -1).any(axis=1))[0]


def _fit(lhs, rhs):
    if lhs <= 0.0:
        return 0.0
    if rhs <= 0.0:
        return math.inf
    return lhs / rhs


def _fit_status(fitted):
    return CheckStatus.PASS if math.isfinite(fitted) else CheckStatus.FAIL


def caccioppoli_check(w, Q, k, phi, H, p=None):
    """
    Both sup-in-time averages (of (w-k)_+^2 phi^p and of the jump moment
    int_k^w H'(xi)(xi-k)_+ dxi phi^p), the gradient energy of (w-k)_+ phi and
    the two right-hand sides, as cylinder averages.
    """
    name = "caccioppoli"
    if p is None:
        p = phi.family.p if hasattr(phi, "family") else 2.0
    boundary = _parabolic_selection(w) & _selection(w, Q)
    if np.any(boundary):
        datum_sup = float(np.max(w.values[boundary]))
        if not k > datum_sup:
            raise ValueError(_("level below boundary datum: k = {k} <= {sup}").format(k=k, sup=datum_sup))
    selection = _selection(w, Q)
    if _count(selection) < UNDECIDED_MIN_NODES:
        return InequalityReport.undecided(name, "fewer than {n} nodes in the cylinder".format(n=UNDECIDED_MIN_NODES))
    weights = _node_weights(w)
    levels = _active_levels(selection)
    values = np.nan_to_num(w.values)
    phi_v, grad_phi, dphi_dt = _fields(phi, w)
    phi_v = np.where(selection, phi_v, 0.0)
    trunc_full = np.maximum(values - k, 0.0)
    trunc = np.where(selection, trunc_full, 0.0)
    moment = np.where(selection, H.moment_above(k, values), 0.0)
    span = _window_length(w, Q)

    def sup_average(field):
        return max(_mean(field[m], selection[m], weights[m]) for m in levels) / span

    sup_moment = sup_average(moment * phi_v ** p)
    sup_square = sup_average(trunc ** 2 * phi_v ** p)
    grad_trunc = _gradients(trunc_full, w, levels)
    grad_product = grad_trunc * phi_v[..., None] + trunc[..., None] * grad_phi
    energy = _mean(np.sum(grad_product ** 2, axis=-1) ** (p / 2.0), selection, weights)
    grad_phi_p = np.sum(grad_phi ** 2, axis=-1) ** (p / 2.0)
    dt_phi_p = np.maximum(p * phi_v ** (p - 1.0) * dphi_dt, 0.0)
    rhs_gradient = _mean(trunc ** p * grad_phi_p, selection, weights)
    rhs_time = _mean((trunc ** 2 + moment) * dt_phi_p, selection, weights)
    lhs = sup_moment + sup_square + energy
    fitted = _fit(lhs, rhs_gradient + rhs_time)
    detail = {"sup_moment": sup_moment, "sup_square": sup_square, "energy": energy, "k": float(k)}
    return InequalityReport(name, lhs=lhs, rhs_terms={"gradient": rhs_gradient, "time": rhs_time},
                            fitted_constant=fitted, status=_fit_status(fitted), detail=detail)


def classify_alternative(w, Q3, P, omega, b=None, reflect=False, tilde=None, heaviside=None):
    """
    Returns (tag, witness). ``tilde`` overrides tilde_omega and ``heaviside``
    the jump nonlinearity (for rescaled problems). With ``reflect`` the
    reflected solution -w with jump at -b is classified.
    """
    H = heaviside or P.heaviside()
    b = H.a if b is None else float(b)
    selection = _selection(w, Q3)
    values = w.values
    if reflect:
        values = -values
        b = -b
        H = MollifiedHeaviside(b, H.eps, H.amplitude)
    inside = values[selection]
    if inside.size == 0:
        raise ValueError(_("Cylinder {label} contains no grid node").format(label=Q3.label))
    mu_plus, mu_minus = float(np.max(inside)), float(np.min(inside))
    osc = mu_plus - mu_minus
    if osc > float(omega) + OSC_TOL:
        raise ValueError(_("oscillation hypothesis violated: osc = {osc} exceeds omega = {omega}").format(
            osc=osc, omega=omega))
    wt = to_float(tilde_omega(omega, P)) if tilde is None else float(tilde)
    witness = {"mu_plus": mu_plus, "mu_minus": mu_minus, "b": b, "tilde_omega": wt,
               "admissible": bool(H.eps <= wt / 2.0), "reflected": bool(reflect)}
    if not mu_minus <= b <= mu_plus:
        return AlternativeTag.NO_JUMP, witness
    if b <= mu_plus - 2.0 * wt:
        return AlternativeTag.ALT1, witness
    p = P.p
    T1 = to_float((mpf(P.eps1) * mpf(omega)) ** (2 - mpf(p)) * mpf(Q3.radius) ** mpf(p))
    start = max(0.0, Q3.t0 - 0.25 * T1)
    tol = 1e-9 * w.domain.dt
    window = (w.times >= start - tol) & (w.times <= Q3.t0 + tol)
    ball = w.domain.ball(Q3.center, Q3.radius / 4.0) & w.domain.mask
    weights = w.domain.measure_weights
    lower = mu_plus - 3.0 * wt
    base = H.value(lower)
    averages = []
    for m in np.nonzero(window)[0]:
        level_values = values[m][ball]
        mass = np.asarray(H.value(np.maximum(level_values, lower))) - base
        averages.append(_mean(mass, np.ones(mass.shape, dtype=bool), weights[ball]))
    S = max(averages, default=0.0)
    threshold = to_float((mpf(P.eps1) * mpf(omega)) ** mpf(P.q) / mpf(P.eps3))
    witness.update({"jump_average": S, "threshold": threshold})
    if S > threshold:
        return AlternativeTag.ALT2_1, witness
    return AlternativeTag.ALT2_2, witness


_DENSITY_ESTIMATES = (
    ("density_first_alternative", 2, 1.0 / 8.0, {AlternativeTag.ALT1}),
    ("density_second_alternative", 3, 0.5, {AlternativeTag.ALT2_1, AlternativeTag.ALT2_2}),
    ("density_small_jump_mass", 1, 1.0 / 8.0, {AlternativeTag.ALT2_2}),
)


def density_estimates(w, cylinders, P, omega, tag=None, mu_plus=None, tilde=None):
    """
    Level-set volume fractions on (1/8)Q^2, (1/2)Q^3 and (1/8)Q^1 at the levels
    mu+ - 2 eps2 tilde_omega, mu+ - 8 tilde_omega and mu+ - 2 eps1 omega.
    ``cylinders`` maps 1, 2, 3 to the lateral cylinders. With a ``tag`` only
    the estimates of that alternative are evaluated, the rest are UNDECIDED.
    """
    if tag == AlternativeTag.NO_JUMP:
        raise ValueError(_("No density estimate applies when the jump is out of range"))
    if mu_plus is None:
        mu_plus = float(np.max(w.values[_selection(w, cylinders[3])]))
    wt = to_float(tilde_omega(omega, P)) if tilde is None else float(tilde)
    p_prime = P.p_prime
    eps1, eps2, eps3 = mpf(P.eps1), mpf(P.eps2), mpf(P.eps3)
    levels = {
        "density_first_alternative": mu_plus - 2.0 * to_float(eps2) * wt,
        "density_second_alternative": mu_plus - 8.0 * wt,
        "density_small_jump_mass": mu_plus - 2.0 * to_float(eps1) * float(omega),
    }
    shapes = {
        "density_first_alternative": to_float(1 / mp_log_inverse(eps2) ** (1 / mpf(p_prime))),
        "density_second_alternative": to_float((eps1 * mpf(omega)) ** mpf(P.q)),
        "density_small_jump_mass": to_float(eps3 ** (-1 / mpf(P.p)) / mp_log_inverse(eps1) ** (1 / mpf(p_prime))),
    }
    weights = _node_weights(w)
    reports = []
    for name, index, sigma, tags in _DENSITY_ESTIMATES:
        if tag is not None and tag not in tags:
            reports.append(InequalityReport.undecided(name, "alternative mismatch", tag=tag.name))
            continue
        Q = cylinders[index].scaled(sigma)
        selection = _selection(w, Q)
        if _count(selection) < UNDECIDED_MIN_NODES:
            reports.append(InequalityReport.undecided(name, "fewer than {n} nodes in the cylinder".format(
                n=UNDECIDED_MIN_NODES)))
            continue
        fraction = _mean((np.nan_to_num(w.values) > levels[name]).astype(float), selection, weights)
        shape = shapes[name]
        fitted = _fit(fraction, shape)
        status = CheckStatus.PASS if fraction <= P.c_ell * shape else CheckStatus.FAIL
        reports.append(InequalityReport(name, lhs=fraction, rhs_terms={"c_ell*shape": P.c_ell * shape},
                                        fitted_constant=fitted, status=status,
                                        detail={"level": levels[name], "shape": shape}))
    return reports


def mp_log_inverse(x):
    return mp.log(1 / mpf(x))


def log_lemma_check(w, Q, thetas, omega):
    """
    Q = (B_r(x0) cap Omega) x (0, T4). For every theta and every level in (0, T4]
    measures |{w >= sup_Q w - theta omega / 8} cap B_{r/2}| / |B_{r/2} cap Omega|
    and fits c in the bound c / log(1/theta).
    """
    name = "log_lemma"
    domain = w.domain
    selection = _selection(w, Q)
    if _count(selection) == 0:
        raise ValueError(_("Cylinder {label} contains no grid node").format(label=Q.label))
    sup_Q = float(np.max(w.values[selection]))
    ball = domain.ball(Q.center, Q.radius) & domain.mask
    initial_sup = float(np.max(w.values[0][ball]))
    if initial_sup > sup_Q - omega / 8.0 + OSC_TOL:
        raise ValueError(_("initial gap fails: sup of the initial datum {a} exceeds sup_Q - omega/8 = {b}").format(
            a=initial_sup, b=sup_Q - omega / 8.0))
    half = domain.ball(Q.center, Q.radius / 2.0) & domain.mask
    tol = 1e-9 * domain.dt
    levels = np.nonzero((w.times > w.times[0] + tol) & (w.times <= Q.upper + tol))[0]
    if np.count_nonzero(half) * len(levels) < UNDECIDED_MIN_NODES:
        return InequalityReport.undecided(name, "fewer than {n} nodes in the half ball window".format(
            n=UNDECIDED_MIN_NODES))
    weights = domain.measure_weights[half]
    rows = []
    for theta in thetas:
        theta = float(theta)
        if not 0.0 < theta < 1.0:
            raise ValueError(_("log lemma: theta must lie in (0, 1), got {t}").format(t=theta))
        level = sup_Q - theta * omega / 8.0
        fractions = [_mean((w.values[m][half] >= level).astype(float), np.ones(weights.shape, dtype=bool), weights)
                     for m in levels]
        worst = max(fractions)
        rows.append({"theta": theta, "fraction": worst, "fitted": worst * math.log(1.0 / theta)})
    lhs = max(row["fraction"] for row in rows)
    fitted = max(row["fitted"] for row in rows)
    smallest = min(float(t) for t in thetas)
    return InequalityReport(name, lhs=lhs, rhs_terms={"1/log(1/theta)": 1.0 / math.log(1.0 / smallest)},
                            fitted_constant=fitted, status=_fit_status(fitted), detail={"thetas": rows})


def datum_values(g, beta, domain, selection, times, scale=1.0):
    """
    beta(g) / scale at the selected nodes; level m is read at times[m], the
    time of the original solution when the selection lives on a rescaled one.
    """
    values = []
    for m in _active_levels(selection):
        nodes = domain.coords[selection[m]]
        values.append(beta.value(g.evaluate(nodes, times[m])) / scale)
    return np.concatenate(values) if values else np.zeros(0)


def oscillation_cascade(w, x0, t0, P, E, g, J, S=None):
    """
    Normalizes w by lambda = max(osc_{Q^0} w, 1), then checks
    osc_{Q^{j+1}} v <= max(omega_{j+1}, 2 osc g) on every index whose next
    cylinder is resolved by the grid, and fits c in osc_{Q_r} u <= c omega(r).
    Returns {"rows", "report", "modulus", "lambda"}.
    """
    if S is None:
        S = build_sequences(P, E, J)
    beta = P.beta()
    cylinders = intrinsic_cylinder_sequence(x0, t0, S, w.domain)
    osc0 = oscillation(w, cylinders[0])
    lam = max(osc0, 1.0)
    v, _jump = rescale_solution(w, lam, t0, P)
    boundary = _parabolic_selection(v)
    rows = []
    for j in range(len(cylinders) - 1):
        if not cylinders[j + 1].usable:
            break
        Qj, Qn = cylinders[j], cylinders[j + 1]
        osc_next = oscillation(v, Qn)
        in_boundary = boundary & _selection(v, Qj)
        datum = datum_values(g, beta, v.domain, in_boundary, w.times, lam)
        osc_g = float(np.max(datum) - np.min(datum)) if datum.size else 0.0
        bound = max(to_float(S.omega[j + 1]), 2.0 * osc_g)
        inside = v.values[_selection(v, Qj)]
        mu_plus, mu_minus = float(np.max(inside)), float(np.min(inside))
        omega_j = to_float(S.omega[j])
        if datum.size == 0 or float(np.max(datum)) <= mu_plus - omega_j / 8.0:
            branch = CascadeBranch.UPPER
        elif float(np.min(datum)) >= mu_minus + omega_j / 8.0:
            branch = CascadeBranch.REFLECTED
        else:
            branch = CascadeBranch.BOUNDARY_DOMINATED
        rows.append({
            "j": j, "osc_next": osc_next, "omega_next": to_float(S.omega[j + 1]), "osc_datum": osc_g,
            "bound": bound, "branch": branch.value,
            "admissible": bool(P.eps / lam <= to_float(S.tilde_omega[j]) / 2.0),
            "pass": bool(osc_next <= bound + OSC_TOL),
        })
    if rows:
        failed = [row["j"] for row in rows if not row["pass"]]
        worst = max(rows, key=lambda row: row["osc_next"] - row["bound"])
        status = CheckStatus.FAIL if failed else CheckStatus.PASS
        report = InequalityReport("oscillation_cascade", lhs=worst["osc_next"], rhs_terms={"bound": worst["bound"]},
                                  fitted_constant=None, status=status,
                                  detail={"rows": rows, "failed": failed, "lambda": lam})
    else:
        report = InequalityReport.undecided("oscillation_cascade", "no index resolved by the grid", lam=lam)
    modulus_report = _modulus_endpoint(w, x0, t0, P, S, beta)
    return {"rows": rows, "report": report, "modulus": modulus_report, "lambda": lam}


def _modulus_closure(S, P):
    if S.modulus is not None:
        return S.modulus
    return lambda r: modulus(r, P.R0, P.theta, S.alpha, log_lambda0=P.log_lambda0)


def _grid_radii(R0, h, count=12):
    radii = []
    r = float(R0)
    while r >= h and len(radii) < count:
        radii.append(r)
        r /= 2.0
    return radii


def _modulus_endpoint(w, x0, t0, P, S, beta):
    name = "modulus_endpoint"
    u = temperature(w, beta)
    omega_of = _modulus_closure(S, P)
    rows = []
    for r in _grid_radii(P.R0, w.domain.h):
        Q = Cylinder.symmetric(x0, t0, r, P.p)
        if _count(_selection(u, Q)) < UNDECIDED_MIN_NODES:
            continue
        osc = oscillation(u, Q)
        bound = to_float(omega_of(r))
        rows.append({"r": r, "osc": osc, "omega": bound, "ratio": osc / bound})
    if not rows:
        return InequalityReport.undecided(name, "no radius resolved by the grid")
    fitted = max(row["ratio"] for row in rows)
    top = max(rows, key=lambda row: row["ratio"])
    return InequalityReport(name, lhs=top["osc"], rhs_terms={"omega(r)": top["omega"]}, fitted_constant=fitted,
                            status=_fit_status(fitted), detail={"radii": rows})


def sobolev_check(w, phi, Q, E):
    """
    Both sides of the slice-wise parabolic Sobolev inequality on B x Gamma = Q.
    With kappa infinite (1/kappa = 0) the sup-norm form ||w phi||_inf^p is
    reported alongside.
    """
    name = "sobolev"
    selection = _selection(w, Q)
    if _count(selection) < UNDECIDED_MIN_NODES:
        return InequalityReport.undecided(name, "fewer than {n} nodes in the cylinder".format(n=UNDECIDED_MIN_NODES))
    p = to_float(E.p)
    inv_k = to_float(E.inv_kappa)
    n = w.domain.n
    weights = _node_weights(w)
    values = np.abs(np.nan_to_num(w.values))
    phi_v, grad_phi, _dphi = _fields(phi, w)
    phi_v = np.abs(phi_v)
    levels = _active_levels(selection)
    lhs = _mean(values ** (2.0 * (1.0 - inv_k) + p) * phi_v ** (p * (2.0 - inv_k)), selection, weights)
    ball = selection[levels[0]]
    measure_B = float(np.sum(w.domain.measure_weights[ball]))
    span = _window_length(w, Q)
    sup_term = max(_mean(values[m] ** 2 * phi_v[m] ** p, selection[m], weights[m]) for m in levels) / span
    signed = np.nan_to_num(w.values)
    grad_w = _gradients(signed, w, levels)
    grad_product = grad_w * phi_v[..., None] + signed[..., None] * grad_phi
    energy = _mean(np.sum(grad_product ** 2, axis=-1) ** (p / 2.0), selection, weights)
    rhs = measure_B ** (p / n) * span ** (1.0 - inv_k) * sup_term ** (1.0 - inv_k) * energy
    fitted = _fit(lhs, rhs)
    detail = {"kappa": E.kappa_label, "energy": energy, "sup_term": sup_term}
    if E.kappa_infinite:
        detail["sup_norm_p"] = float(np.max((values * phi_v)[selection])) ** p
    return InequalityReport(name, lhs=lhs, rhs_terms={"rhs": rhs}, fitted_constant=fitted,
                            status=_fit_status(fitted), detail=detail)


def lateral_reduction_check(w, x0, t0, r, omega, P):
    """osc over (1/16)Q^1 against osc over Q^3 minus eps1 tilde_omega."""
    name = "lateral_reduction"
    cylinders = lateral_cylinders(x0, t0, r, omega, P)
    small = cylinders[1].scaled(1.0 / 16.0)
    if _count(_selection(w, small)) < UNDECIDED_MIN_NODES:
        return InequalityReport.undecided(name, "fewer than {n} nodes in the cylinder".format(n=UNDECIDED_MIN_NODES))
    osc_small = oscillation(w, small)
    osc_big = oscillation(w, cylinders[3])
    gain = to_float(mpf(P.eps1) * tilde_omega(omega, P))
    status = CheckStatus.PASS if osc_small <= osc_big - gain + OSC_TOL else CheckStatus.FAIL
    return InequalityReport(name, lhs=osc_small, rhs_terms={"osc_Q3": osc_big, "reduction": -gain},
                            fitted_constant=osc_big - osc_small, status=status)


def initial_reduction_check(w, x0, r, omega, P, T=None):
    """sup over (B_{r/4} cap Omega) x (0, T4) against sup_Q - eps4 omega; reports the measured eps4."""
    name = "initial_reduction"
    T = float(w.times[-1]) if T is None else float(T)
    length = T4(omega, r, T, P.p)
    Q = Cylinder(x0, 0.0, r, 0.0, length, label="initial")
    quarter = Cylinder(x0, 0.0, r / 4.0, 0.0, length, label="initial/4")
    if _count(_selection(w, quarter)) < UNDECIDED_MIN_NODES:
        return InequalityReport.undecided(name, "fewer than {n} nodes in the cylinder".format(n=UNDECIDED_MIN_NODES))
    sup_Q = float(np.max(w.values[_selection(w, Q)]))
    sup_quarter = float(np.max(w.values[_selection(w, quarter)]))
    measured = (sup_Q - sup_quarter) / float(omega)
    eps4 = to_float(P.eps4)
    status = CheckStatus.PASS if measured >= eps4 - OSC_TOL else CheckStatus.FAIL
    return InequalityReport(name, lhs=sup_quarter, rhs_terms={"sup_Q": sup_Q, "reduction": -eps4 * float(omega)},
                            fitted_constant=measured, status=status, detail={"measured_eps4": measured, "T4": length})


def quantified_modulus_check(w, x0, t0, S, P, eps=None):
    """
    osc_u over B_r x (t0 - omega(r)^(2-p) r^p, t0 + omega(r)^(2-p) r^p) against
    c (omega(r) + h(eps / (4 M_tilde + 1))) on dyadic radii r <= R0 down to h.
    """
    name = "quantified_modulus"
    eps = P.eps if eps is None else eps
    try:
        h_eps = to_float(h_of_eps(mpf(eps) / (4 * mpf(P.M_tilde) + 1), S.tau, S.alpha))
    except ValueError:
        h_eps = 1.0 / float(S.tau)
    u = temperature(w, P.beta())
    omega_of = _modulus_closure(S, P)
    rows = []
    for r in _grid_radii(P.R0, w.domain.h):
        omega_r = to_float(omega_of(r))
        half = omega_r ** (2.0 - P.p) * r ** P.p
        Q = Cylinder.centered(x0, t0, r, half)
        if _count(_selection(u, Q)) < UNDECIDED_MIN_NODES:
            continue
        osc = oscillation(u, Q)
        rows.append({"r": r, "osc": osc, "omega": omega_r, "ratio": osc / (omega_r + h_eps)})
    if not rows:
        return InequalityReport.undecided(name, "no radius resolved by the grid")
    top = max(rows, key=lambda row: row["ratio"])
    return InequalityReport(name, lhs=top["osc"], rhs_terms={"omega(r)": top["omega"], "h": h_eps},
                            fitted_constant=top["ratio"], status=_fit_status(top["ratio"]),
                            detail={"radii": rows, "h_eps": h_eps})


def refinement_stability(reports, threshold=REFINEMENT_STABILITY):
    """Fitted constants over grid levels (coarse to fine); stable when the two finest differ by less than threshold."""
    finest = reports[-1]
    name = f"{finest.name}_refinement"
    if any(r.status == CheckStatus.UNDECIDED or r.fitted_constant is None for r in reports):
        return InequalityReport.undecided(name, "a grid level was undecided")
    series = [float(r.fitted_constant) for r in reports]
    if len(series) < 2:
        return InequalityReport.undecided(name, "refinement needs at least two grid levels", series=series)
    coarse, fine = series[-2], series[-1]
    if not (math.isfinite(coarse) and math.isfinite(fine)):
        return InequalityReport(name, lhs=math.inf, rhs_terms={"threshold": threshold}, fitted_constant=fine,
                                status=CheckStatus.FAIL, refinement_series=series)
    scale = max(abs(coarse), abs(fine))
    change = 0.0 if scale == 0.0 else abs(fine - coarse) / scale
    status = CheckStatus.PASS if change < threshold else CheckStatus.FAIL
    return InequalityReport(name, lhs=change, rhs_terms={"threshold": threshold}, fitted_constant=fine,
                            status=status, refinement_series=series)
