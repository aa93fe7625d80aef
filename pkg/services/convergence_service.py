# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

"""
eps-sweeps of the regularized problem and the diagnostics of the vanishing
regularization limit: uniform Cauchy distances, an eps-independent modulus,
gradient convergence in measure away from the jump and the size of the
near-jump terms.
"""

from concurrent.futures import ThreadPoolExecutor
import numpy as np
from models.inequality_report import InequalityReport
from models.sweep_result import SweepResult
from services.iteration_service import h_of_eps
from services.solver_service import (
    SolverDivergenceError, gradient_field, max_principle_check, solve_regularized, temperature,
    weak_form_parts
)
from utils.config_manager import thread_cap
from utils.constants import UNDECIDED_MIN_NODES
from utils.enums import CheckStatus
from utils.precision import mpf, to_float
from utils.localization import _
import logging
logger = logging.getLogger(__name__)

# slack on monotone trends, relative to the first value of the series
_TREND_RTOL = 1e-9


def resolvable_eps(domain, beta):
    """Smallest eps whose mollification ramp the grid resolves: 2 h Lip(beta)."""
    return 2.0 * domain.h * beta.lipschitz


def check_eps_list(eps_list, domain, beta):
    eps_list = [float(e) for e in eps_list]
    if not eps_list:
        raise ValueError(_("experiments.sweep.eps_list must not be empty"))
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError(_("experiments.sweep.eps_list must be strictly decreasing"))
    floor = resolvable_eps(domain, beta)
    if eps_list[-1] < floor:
        raise ValueError(_("experiments.sweep.eps_list: eps = {eps} is below the resolvable width; "
                           "the smallest admissible eps is {floor}").format(eps=eps_list[-1], floor=floor))
    return eps_list


def run_sweep(D, P, g, eps_list, C, threads=None):
    """
    Solves the regularized problem once per eps (same grid, datum and solver
    settings) and records the pairwise sup distances max |u_i - u_j|.
    """
    beta = P.beta()
    eps_list = check_eps_list(eps_list, D, beta)
    workers = max(1, min(thread_cap() if threads is None else int(threads), len(eps_list)))
    logger.info(f"Sweep over eps = {eps_list} with {workers} worker(s)")

    def solve_one(eps):
        try:
            return solve_regularized(D, P.with_eps(eps), g, C)
        except SolverDivergenceError as e:
            e.eps = eps
            logger.error(f"Sweep aborted at eps = {eps}: {e}")
            raise

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(solve_one, eps_list))
    solutions = [w for w, _log in results]
    logs = [log for _w, log in results]
    temperatures = [temperature(w, beta) for w in solutions]
    count = len(eps_list)
    distances = np.zeros((count, count))
    for i in range(count):
        for j in range(i + 1, count):
            d = float(np.nanmax(np.abs(temperatures[i].values - temperatures[j].values)))
            distances[i, j] = distances[j, i] = d
    result = SweepResult(eps_list, solutions, temperatures, logs, distances, P, g)
    result.diagnostics["max_principle"] = [
        max_principle_check(w, g, beta, C.max_principle_tol) for w in solutions
    ]
    return result


def cauchy_trend(S):
    """d(i, i+1) non-increasing in i."""
    distances = S.consecutive_distances
    name = "cauchy_trend"
    if len(distances) < 2:
        return InequalityReport.undecided(name, "fewer than three eps values", distances=distances)
    slack = _TREND_RTOL * max(distances[0], 1.0)
    rising = [i for i in range(len(distances) - 1) if distances[i + 1] > distances[i] + slack]
    status = CheckStatus.FAIL if rising else CheckStatus.PASS
    return InequalityReport(name, lhs=distances[-1], rhs_terms={"previous": distances[-2]},
                            status=status, detail={"distances": distances, "rising_at": rising})


def truncate(s, varsigma):
    """T_varsigma(s) = max(-varsigma, min(s, varsigma))."""
    if not varsigma > 0:
        raise ValueError(_("truncation level must be positive"))
    return np.clip(s, -varsigma, varsigma)


def fit_loglog(x, y):
    """Least-squares slope of log y against log x over the positive pairs, with R^2."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    if np.count_nonzero(keep) < 2:
        return {"slope": None, "intercept": None, "r2": None, "points": int(np.count_nonzero(keep))}
    lx, ly = np.log(x[keep]), np.log(y[keep])
    slope, intercept = np.polyfit(lx, ly, 1)
    residual = ly - (slope * lx + intercept)
    total = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if total == 0.0 else 1.0 - float(np.sum(residual ** 2)) / total
    return {"slope": float(slope), "intercept": float(intercept), "r2": r2, "points": int(np.count_nonzero(keep))}


def bar_omega_builder(omega_1, datum):
    """
    r -> 4 (omega_1(sqrt r) + omega_g(sqrt r)), the eps-independent modulus
    shape; the constant c0 in front is fitted by equi_modulus_check.
    """
    def shape(r):
        r = np.atleast_1d(np.asarray(r, dtype=float))
        root = np.sqrt(np.maximum(r, 0.0))
        inner = np.array([to_float(omega_1(s)) if s > 0.0 else 0.0 for s in root])
        return 4.0 * (inner + np.asarray(datum.modulus(root), dtype=float))
    return shape


def default_h_map(P, alpha):
    """eps -> h(eps / (4 M_tilde + 1)), falling back to 1/tau when the defining equation has no root."""
    def h_map(eps):
        try:
            return to_float(h_of_eps(mpf(eps) / (4 * mpf(P.M_tilde) + 1), P.tau, alpha))
        except ValueError:
            return 1.0 / P.tau
    return h_map


def _sample_pairs(domain, times, count, rng):
    nodes = np.argwhere(domain.mask)
    first = rng.integers(0, len(nodes), size=count)
    second = rng.integers(0, len(nodes), size=count)
    level_a = rng.integers(0, len(times), size=count)
    level_b = rng.integers(0, len(times), size=count)
    return nodes[first], nodes[second], level_a, level_b


def equi_modulus_check(S, omega_bar, h_map, pairs=2000, seed=0, fit_slack=1e-8):
    """
    |u_eps(z) - u_eps(z')| <= c0 omega_bar(|z - z'|) + h(eps) + fit_slack on
    sampled pairs, with |z - z'| = max(|x - x'|, |t - t'|^(1/p)). c0 is fitted
    on the coarsest eps and frozen for the finer ones.
    """
    name = "equi_modulus"
    domain = S.domain
    rng = np.random.default_rng(seed)
    times = S.temperatures[0].times
    node_a, node_b, level_a, level_b = _sample_pairs(domain, times, int(pairs), rng)
    coords = domain.coords
    xa = coords[tuple(node_a.T)]
    xb = coords[tuple(node_b.T)]
    dt = np.abs(times[level_a] - times[level_b])
    distance = np.maximum(np.linalg.norm(xa - xb, axis=-1), dt ** (1.0 / S.params.p))
    shape = omega_bar(distance)

    def gaps(u):
        return np.abs(u.values[(level_a,) + tuple(node_a.T)] - u.values[(level_b,) + tuple(node_b.T)])

    coarse = gaps(S.temperatures[0])
    excess = np.maximum(coarse - h_map(S.eps_list[0]), 0.0)
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = np.where(shape > 0.0, excess / shape, np.where(excess > 0.0, np.inf, 0.0))
    c0 = float(np.max(ratios, initial=0.0))
    rows = []
    for eps, u in zip(S.eps_list, S.temperatures):
        lhs = gaps(u)
        bound = c0 * shape + h_map(eps) + fit_slack
        violations = int(np.count_nonzero(lhs > bound))
        rows.append({"eps": eps, "max_gap": float(np.max(lhs, initial=0.0)), "h": h_map(eps),
                     "violations": violations})
    failed = any(row["violations"] for row in rows[1:]) or not np.isfinite(c0)
    status = CheckStatus.FAIL if failed else CheckStatus.PASS
    return InequalityReport(name, lhs=max(row["max_gap"] for row in rows), rhs_terms={"c0": c0},
                            fitted_constant=c0, status=status, detail={"rows": rows, "pairs": int(pairs)})


def _level_measure(times):
    """dt weights per level for the levels after the initial one."""
    steps = np.diff(np.asarray(times, dtype=float))
    return np.concatenate(([0.0], steps))


def gradient_convergence_in_measure(S, sigma, rho, varsigma=None):
    """
    On the region {|w_last - a| >= 2 sigma}, measures for consecutive eps
    pairs the sets E = {|D w_i - D w_j| >= rho}, U = {max(|D w_i|, |D w_j|) >= 1/rho}
    and V = {min(|w_i - a|, |w_j - a|) < 2 sigma}. With ``varsigma`` the
    gradients are taken of the truncations T_varsigma(w).
    """
    name = "gradient_convergence"
    sigma, rho = float(sigma), float(rho)
    if not sigma > max(S.eps_list):
        raise ValueError(_("experiments.sweep.sigma = {sigma} must exceed the largest eps {eps}").format(
            sigma=sigma, eps=max(S.eps_list)))
    if not rho > 0:
        raise ValueError(_("experiments.sweep.rho must be positive"))
    a = S.params.a
    domain = S.domain
    finest = S.finest
    region = np.broadcast_to(domain.mask, finest.values.shape).copy()
    region &= np.abs(np.nan_to_num(finest.values, nan=a) - a) >= 2.0 * sigma
    region[0] = False
    if np.count_nonzero(region) < UNDECIDED_MIN_NODES:
        return {"pairs": [], "report": InequalityReport.undecided(name, "region away from the jump is empty")}
    weights = domain.measure_weights[None, ...] * _level_measure(finest.times).reshape(
        (-1,) + (1,) * domain.n)

    def grads(w):
        source = w if varsigma is None else w.map_values(lambda v: truncate(v, varsigma))
        out = np.zeros(w.values.shape + (domain.n,))
        for m in range(1, w.levels):
            out[m] = np.nan_to_num(gradient_field(source, m))
        return out

    def measure(selection):
        return float(np.sum(weights[selection]))

    gradients = [grads(w) for w in S.solutions]
    rows = []
    for i in range(len(S) - 1):
        gi, gj = gradients[i], gradients[i + 1]
        diff = np.linalg.norm(gi - gj, axis=-1)
        big = np.maximum(np.linalg.norm(gi, axis=-1), np.linalg.norm(gj, axis=-1))
        near = np.minimum(np.abs(np.nan_to_num(S.solutions[i].values, nan=a) - a),
                          np.abs(np.nan_to_num(S.solutions[i + 1].values, nan=a) - a)) < 2.0 * sigma
        rows.append({
            "i": i, "eps_i": S.eps_list[i], "eps_j": S.eps_list[i + 1],
            "E": measure(region & (diff >= rho)),
            "U": measure(region & (big >= 1.0 / rho)),
            "V": measure(region & near),
        })
    measures = [row["E"] for row in rows]
    if len(measures) < 2:
        report = InequalityReport(name, lhs=measures[0] if measures else 0.0, status=CheckStatus.PASS,
                                  detail={"measures": measures, "sigma": sigma, "rho": rho})
    else:
        slack = _TREND_RTOL * max(measures[0], 1.0)
        rising = [i for i in range(len(measures) - 1) if measures[i + 1] > measures[i] + slack]
        report = InequalityReport(name, lhs=measures[-1], rhs_terms={"previous": measures[-2]},
                                  status=CheckStatus.FAIL if rising else CheckStatus.PASS,
                                  detail={"measures": measures, "rising_at": rising, "sigma": sigma, "rho": rho})
    return {"pairs": rows, "report": report}


def near_jump_energy(w, sigma, phi, a, p):
    """Quadrature of the integral of |D w|^p phi^p over {|w - a| <= 2 sigma}."""
    domain = w.domain
    phi_v, _grad, _dt = phi.evaluate(domain.coords, w.times)
    level_dt = _level_measure(w.times)
    total = 0.0
    for m in range(1, w.levels):
        values = w.values[m]
        near = domain.mask & (np.abs(np.nan_to_num(values, nan=np.inf) - a) <= 2.0 * sigma)
        if not np.any(near):
            continue
        grad = np.nan_to_num(gradient_field(w, m))
        density = np.sum(grad ** 2, axis=-1) ** (p / 2.0) * np.abs(phi_v[m]) ** p
        total += level_dt[m] * float(np.sum(domain.measure_weights[near] * density[near]))
    return total


def energy_scan(w, sigmas, phi, a, p, eps=None, min_slope=0.8):
    """near_jump_energy over the sigma list with its log-log slope; passes when the slope is >= min_slope."""
    name = "near_jump_energy"
    sigmas = sorted((float(s) for s in sigmas), reverse=True)
    energies = [near_jump_energy(w, s, phi, a, p) for s in sigmas]
    fit = fit_loglog(sigmas, energies)
    rows = [{"eps": eps, "sigma": s, "energy": e, "fitted_slope": fit["slope"]} for s, e in zip(sigmas, energies)]
    if fit["slope"] is None:
        report = InequalityReport.undecided(name, "fewer than two positive energies", energies=energies, eps=eps)
    else:
        status = CheckStatus.PASS if fit["slope"] >= min_slope else CheckStatus.FAIL
        report = InequalityReport(name, lhs=fit["slope"], rhs_terms={"min_slope": min_slope},
                                  fitted_constant=float(np.exp(fit["intercept"])), status=status,
                                  detail={"r2": fit["r2"], "energies": energies, "sigmas": sigmas, "eps": eps})
    return {"rows": rows, "slope": fit["slope"], "r2": fit["r2"], "report": report}


def limit_passage_terms(S, sigma, phi, window, K, sigmas=None):
    """
    The four terms of the weak formulation for the finest eps (boundary, time,
    far flux, near-jump flux) and, over ``sigmas``, the near-jump flux size
    |T_sigma| with its log-log slope against sigma. The slope passes when it
    reaches 0.8 / p'.
    """
    name = "limit_passage"
    P = S.params.with_eps(S.eps_list[-1])
    w = S.finest
    terms = weak_form_parts(w, P, phi, window, K, sigma=sigma)
    total = float(sum(terms.values()))
    scan = sorted((float(s) for s in (sigmas or [sigma])), reverse=True)
    sizes = [abs(weak_form_parts(w, P, phi, window, K, sigma=s)["flux_near"]) for s in scan]
    fit = fit_loglog(scan, sizes)
    target = 0.8 / P.p_prime
    if fit["slope"] is None:
        report = InequalityReport.undecided(name, "near-jump flux vanishes on the sigma scan", sizes=sizes)
    else:
        status = CheckStatus.PASS if fit["slope"] >= target else CheckStatus.FAIL
        report = InequalityReport(name, lhs=fit["slope"], rhs_terms={"min_slope": target},
                                  fitted_constant=float(np.exp(fit["intercept"])), status=status,
                                  detail={"r2": fit["r2"], "sizes": sizes, "sigmas": scan})
    return {"terms": terms, "total": total, "tau_scan": list(zip(scan, sizes)),
            "tau_slope": fit["slope"], "tau_r2": fit["r2"], "report": report}
