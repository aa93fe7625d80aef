# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

"""
The constants engine. Everything here runs in the extended-precision context
of utils.precision; the radii R_j collapse doubly exponentially, so the
sequences are carried as log-ratios rho_j = log(R0 / R_j).
"""

from models.iteration_state import IterationState
from utils.constants import (
    DEFAULT_EPS2, H_OF_EPS_MAX_BISECTIONS, SERIALIZED_DIGITS, THETA_GRID_STEP, THETA_SMALLNESS_BOUND
)
from utils.precision import mp, mpf, to_float, x_minus_log1p, neg_log1p_minus_x
from utils.localization import _
import logging
logger = logging.getLogger(__name__)

# rho_j beyond this is treated as exhausted precision
LOG_RATIO_CAP = mpf('1e100')
# omega_0 is rebuilt from a log_lambda0 stored with SERIALIZED_DIGITS digits
_REL_SLACK = mpf(10) ** -(SERIALIZED_DIGITS - 5)
# exp(-x) is treated as zero beyond this argument
_EXP_UNDERFLOW = mpf(2) ** 60


def kappa_of(n, p, q):
    """Sobolev exponent; None stands for kappa = infinity (p > n), where 1/kappa = 0."""
    n = int(n)
    p = mpf(p)
    q = mpf(q)
    if p < n:
        return mpf(n) / (n - p)
    if p == n:
        return q / (q - 2)
    return None


def damped(x, alpha):
    """x exp(-x^(-1/alpha)), the shape of tilde_omega and of the h(eps) map."""
    x = mpf(x)
    power = x ** (-1 / mpf(alpha))
    if power > _EXP_UNDERFLOW:
        return mp.zero
    return x * mp.exp(-power)


def modulus(r, R0, theta, alpha, lambda0=None, log_lambda0=None):
    """
    omega(r) = (1/theta) [log log(lambda0 R0 / r)]^(-alpha).

    lambda0 is a double exponential in practice, so callers normally pass
    ``log_lambda0`` instead.
    """
    r = mpf(r)
    if not r > 0:
        raise ValueError(_("modulus: radius must be positive, got {r}").format(r=to_float(r)))
    if log_lambda0 is None:
        if lambda0 is None:
            raise ValueError(_("modulus: lambda0 or log_lambda0 is required"))
        log_lambda0 = mp.log(mpf(lambda0))
    return modulus_from_log_ratio(mp.log(mpf(R0) / r), theta, alpha, log_lambda0)


def modulus_from_log_ratio(rho, theta, alpha, log_lambda0):
    inner = mpf(log_lambda0) + mpf(rho)
    if not inner > 1:
        raise ValueError(_("modulus: log log(lambda0 R0 / r) is not positive; r is too large for lambda0"))
    return mp.log(inner) ** (-mpf(alpha)) / mpf(theta)


def _tilde(omega, tau, alpha):
    return damped(mpf(tau) * omega, alpha)


def sequences_from_steps(steps, P, E, modulus_closure=None):
    """Assemble omega_j, tilde_omega_j, R_j, T_j on the modulus from steps[j] = log(R_j / R_{j+1})."""
    log_ratio = [mp.zero]
    for s in steps:
        log_ratio.append(log_ratio[-1] + s)
    theta, tau, alpha, p = mpf(P.theta), mpf(P.tau), E.alpha, mpf(P.p)
    L0 = mpf(P.log_lambda0)
    R0 = mpf(P.R0)
    ell = [mp.log(L0 + rho) for rho in log_ratio]
    omega = [lj ** (-alpha) / theta for lj in ell]
    tilde = [_tilde(w, tau, alpha) for w in omega]
    R = [R0 * mp.exp(-rho) for rho in log_ratio]
    T = [wt ** (1 - p) * Rj ** p for wt, Rj in zip(tilde, R)]
    if modulus_closure is None:
        def modulus_closure(r):
            return modulus(r, R0, theta, alpha, log_lambda0=L0)
    return IterationState(omega, tilde, R, T, theta, tau, alpha, p, R0, log_lambda0=L0,
                          log_ratio=log_ratio, ell=ell, modulus=modulus_closure, steps=steps)


def build_sequences(P, E, J, omega_override=None, radius_override=None):
    """
    R_{j+1} = exp(-(theta/alpha) [theta omega_j]^(-1/alpha)) R_j with omega_j = omega(R_j).

    On the modulus [theta omega_j]^(-1/alpha) = ell_j, so rho_{j+1} = rho_j + (theta/alpha) ell_j.
    A hand-set ``omega_override`` replaces omega_j and a hand-set
    ``radius_override`` (starting at R0, strictly decreasing) replaces R_j,
    with omega_j = omega(R_j) unless omega_override is given as well. Such
    sequences are returned unverified so that verify_sequence_claims can
    report on them.
    """
    J = int(J)
    if J < 1:
        raise ValueError(_("constants.J must be at least 1"))
    theta, alpha = mpf(P.theta), E.alpha
    if radius_override is not None:
        return _radius_sequences(P, E, [mpf(r) for r in radius_override], omega_override)
    if omega_override is not None:
        return _override_sequences(P, E, [mpf(w) for w in omega_override])

    L0 = mpf(P.log_lambda0)
    rho = mp.zero
    steps = []
    truncated_at = None
    for j in range(J):
        step = theta / alpha * mp.log(L0 + rho)
        if rho + step > LOG_RATIO_CAP:
            truncated_at = j + 1
            logger.info(f"Iteration truncated at j={truncated_at}: R_j below representable range")
            break
        steps.append(step)
        rho = rho + step
    state = sequences_from_steps(steps, P, E)
    state.truncated = truncated_at is not None
    state.truncated_at = truncated_at
    _verify_invariants(state)
    return state


def _radius_sequences(P, E, radii, omega=None):
    R0 = mpf(P.R0)
    if len(radii) < 2:
        raise ValueError(_("constants.radius_override needs at least two radii"))
    if abs(radii[0] - R0) > R0 * _REL_SLACK:
        raise ValueError(_("constants.radius_override must start at R0 = {R0}").format(R0=P.R0))
    if not all(0 < b < a for a, b in zip(radii, radii[1:])):
        raise ValueError(_("constants.radius_override must be positive and strictly decreasing"))
    steps = [mp.log(a / b) for a, b in zip(radii, radii[1:])]
    if omega is None:
        return sequences_from_steps(steps, P, E)
    if len(omega) != len(radii):
        raise ValueError(_("constants.omega_override and constants.radius_override differ in length"))
    return _override_sequences(P, E, [mpf(w) for w in omega], steps=steps)


def _override_sequences(P, E, omega, steps=None):
    theta, tau, alpha, p = mpf(P.theta), mpf(P.tau), E.alpha, mpf(P.p)
    R0 = mpf(P.R0)
    if steps is None:
        steps = [theta / alpha * (theta * w) ** (-1 / alpha) for w in omega[:-1]]
    log_ratio = [mp.zero]
    for s in steps:
        log_ratio.append(log_ratio[-1] + s)
    tilde = [_tilde(w, tau, alpha) for w in omega]
    R = [R0 * mp.exp(-rho) for rho in log_ratio]
    T = [wt ** (1 - p) * Rj ** p for wt, Rj in zip(tilde, R)]
    return IterationState(omega, tilde, R, T, theta, tau, alpha, p, R0, log_lambda0=mpf(P.log_lambda0),
                          log_ratio=log_ratio, ell=None, steps=steps)


def _verify_invariants(state):
    if state.omega[0] > 1 + _REL_SLACK:
        raise ValueError(_("Iteration invariant violated at index 0: omega_0 = {w} exceeds 1").format(
            w=mp.nstr(state.omega[0], 20)))
    for j in range(state.J):
        if not state.steps[j] > 0:
            raise ValueError(_("Iteration invariant violated at index {j}: R_j is not strictly decreasing").format(j=j + 1))
        if state.omega[j + 1] > state.omega[j]:
            raise ValueError(_("Iteration invariant violated at index {j}: omega_j increases").format(j=j + 1))
    for row in verify_sequence_claims(state):
        if not row["pass"]:
            raise ValueError(_("Iteration invariant violated at index {j}: recursion or doubling fails").format(j=row["j"]))


def _log_space_margins(state, j):
    """
    Exact margins of the recursion and the doubling bound at index j.

    With Lambda_j = log(lambda0 R0 / R_j), ell_j = log Lambda_j, y = theta / Lambda_j,
    z = steps[j] / Lambda_j and a = log1p(z) / ell_j:

        recursion: -log(1 - y) - alpha log1p(a) >= 0
        doubling:  log 2 - alpha log1p(a) >= 0

    The recursion margin is expanded so that no two large terms cancel.
    """
    alpha, theta = state.alpha, state.theta
    big = mpf(state.log_lambda0) + state.log_ratio[j]
    ell_j = state.ell[j]
    z = state.steps[j] / big
    z_star = theta / alpha * ell_j / big
    a = mp.log1p(z) / ell_j
    y = theta / big
    recursion = (alpha / ell_j) * ((z_star - z) + x_minus_log1p(z)) + alpha * x_minus_log1p(a) + neg_log1p_minus_x(y)
    doubling = mp.log(2) - alpha * mp.log1p(a)
    return recursion, doubling, y


def verify_sequence_claims(S):
    """
    Per-index check of omega_{j+1} >= omega_j (1 - theta exp(-[theta omega_j]^(-1/alpha)))
    and omega_j <= 2 omega_{j+1}. No tolerance is applied.
    """
    rows = []
    alpha, theta = S.alpha, S.theta
    for j in range(S.J):
        lhs = S.omega[j + 1]
        if S.from_modulus:
            recursion_margin, doubling_margin, y = _log_space_margins(S, j)
            rhs = S.omega[j] * (1 - y)
            recursion_ok = recursion_margin >= 0
            doubling_ok = doubling_margin >= 0
        else:
            rhs = S.omega[j] * (1 - theta * mp.exp(-(theta * S.omega[j]) ** (-1 / alpha)))
            recursion_margin = lhs - rhs
            doubling_margin = 2 * lhs - S.omega[j]
            recursion_ok = lhs >= rhs
            doubling_ok = S.omega[j] <= 2 * lhs
        if not (recursion_ok and doubling_ok):
            logger.warning(f"Recursion check failed at j={j}: recursion={recursion_ok} doubling={doubling_ok}")
        rows.append({
            "j": j, "lhs": lhs, "rhs": rhs,
            "recursion_margin": recursion_margin, "doubling_margin": doubling_margin,
            "recursion": bool(recursion_ok), "doubling": bool(doubling_ok),
            "pass": bool(recursion_ok and doubling_ok),
        })
    return rows


def h_of_eps(eps, tau, alpha):
    """
    The unique h in (0, 1/tau] with tau h exp(-(tau h)^(-1/alpha)) = 2 eps.

    With s = tau h and u = -log(2 eps) the equation reads s^(-1/alpha) - log s = u,
    whose root lies in [u^(-alpha), 1]. ``eps`` may be an extended-precision
    number or a decimal string.
    """
    eps = mpf(eps)
    tau = mpf(tau)
    alpha = mpf(alpha)
    if not eps > 0:
        raise ValueError(_("h(eps): eps must be positive"))
    bracket_max = mp.exp(-1) / 2
    if 2 * eps > mp.exp(-1):
        raise ValueError(_("h(eps): no root in (0, 1/tau] for eps = {eps}; the bracket admits eps <= {cap}").format(
            eps=mp.nstr(eps, 10), cap=mp.nstr(bracket_max, 10)))
    u = -mp.log(2 * eps)

    def excess(s):
        return s ** (-1 / alpha) - mp.log(s) - u

    lo = u ** (-alpha)
    hi = mp.one
    for _i in range(H_OF_EPS_MAX_BISECTIONS):
        mid = (lo + hi) / 2
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= mp.eps * hi:
            break
    return (lo + hi) / 2 / tau


def h_of_eps_residual(h, eps, tau, alpha):
    """Relative residual of the defining equation at h."""
    value = damped(mpf(tau) * mpf(h), alpha)
    target = 2 * mpf(eps)
    return abs(mp.expm1(mp.log(value) - mp.log(target)))


def hypergeometric_iteration(C, b, zeta, A0, J):
    """
    Iterates A_{j+1} = C b^j A_j^(1+zeta) in log space.

    ``converged`` is the practical decay test A_J <= A0 2^-J; ``bounded`` records
    whether A_j <= A0 b^(-j/zeta) held along the whole sequence, the bound the
    lemma guarantees below ``threshold`` = C^(-1/zeta) b^(-1/zeta^2).
    """
    C, b, zeta, A0 = mpf(C), mpf(b), mpf(zeta), mpf(A0)
    if not zeta > 0:
        raise ValueError(_("no absorption exponent: zeta must be positive, got {z}").format(z=to_float(zeta)))
    if C < 1 or b < 1:
        raise ValueError(_("hypergeometric iteration needs C >= 1 and b >= 1"))
    if A0 < 0:
        raise ValueError(_("hypergeometric iteration needs A0 >= 0"))
    J = int(J)
    threshold = C ** (-1 / zeta) * b ** (-1 / zeta ** 2)
    if A0 == 0:
        return {"sequence": [mp.zero] * (J + 1), "converged": True, "bounded": True,
                "diverged": False, "threshold": threshold}
    log_C, log_b = mp.log(C), mp.log(b)
    logs = [mp.log(A0)]
    for j in range(J):
        logs.append(log_C + j * log_b + (1 + zeta) * logs[-1])
    sequence = [mp.exp(v) for v in logs]
    slack = mp.log1p(_REL_SLACK)
    converged = logs[-1] <= logs[0] - J * mp.log(2) + slack
    bounded = all(logs[j] <= logs[0] - j * log_b / zeta + slack for j in range(J + 1))
    return {"sequence": sequence, "converged": bool(converged), "bounded": bool(bounded),
            "diverged": bool(logs[-1] > logs[0]), "threshold": threshold}


def eps_constants(E, c_ell=1.0, bar_c=1.0, tilde_c=1.0, eps2=None):
    """
    eps3 = 1 / (2^(3p) c_ell bar_c) and
    eps1 = min{exp(-X^p'), eps2^(p-2), eps2, 2^-10} with
    X = c_ell tilde_c^(1/zeta) 2^(4p/zeta^2) eps3^-(1/p + (2 - 1/kappa)/(zeta q)).

    Returns (eps1, note, eps3); ``note`` names the binding term.
    """
    if not E.zeta > 0:
        raise ValueError(_("no absorption exponent: zeta must be positive"))
    eps2 = mpf(DEFAULT_EPS2 if eps2 is None else eps2)
    c_ell, bar_c, tilde_c = mpf(c_ell), mpf(bar_c), mpf(tilde_c)
    p, q, zeta = E.p, E.q, E.zeta
    eps3 = 1 / (mpf(2) ** (3 * p) * c_ell * bar_c)
    power = 1 / p + (2 - E.inv_kappa) / (zeta * q)
    X = c_ell * tilde_c ** (1 / zeta) * mpf(2) ** (4 * p / zeta ** 2) * eps3 ** (-power)
    candidates = {
        "exp(-X^p')": mp.exp(-X ** E.p_prime),
        "eps2^(p-2)": eps2 ** (p - 2),
        "eps2": eps2,
        "2^-10": mpf(2) ** -10,
    }
    note = min(candidates, key=lambda key: candidates[key])
    return candidates[note], note, eps3


def theta_predicates(theta, tau, alpha, eps4):
    theta, tau, alpha, eps4 = mpf(theta), mpf(tau), mpf(alpha), mpf(eps4)
    return {
        "exp_smallness": bool(mp.exp(-1 / (3 * alpha * theta)) <= mpf(THETA_SMALLNESS_BOUND)),
        "tau_power": bool(theta <= tau ** (1 / (1 - alpha))),
        "below_eps4": bool(theta <= eps4),
    }


def select_theta(tau, alpha, eps4, step=THETA_GRID_STEP):
    """Largest theta on the grid {step, 2 step, ...} inside (0, 1/2) passing every predicate."""
    count = int(round(0.5 / step))
    for k in range(count - 1, 0, -1):
        theta = round(k * step, 10)
        if all(theta_predicates(theta, tau, alpha, eps4).values()):
            return theta
    raise ValueError(_("No theta on the {step} grid satisfies the smallness predicates").format(step=step))


def tilde_delta(S):
    """delta_tilde from delta_tilde^(2-p) = tilde_omega_0^(1-p); undefined (None) at p = 2."""
    p = mpf(S.p)
    if p == 2:
        return None
    return S.tilde_omega[0] ** ((1 - p) / (2 - p))
