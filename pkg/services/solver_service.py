# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import bicgstab, cg, spsolve
from models.grid_function import GridFunction
from models.inequality_report import InequalityReport
from services.model_service import bar_flux, bar_flux_factor
from utils.constants import DEFAULT_SOLVER
from utils.enums import CheckStatus
from utils.localization import _
import logging
logger = logging.getLogger(__name__)


class SolverDivergenceError(RuntimeError):
    def __init__(self, step, time, residual):
        self.step = step
        self.time = time
        self.residual = residual
        super().__init__(_("Newton did not converge at time step {step} (t = {time:.6g}), last residual {res:.3e}")
                         .format(step=step, time=time, res=residual))


class RegularizedSolver:
    """
    Backward Euler in the w = beta(u) variable with P1 elements and lumped mass:

        H(w_i^{m+1}) - H(w_i^m) + dt / m_i * sum_T |T| <A_bar(w_T, D w^{m+1}), D phi_i> = 0

    at every free node i, with beta(g) imposed at lateral nodes. In periodic
    mode every node is free.
    """

    def __init__(self, domain, params, datum, config):
        self.domain = domain
        self.params = params
        self.datum = datum
        self.config = config
        self.beta = params.beta()
        self.enthalpy = params.enthalpy()
        self.field = params.vector_field()
        self.vertices, self.grads, self.volumes, self.centroids = domain.elements()
        self.mass = domain.lumped_mass()
        self.flat_coords = domain.coords.reshape(-1, domain.n)
        self.inside = domain.mask.ravel()
        self.dirichlet = domain.lateral.ravel() & self.inside
        self.free = np.nonzero(self.inside & ~self.dirichlet)[0]
        self.position = np.full(domain.node_count, -1)
        self.position[self.free] = np.arange(len(self.free))
        self.schedule = [0.0] if params.p == 2.0 else list(config.mu_schedule)
        self.w_lo, self.w_hi = self._admissible_range()

    def _boundary_values(self, t):
        return self.beta.value(self.datum.evaluate(self.flat_coords[self.dirichlet], t))

    def initial_values(self):
        w = np.zeros(self.domain.node_count)
        w[self.inside] = self.beta.value(self.datum.evaluate(self.flat_coords[self.inside], 0.0))
        return w

    def _admissible_range(self):
        samples = [self.initial_values()[self.inside]]
        if np.any(self.dirichlet):
            samples += [self._boundary_values(t) for t in self.domain.times]
        values = np.concatenate(samples)
        spread = self.beta.Lambda_beta
        return float(np.min(values)) - spread, float(np.max(values)) + spread

    def _element_state(self, w):
        local = w[self.vertices]
        w_T = local.mean(axis=1)
        xi = np.einsum('ev,evd->ed', local, self.grads)
        return w_T, xi

    def residual(self, w, w_old, t, mu):
        w_T, xi = self._element_state(w)
        factor, _d = bar_flux_factor(self.field, self.beta, self.centroids, t, w_T)
        flux = (factor * self.field.kernel(xi, mu))[:, None] * xi
        local = self.volumes[:, None] * np.einsum('ed,evd->ev', flux, self.grads)
        assembled = np.bincount(self.vertices.ravel(), weights=local.ravel(), minlength=self.domain.node_count)
        ids = self.free
        return (self.enthalpy.value(w[ids]) - self.enthalpy.value(w_old[ids])
                + self.domain.dt * assembled[ids] / self.mass[ids])

    def jacobian(self, w, t, mu):
        w_T, xi = self._element_state(w)
        factor, d_factor = bar_flux_factor(self.field, self.beta, self.centroids, t, w_T)
        stiffness = factor[:, None, None] * self.field.kernel_jacobian(xi, mu)
        local = np.einsum('evd,edf,euf->evu', self.grads, stiffness, self.grads)
        if not self.beta.is_identity:
            drift = (d_factor * self.field.kernel(xi, mu))[:, None] * xi
            column = np.einsum('ed,evd->ev', drift, self.grads) / (self.domain.n + 1)
            local = local + column[:, :, None]
        local *= self.volumes[:, None, None]
        size = self.vertices.shape[1]
        rows = np.repeat(self.vertices, size, axis=1).ravel()
        cols = np.tile(self.vertices, (1, size)).ravel()
        data = local.ravel()
        r_pos = self.position[rows]
        c_pos = self.position[cols]
        keep = (r_pos >= 0) & (c_pos >= 0)
        data = self.domain.dt * data[keep] / self.mass[rows[keep]]
        count = len(self.free)
        J = sp.coo_matrix((data, (r_pos[keep], c_pos[keep])), shape=(count, count)).tocsr()
        return J + sp.diags(self.enthalpy.derivative(w[self.free]))

    def _linear_solve(self, J, rhs):
        if self.domain.n == 1 and not self.domain.periodic:
            banded = np.zeros((3, J.shape[0]))
            banded[0, 1:] = J.diagonal(1)
            banded[1, :] = J.diagonal(0)
            banded[2, :-1] = J.diagonal(-1)
            return solve_banded((1, 1), banded, rhs)
        if self.domain.periodic:
            return spsolve(J.tocsc(), rhs)
        precond = sp.diags(1.0 / J.diagonal())
        method = cg if self.beta.is_identity else bicgstab
        delta, info = method(J, rhs, rtol=0.0, atol=self.config.linear_tol, M=precond)
        if info != 0:
            logger.warning(f"Iterative linear solve returned info={info}, falling back to a direct solve")
            delta = spsolve(J.tocsc(), rhs)
        return delta

    def _inside_bounds(self, values):
        return bool(np.all(values >= self.w_lo) and np.all(values <= self.w_hi))

    def _newton(self, w, w_old, t, mu):
        tol = self.config.newton_tol
        R = self.residual(w, w_old, t, mu)
        norm = float(np.max(np.abs(R), initial=0.0))
        iters = 0
        while norm > tol and iters < self.config.newton_max_iter:
            delta = self._linear_solve(self.jacobian(w, t, mu), -R)
            step = 1.0
            trial = w.copy()
            for attempt in range(self.config.linesearch_max_steps + 1):
                trial[self.free] = w[self.free] + step * delta
                last = attempt == self.config.linesearch_max_steps
                if self._inside_bounds(trial[self.free]) or last:
                    R_trial = self.residual(trial, w_old, t, mu)
                    trial_norm = float(np.max(np.abs(R_trial), initial=0.0))
                    if trial_norm < norm or last:
                        break
                step *= self.config.linesearch_factor
            w, R, norm = trial, R_trial, trial_norm
            iters += 1
        return w, norm, iters

    def step(self, w_old, m):
        """Advance from level m to m + 1; returns the new state and its log row."""
        t = self.domain.times[m + 1]
        w = w_old.copy()
        w[self.dirichlet] = self._boundary_values(t)
        total = 0
        for mu in self.schedule:
            w, _norm, iters = self._newton(w, w_old, t, mu)
            total += iters
        mu_final = self.schedule[-1]
        final = float(np.max(np.abs(self.residual(w, w_old, t, 0.0)), initial=0.0))
        if final > self.config.newton_tol and mu_final != 0.0:
            w, final, iters = self._newton(w, w_old, t, 0.0)
            total += iters
            mu_final = 0.0
        if final > self.config.newton_tol:
            raise SolverDivergenceError(m + 1, float(t), final)
        logger.debug(f"step {m + 1}: t={t:.6g} iters={total} residual={final:.3e} mu={mu_final:g}")
        return w, {"t_step": m + 1, "time": float(t), "iters": total,
                   "final_residual": final, "mu_final": mu_final}

    def run(self):
        w = self.initial_values()
        levels = [w]
        log = []
        for m in range(self.domain.steps):
            w, row = self.step(w, m)
            levels.append(w)
            log.append(row)
        values = np.stack(levels).reshape((self.domain.steps + 1,) + self.domain.shape)
        return GridFunction(self.domain, values, label="w"), log


def solve_regularized(D, P, g, C):
    solver = RegularizedSolver(D, P, g, C)
    logger.info(f"Solving on {D.shape} nodes, {D.steps} steps, p={P.p}, eps={P.eps}")
    return solver.run()


def temperature(w, beta):
    return w.map_values(beta.inverse, label="u")


def _datum_sup(w, g):
    domain = w.domain
    coords = domain.coords
    sup = float(np.max(np.abs(g.evaluate(coords[domain.interior], w.times[0])), initial=0.0))
    if np.any(domain.lateral):
        lateral = coords[domain.lateral]
        for t in w.times:
            sup = max(sup, float(np.max(np.abs(g.evaluate(lateral, t)))))
    return sup


def max_principle_check(w, g, beta, tol=None):
    """sup |beta^-1(w)| against the supremum of |g| over the parabolic boundary."""
    tol = 10.0 * DEFAULT_SOLVER["newton_tol"] if tol is None else float(tol)
    sup_u = temperature(w, beta).sup_abs()
    sup_g = _datum_sup(w, g)
    margin = sup_g - sup_u
    status = CheckStatus.PASS if margin >= -tol else CheckStatus.FAIL
    if status == CheckStatus.FAIL:
        logger.warning(f"Maximum principle violated: sup|u| = {sup_u:.6g} > sup|g| = {sup_g:.6g}")
    return InequalityReport("max_principle", lhs=sup_u, rhs_terms={"sup_g": sup_g},
                            fitted_constant=margin, status=status, detail={"margin": margin, "tol": tol})


def heat_oracle_error(w, g):
    exact = np.stack([g.exact_heat_solution(w.domain.coords, t) for t in w.times])
    return float(np.nanmax(np.abs(w.values - exact)))


def gradient_field(w, m):
    """
    D_h w at level m, shape (*shape, n). Central differences where both
    neighbours lie in the domain, second-order one-sided stencils otherwise,
    first order when only one neighbour exists. Exterior nodes hold NaN.
    """
    domain = w.domain
    values = np.asarray(w.at_level(m), dtype=float)
    h = domain.h
    parts = []
    for axis in range(domain.n):
        def shifted(k):
            if domain.periodic:
                return np.roll(values, -k, axis=axis)
            out = np.full_like(values, np.nan)
            src = [slice(None)] * domain.n
            dst = [slice(None)] * domain.n
            if k > 0:
                src[axis] = slice(k, None)
                dst[axis] = slice(None, -k)
            else:
                src[axis] = slice(None, k)
                dst[axis] = slice(-k, None)
            out[tuple(dst)] = values[tuple(src)]
            return out

        p1, p2, m1, m2 = shifted(1), shifted(2), shifted(-1), shifted(-2)
        with np.errstate(invalid='ignore'):
            candidates = [
                ((p1 - m1) / (2 * h), np.isfinite(p1) & np.isfinite(m1)),
                ((-3 * values + 4 * p1 - p2) / (2 * h), np.isfinite(p1) & np.isfinite(p2)),
                ((3 * values - 4 * m1 + m2) / (2 * h), np.isfinite(m1) & np.isfinite(m2)),
                ((p1 - values) / h, np.isfinite(p1)),
                ((values - m1) / h, np.isfinite(m1)),
            ]
        grad = np.zeros_like(values)
        chosen = np.zeros(values.shape, dtype=bool)
        for estimate, usable in candidates:
            take = usable & ~chosen
            grad = np.where(take, estimate, grad)
            chosen |= take
        parts.append(np.where(domain.mask, grad, np.nan))
    return np.stack(parts, axis=-1)


def _check_support(phi, K, domain):
    lower, upper = (np.atleast_1d(np.asarray(b, dtype=float)) for b in K)
    s_lo, s_hi = phi.support_box
    slack = 1e-12
    if np.any(s_lo < lower - slack) or np.any(s_hi > upper + slack):
        raise ValueError(_("Test function support {support} is not contained in K = {K}").format(
            support=(s_lo.tolist(), s_hi.tolist()), K=(lower.tolist(), upper.tolist())))
    if not domain.periodic:
        # phi must vanish at every lateral node
        lateral = domain.coords[domain.lateral]
        if len(lateral) and np.any(np.abs(phi.space_value(lateral)) > 0.0):
            raise ValueError(_("Test function does not vanish on the lateral boundary"))


def _window_levels(w, window):
    t1, t2 = float(window[0]), float(window[1])
    tol = 1e-9 * w.domain.dt
    if t1 < w.times[0] - tol or t2 > w.times[-1] + tol or not t2 > t1:
        raise ValueError(_("Window [{t1}, {t2}] is not inside the computed time range").format(t1=t1, t2=t2))
    m1, m2 = w.level_of(t1), w.level_of(t2)
    if m2 <= m1:
        raise ValueError(_("Window [{t1}, {t2}] spans no time step").format(t1=t1, t2=t2))
    return m1, m2


def weak_form_parts(w, P, phi, window, K, sigma=None):
    """
    The weak formulation tested against phi, split into its pieces:

    - ``boundary``: sum_i m_i v phi evaluated between the window ends
    - ``time``:     -sum_m sum_i m_i (v^m + v^{m+1})/2 (phi^{m+1} - phi^m)
    - ``flux_far``/``flux_near``: sum_m dt_m sum_T |T| <A_bar(w_mid), D phi>, split by
      |w_mid,T - a| > sigma versus <= sigma (everything is far when sigma is None)

    with v = H(w) and lumped mass.
    """
    domain = w.domain
    _check_support(phi, K, domain)
    m1, m2 = _window_levels(w, window)
    enthalpy = P.enthalpy()
    beta = P.beta()
    field = P.vector_field()
    vertices, grads, volumes, centroids = domain.elements()
    mass = domain.lumped_mass()
    inside = domain.mask.ravel()
    coords = domain.coords.reshape(-1, domain.n)

    def state(m):
        values = np.nan_to_num(w.at_level(m).ravel())
        v = np.where(inside, enthalpy.value(values), 0.0)
        phi_m = np.where(inside, phi.value(coords, w.times[m]), 0.0)
        return values, v, phi_m

    w_a, v_a, phi_a = state(m1)
    boundary_start = float(np.sum(mass * v_a * phi_a))
    time_term = 0.0
    flux_far = 0.0
    flux_near = 0.0
    for m in range(m1, m2):
        w_b, v_b, phi_b = state(m + 1)
        time_term -= float(np.sum(mass * 0.5 * (v_a + v_b) * (phi_b - phi_a)))
        dt_m = float(w.times[m + 1] - w.times[m])
        t_mid = 0.5 * (w.times[m] + w.times[m + 1])
        w_mid = 0.5 * (w_a + w_b)
        local = w_mid[vertices]
        w_T = local.mean(axis=1)
        xi = np.einsum('ev,evd->ed', local, grads)
        flux = bar_flux(field, beta, centroids, t_mid, w_T, xi, 0.0)
        pairing = dt_m * volumes * np.sum(flux * phi.gradient(centroids, t_mid), axis=-1)
        if sigma is None:
            flux_far += float(np.sum(pairing))
        else:
            near = np.abs(w_T - P.a) <= sigma
            flux_far += float(np.sum(pairing[~near]))
            flux_near += float(np.sum(pairing[near]))
        w_a, v_a, phi_a = w_b, v_b, phi_b
    boundary = float(np.sum(mass * v_a * phi_a)) - boundary_start
    return {"boundary": boundary, "time": time_term, "flux_far": flux_far, "flux_near": flux_near}


def weak_residual(w, P, phi, window, K):
    parts = weak_form_parts(w, P, phi, window, K)
    return parts["boundary"] + parts["time"] + parts["flux_far"] + parts["flux_near"]
