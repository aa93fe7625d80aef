# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

"""
The three commands of the command line: build the objects a resolved config
describes, run the requested computations and write the artefacts.
"""

import numpy as np
from models.boundary_datum import BoundaryDatum
from models.cylinder import Cutoff, Cylinder, ShrinkFamily
from models.grid_domain import GridDomain
from models.inequality_report import InequalityReport
from models.model_params import ModelParams
from models.smooth_bump import SmoothBump
from models.solve_config import SolveConfig
from services import analysis_service, convergence_service, export_service, iteration_service
from services.geometry_service import T4, lateral_cylinders, time_scales
from services.model_service import check_outer_density
from services.solver_service import (
    SolverDivergenceError, heat_oracle_error, max_principle_check, solve_regularized, temperature,
    weak_residual
)
from utils.config_manager import ConfigError
from utils.constants import (
    CHECKS_CSV, CONSTANTS_CSV, ENERGY_SCAN_CSV, EXIT_CHECK_FAILED, EXIT_OK, NEWTON_LOG_CSV,
    RESOLVED_CONFIG_YAML, SOLUTION_CSV, SUMMARY_JSON, SWEEP_CSV
)
from utils.enums import AlternativeTag, CheckStatus, FamilyKind
from utils.path_utils import ensure_output_dir, resolve_config_relative
from utils.precision import mp, mpf
from utils.localization import _
import logging
logger = logging.getLogger(__name__)

ORACLE_FACTOR = 5.0


def _config_value_error(e):
    return ConfigError(str(e))


def build_params(config, eps=None):
    model, constants = config["model"], config["constants"]
    try:
        return ModelParams(
            p=model["p"], n=model["n"], Lambda=model["Lambda"], a=model["a"],
            eps=model["eps"] if eps is None else eps, delta=model["delta"], r_Omega=model["r_Omega"],
            q=constants["q"], theta=constants["theta"], tau=constants["tau"],
            eps1=mpf(constants["eps1"]), eps2=mpf(constants["eps2"]), eps3=mpf(constants["eps3"]),
            eps4=mpf(constants["eps4"]), log_lambda0=mpf(constants["log_lambda0"]), R0=constants["R0"],
            beta_kappa=model["beta_kappa"], alpha_tilde=constants["alpha_tilde"], M_tilde=constants["M_tilde"],
            c_ell=constants["c_ell"], bar_c=constants["bar_c"], tilde_c=constants["tilde_c"],
            gamma=constants["gamma"], field=model["field"],
            coefficient_amplitude=model["coefficient_amplitude"], strict=constants["strict"],
        )
    except (TypeError, ValueError) as e:
        raise _config_value_error(e)


def build_domain(config):
    grid = config["grid"]
    layout = grid["domain"] or {}
    kind = layout.get("kind", "interval")
    n = int(config["model"]["n"])
    try:
        if kind == "interval":
            x_min, x_max = (float(b) for b in layout.get("bounds", [0.0, 1.0]))
            domain = GridDomain.interval(x_min, x_max, grid["h"], grid["T"], grid["dt"], periodic=grid["periodic"])
        elif kind == "rectangle":
            domain = GridDomain.rectangle(layout["bounds"], grid["h"], grid["T"], grid["dt"])
        elif kind == "mask":
            path = resolve_config_relative(config["config_path"], layout["file"])
            mask = np.loadtxt(path, dtype=int, ndmin=2) != 0
            domain = GridDomain.from_mask(mask, grid["h"], grid["T"], grid["dt"], origin=layout.get("origin"))
        else:
            raise ValueError(_("grid.domain.kind must be interval, rectangle or mask, got '{kind}'").format(kind=kind))
    except (KeyError, OSError, TypeError, ValueError) as e:
        raise ConfigError(_("grid.domain: {error}").format(error=e))
    if domain.n != n:
        raise ConfigError(_("grid.domain: dimension {d} does not match model.n = {n}").format(d=domain.n, n=n))
    return domain


def build_datum(config):
    try:
        return BoundaryDatum.from_dict(config["datum"], p=config["model"]["p"], n=config["model"]["n"])
    except (TypeError, ValueError) as e:
        raise ConfigError(_("datum: {error}").format(error=e))


def build_solve_config(config):
    try:
        return SolveConfig.from_dict(config["solver"])
    except (TypeError, ValueError) as e:
        raise _config_value_error(e)


def build_point(config, domain):
    """Boundary point, radius and oscillation bound of the local analysis; x0 defaults to the domain origin."""
    point = config["experiments"]["point"]
    x0 = domain.origin if point.get("x0") is None else np.atleast_1d(np.asarray(point["x0"], dtype=float))
    t0 = domain.T if point.get("t0") is None else float(point["t0"])
    return x0, t0, float(point["r"]), float(point["omega"])


def build_test_function(config, domain):
    bump_cfg = config["experiments"]["test_function"]
    center = bump_cfg.get("center")
    if center is None:
        center = domain.origin + 0.5 * domain.h * (np.asarray(domain.shape) - 1)
    window = bump_cfg.get("window") or [0.0, domain.T]
    try:
        bump = SmoothBump(center, bump_cfg["radius"], bump_cfg.get("profile") or "sine", window=window)
    except (TypeError, ValueError) as e:
        raise _config_value_error(e)
    return bump, window, bump.support_box


def build_iteration(config, P, E):
    """The iteration sequences of the constants section, hand-set overrides included."""
    constants = config["constants"]
    return iteration_service.build_sequences(P, E, constants["J"], omega_override=constants["omega_override"],
                                             radius_override=constants["radius_override"])


def _failed_report(name, error):
    logger.error(f"Check {name} could not be evaluated: {error}")
    return InequalityReport(name, status=CheckStatus.FAIL, detail={"error": str(error)})


def _status_of(reports):
    return EXIT_CHECK_FAILED if any(r.status == CheckStatus.FAIL for r in reports) else EXIT_OK


def _prepare_output(config):
    out = ensure_output_dir(config["experiments"]["output_dir"])
    resolved = {k: v for k, v in config.items() if k not in ("config_path", "config_hash")}
    export_service.write_resolved_config(export_service.output_path(config, RESOLVED_CONFIG_YAML), resolved)
    return out


# verify-constants

def _row(check, index, value, margin, passed):
    return [check, index, value, margin, "pass" if passed else "fail"]


def constants_self_test(config):
    """Rows (check, index, value, margin, status) of every constants check."""
    P = build_params(config)
    E = P.exponents()
    experiments = config["experiments"]
    rows = []
    rows.append(_row("q_bar", "", E.q_bar, E.q - E.q_bar, E.q > E.q_bar))
    rows.append(_row("kappa", "", E.kappa_label, E.zeta, E.zeta > 0))
    rows.append(_row("eps1", "", mpf(P.eps1), config["constants"].get("eps1_binding", "given"), mpf(P.eps1) > 0))
    predicates = iteration_service.theta_predicates(P.theta, P.tau, E.alpha, mpf(P.eps4))
    for key, ok in sorted(predicates.items()):
        rows.append(_row(f"theta.{key}", "", P.theta, "", ok))
    if config["constants"].get("lambda0_auto", True):
        omega_R0 = iteration_service.modulus(P.R0, P.R0, P.theta, E.alpha, log_lambda0=P.log_lambda0)
        rows.append(_row("modulus_anchor", "", omega_R0, omega_R0 - 1, abs(omega_R0 - 1) <= mpf("1e-14")))
    delta_tilde = None
    try:
        S = build_iteration(config, P, E)
    except ValueError as e:
        logger.warning(f"Sequence construction failed: {e}")
        rows.append(_row("build_sequences", "", str(e), "", False))
        S = None
    if S is not None:
        rows.append(_row("build_sequences", S.J, S.omega[-1], "truncated" if S.truncated else "", True))
        for item in iteration_service.verify_sequence_claims(S):
            rows.append(_row("recursion", item["j"], item["lhs"], item["recursion_margin"], item["recursion"]))
            rows.append(_row("doubling", item["j"], item["lhs"], item["doubling_margin"], item["doubling"]))
        delta_tilde = iteration_service.tilde_delta(S)
    if delta_tilde is not None:
        rows.append(_row("tilde_delta", "", delta_tilde, "", delta_tilde > 0))
    omega = mpf(experiments["point"]["omega"])
    try:
        T1, T2, T3, wt = time_scales(omega, experiments["point"]["r"], P)
        rows.append(_row("time_scales", "", T3, T2 - T1, True))
        rows.append(_row("tilde_omega", "", wt, mpf(P.eps1) * omega / 2 - wt, wt < mpf(P.eps1) * omega / 2))
    except ValueError as e:
        rows.append(_row("time_scales", "", str(e), "", "underflows" in str(e)))
    ladder = experiments["h_ladder"]
    values = []
    for k in range(1, int(ladder["points"]) + 1):
        eps = mp.exp(-mpf(ladder["base"]) ** k) / 2
        h = iteration_service.h_of_eps(eps, ladder["tau"], ladder["alpha"])
        residual = iteration_service.h_of_eps_residual(h, eps, ladder["tau"], ladder["alpha"])
        rows.append(_row("h_of_eps", k, h, residual, residual <= mpf('1e-13')))
        values.append(h)
    monotone = all(b < a for a, b in zip(values, values[1:]))
    rows.append(_row("h_of_eps.monotone", "", values[-1], values[0] / 10 - values[-1],
                     monotone and values[-1] < values[0] / 10))
    hyper = experiments["hypergeometric"]
    rng = np.random.default_rng(int(experiments["seed"]))
    failures = 0
    for _draw in range(int(hyper["draws"])):
        C = 1.0 + 3.0 * rng.random()
        b = 2.0 + 2.0 * rng.random()
        zeta = 0.1 + 0.9 * rng.random()
        threshold = mpf(C) ** (-1 / mpf(zeta)) * mpf(b) ** (-1 / mpf(zeta) ** 2)
        A0 = threshold * mpf(0.05 + 0.9 * rng.random())
        result = iteration_service.hypergeometric_iteration(C, b, zeta, A0, hyper["steps"])
        if not (result["converged"] and result["bounded"]):
            failures += 1
    rows.append(_row("hypergeometric.below_threshold", int(hyper["draws"]), failures, "", failures == 0))
    counter = iteration_service.hypergeometric_iteration(2, 2, 0.5, mpf(2) ** -3, 10)
    rows.append(_row("hypergeometric.counterexample", 10, counter["sequence"][-1], "", counter["diverged"]))
    return rows


def cmd_verify_constants(config):
    _prepare_output(config)
    rows = constants_self_test(config)
    failed = [row for row in rows if row[-1] == "fail"]
    export_service.write_csv(export_service.output_path(config, CONSTANTS_CSV),
                             ["check", "index", "value", "margin", "status"], rows, config["config_hash"])
    summary = {
        "command": "verify-constants", "config_hash": config["config_hash"],
        "checks": len(rows), "failed": [[row[0], row[1]] for row in failed],
        "status": "fail" if failed else "pass",
    }
    export_service.write_summary(export_service.output_path(config, SUMMARY_JSON), summary)
    for row in failed:
        logger.warning(f"Constants check failed: {row[0]} index={row[1]}")
    logger.info(f"verify-constants: {len(rows) - len(failed)}/{len(rows)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


# solve

def _solution_rows(w, u):
    domain = w.domain
    nodes = np.argwhere(domain.mask)
    rows = []
    for m, t in enumerate(w.times):
        for node in nodes:
            index = tuple(node)
            rows.append([m, float(t)] + [float(c) for c in domain.coords[index]]
                        + [float(w.values[(m,) + index]), float(u.values[(m,) + index])])
    return rows


def _default_level(w, Q):
    """Midway between the boundary supremum inside Q and the supremum over Q."""
    selection = Q.contains(w.domain, w.times) & np.isfinite(w.values)
    boundary = np.zeros(w.values.shape, dtype=bool)
    boundary[:, w.domain.lateral] = True
    boundary[0, w.domain.mask] = True
    boundary &= selection
    top = float(np.max(w.values[selection]))
    base = float(np.max(w.values[boundary])) if np.any(boundary) else float(np.min(w.values[selection]))
    return base + 0.5 * (top - base) if top > base else base + 1e-6


def run_checks(names, w, config, D, P, g, C):
    experiments = config["experiments"]
    x0, t0, r, omega = build_point(config, D)
    E = P.exponents()
    reports = []
    for name in names:
        try:
            if name == "max_principle":
                reports.append(max_principle_check(w, g, P.beta(), C.max_principle_tol))
            elif name == "heat_oracle":
                error = heat_oracle_error(w, g)
                bound = ORACLE_FACTOR * (D.h ** 2 + D.dt)
                status = CheckStatus.PASS if error <= bound else CheckStatus.FAIL
                reports.append(InequalityReport("heat_oracle", lhs=error, rhs_terms={"5(h^2+dt)": bound},
                                                status=status))
            elif name == "outer_density":
                reports.append(check_outer_density(D, P.delta, P.r_Omega))
            elif name == "weak_residual":
                phi, window, K = build_test_function(config, D)
                value = weak_residual(w, P, phi, window, K)
                reports.append(InequalityReport("weak_residual", lhs=abs(value), status=CheckStatus.PASS,
                                                detail={"residual": value, "window": list(window)}))
            elif name == "caccioppoli":
                family = ShrinkFamily(FamilyKind.LATERAL_3, x0, t0, 2.0 * r, 2.0 * omega ** (2.0 - P.p) * r ** P.p, P.p)
                phi = Cutoff(family, 0)
                Q = phi.cylinder
                k = experiments["level"] if experiments["level"] is not None else _default_level(w, Q)
                reports.append(analysis_service.caccioppoli_check(w, Q, k, phi, P.heaviside(), P.p))
            elif name == "sobolev":
                phi, window, _K = build_test_function(config, D)
                box_center = phi.center
                Q = Cylinder(box_center, window[1], phi.radius * np.sqrt(D.n), window[0], window[1])
                reports.append(analysis_service.sobolev_check(w, phi, Q, E))
            elif name == "classify" or name == "density":
                cylinders = lateral_cylinders(x0, t0, r, omega, P)
                tag, witness = analysis_service.classify_alternative(w, cylinders[3], P, omega)
                reports.append(InequalityReport("classify", lhs=witness.get("jump_average", 0.0),
                                                status=CheckStatus.PASS, detail=dict(witness, tag=tag.name)))
                if name == "density" and tag != AlternativeTag.NO_JUMP:
                    reports.extend(analysis_service.density_estimates(w, cylinders, P, omega, tag=tag))
            elif name == "log_lemma":
                Q = Cylinder(x0, 0.0, r, 0.0, T4(omega, r, D.T, P.p), label="log_lemma")
                reports.append(analysis_service.log_lemma_check(w, Q, experiments["thetas"], omega))
            elif name == "cascade":
                result = analysis_service.oscillation_cascade(w, x0, t0, P, E, g, config["constants"]["J"],
                                                              S=build_iteration(config, P, E))
                reports.extend([result["report"], result["modulus"]])
            elif name == "lateral_reduction":
                reports.append(analysis_service.lateral_reduction_check(w, x0, t0, r, omega, P))
            elif name == "initial_reduction":
                reports.append(analysis_service.initial_reduction_check(w, x0, r, omega, P, D.T))
            elif name == "quantified_modulus":
                S = build_iteration(config, P, E)
                reports.append(analysis_service.quantified_modulus_check(w, x0, t0, S, P))
            else:
                raise ConfigError(_("experiments.checks: unknown check '{name}'").format(name=name))
        except ConfigError:
            raise
        except ValueError as e:
            reports.append(_failed_report(name, e))
    return reports


def cmd_solve(config):
    D = build_domain(config)
    P = build_params(config)
    g = build_datum(config)
    C = build_solve_config(config)
    _prepare_output(config)
    summary = {"command": "solve", "config_hash": config["config_hash"], "grid": D.to_dict(),
               "params": P.to_dict(), "one_dimensional": D.n == 1}
    try:
        w, log = solve_regularized(D, P, g, C)
    except SolverDivergenceError as e:
        logger.error(str(e))
        summary.update({"status": "fail", "error": str(e), "step": e.step, "time": e.time})
        export_service.write_summary(export_service.output_path(config, SUMMARY_JSON), summary)
        return EXIT_CHECK_FAILED
    u = temperature(w, P.beta())
    header = ["level", "time"] + ["x", "y"][:D.n] + ["w", "u"]
    export_service.write_csv(export_service.output_path(config, SOLUTION_CSV), header, _solution_rows(w, u),
                             config["config_hash"])
    export_service.write_csv(export_service.output_path(config, NEWTON_LOG_CSV),
                             ["t_step", "time", "iters", "final_residual", "mu_final"],
                             [[row["t_step"], row["time"], row["iters"], row["final_residual"], row["mu_final"]]
                              for row in log], config["config_hash"])
    reports = run_checks(config["experiments"]["checks"], w, config, D, P, g, C)
    export_service.write_checks(export_service.output_path(config, CHECKS_CSV), reports, config["config_hash"])
    code = _status_of(reports)
    summary.update({"status": "pass" if code == EXIT_OK else "fail", "checks": reports,
                    "newton": {"steps": len(log), "max_iters": max((row["iters"] for row in log), default=0),
                               "max_residual": max((row["final_residual"] for row in log), default=0.0)}})
    export_service.write_summary(export_service.output_path(config, SUMMARY_JSON), summary)
    for report in reports:
        logger.info(f"{report.name}: {report.status.value}")
    return code


# sweep

def cmd_sweep(config):
    D = build_domain(config)
    P = build_params(config)
    g = build_datum(config)
    C = build_solve_config(config)
    sweep = config["experiments"]["sweep"]
    try:
        eps_list = convergence_service.check_eps_list(sweep["eps_list"], D, P.beta())
    except ValueError as e:
        raise ConfigError(str(e))
    _prepare_output(config)
    summary = {"command": "sweep", "config_hash": config["config_hash"], "eps_list": eps_list}
    try:
        S = convergence_service.run_sweep(D, P, g, eps_list, C)
    except SolverDivergenceError as e:
        logger.error(str(e))
        summary.update({"status": "fail", "error": str(e), "eps": getattr(e, "eps", None)})
        export_service.write_summary(export_service.output_path(config, SUMMARY_JSON), summary)
        return EXIT_CHECK_FAILED

    reports = list(S.diagnostics["max_principle"])
    reports.append(convergence_service.cauchy_trend(S))
    E = P.exponents()
    sequences = iteration_service.build_sequences(P, E, config["constants"]["J"])
    omega_bar = convergence_service.bar_omega_builder(sequences.modulus, g)
    h_map = convergence_service.default_h_map(P, E.alpha)
    reports.append(convergence_service.equi_modulus_check(S, omega_bar, h_map, pairs=sweep["pairs"],
                                                          seed=config["experiments"]["seed"],
                                                          fit_slack=sweep["fit_slack"]))
    try:
        gradients = convergence_service.gradient_convergence_in_measure(S, sweep["sigma"], sweep["rho"])
        reports.append(gradients["report"])
    except ValueError as e:
        reports.append(_failed_report("gradient_convergence", e))
        gradients = {"pairs": []}
    phi, window, K = build_test_function(config, D)
    energy_rows = []
    energy_reports = []
    for eps, w in zip(S.eps_list, S.solutions):
        scan = convergence_service.energy_scan(w, sweep["sigma_list"], phi, P.a, P.p, eps=eps)
        energy_rows.extend(scan["rows"])
        energy_reports.append(scan["report"])
    reports.extend(energy_reports)
    try:
        limit = convergence_service.limit_passage_terms(S, min(sweep["sigma_list"]), phi, window, K,
                                                        sigmas=sweep["sigma_list"])
        reports.append(limit["report"])
    except ValueError as e:
        reports.append(_failed_report("limit_passage", e))
        limit = None

    previous = [None] + S.consecutive_distances
    sweep_rows = [[eps, i, previous[i], S.diagnostics["max_principle"][i].fitted_constant]
                  for i, eps in enumerate(S.eps_list)]
    export_service.write_csv(export_service.output_path(config, SWEEP_CSV),
                             ["eps", "run_id", "sup_distance_to_prev", "max_principle_margin"], sweep_rows,
                             config["config_hash"])
    export_service.write_csv(export_service.output_path(config, ENERGY_SCAN_CSV),
                             ["eps", "sigma", "energy", "fitted_slope"],
                             [[row["eps"], row["sigma"], row["energy"], row["fitted_slope"]] for row in energy_rows],
                             config["config_hash"])
    export_service.write_checks(export_service.output_path(config, CHECKS_CSV), reports, config["config_hash"])
    max_distance = float(np.max(S.distances)) if len(S) > 1 else 0.0
    code = _status_of(reports)
    summary.update({
        "status": "pass" if code == EXIT_OK else "fail",
        "checks": reports,
        "distances": S.consecutive_distances,
        "eps_independent": bool(max_distance <= C.max_principle_tol),
        "gradient_measures": gradients["pairs"],
        "energy_slopes": [None if r.status == CheckStatus.UNDECIDED else r.lhs for r in energy_reports],
        "limit_terms": None if limit is None else {"terms": limit["terms"], "total": limit["total"],
                                                   "tau_slope": limit["tau_slope"], "tau_r2": limit["tau_r2"]},
    })
    export_service.write_summary(export_service.output_path(config, SUMMARY_JSON), summary)
    return code
