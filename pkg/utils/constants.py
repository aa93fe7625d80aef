# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

APP_NAME = "stefan-lab"
APP_VERSION = "0.3.0"

THREADS_ENV_VAR = "STEFAN_LAB_THREADS"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2

# Extended precision used by the constants engine (decimal digits).
EXTENDED_DPS = 50
# significant digits of auto-resolved constants in a resolved config
SERIALIZED_DIGITS = 30

MOLLIFIER_PANELS = 256
MOLLIFIER_GAUSS_POINTS = 8
HEAVISIDE_EDGE_TOL = 1e-12

ENTHALPY_INVERT_RTOL = 1e-12
BETA_INVERT_ITERATIONS = 64

MU_SCHEDULE = [1e-2, 1e-4, 1e-6, 1e-8]
UNDECIDED_MIN_NODES = 8
OSC_TOL = 1e-12
REFINEMENT_STABILITY = 0.5

THETA_GRID_STEP = 0.01
THETA_SMALLNESS_BOUND = 1.0 / 32.0
H_OF_EPS_RTOL = 1e-14
H_OF_EPS_MAX_BISECTIONS = 400

SOLUTION_CSV = "solution.csv"
NEWTON_LOG_CSV = "newton_log.csv"
CONSTANTS_CSV = "constants.csv"
CHECKS_CSV = "checks.csv"
SWEEP_CSV = "sweep.csv"
ENERGY_SCAN_CSV = "energy_scan.csv"
SUMMARY_JSON = "summary.json"
RESOLVED_CONFIG_YAML = "resolved_config.yaml"

DEFAULT_MODEL = {
    "p": 2.0,
    "n": 1,
    "Lambda": 1.0,
    "a": 0.0,
    "eps": 0.05,
    "beta_kappa": 0.0,
    "delta": 0.5,
    "r_Omega": 0.25,
    "field": "p_laplacian",
    "coefficient_amplitude": 0.0,
}

DEFAULT_GRID = {
    "h": 1.0 / 32.0,
    "dt": 1.0 / 256.0,
    "T": 0.125,
    "domain": {"kind": "interval", "bounds": [0.0, 1.0]},
    "periodic": False,
}

DEFAULT_DATUM = {
    "kind": "constant",
    "value": 0.0,
    "gamma": 0.5,
    "amplitude": 1.0,
    "offset": 0.0,
    "center": 0.5,
    "frequency": 1,
    "rate": "auto",
    "cold": -0.5,
    "hot": 0.5,
    "t_ramp": 0.05,
}

DEFAULT_CONSTANTS = {
    "q": 3.0,
    "theta": "auto",
    "tau": 0.25,
    "eps1": "auto",
    "eps2": "auto",
    "eps3": "auto",
    "eps4": "auto",
    "lambda0": "auto",
    "R0": 1.0,
    "c_ell": 1.0,
    "bar_c": 1.0,
    "tilde_c": 1.0,
    "alpha_tilde": 0.25,
    "M_tilde": 1.0,
    "gamma": 0.5,
    "J": 20,
    "strict": True,
    "omega_override": None,
    "radius_override": None,
}

DEFAULT_EPS2 = 2.0 ** -10
DEFAULT_EPS4 = 0.125

DEFAULT_SOLVER = {
    "newton_tol": 1e-10,
    "newton_max_iter": 30,
    "mu_schedule": list(MU_SCHEDULE),
    "linesearch": {"factor": 0.5, "max_steps": 12},
}

DEFAULT_EXPERIMENTS = {
    "checks": ["max_principle"],
    "output_dir": "out",
    "seed": 0,
    "point": {"x0": None, "t0": None, "r": 0.25, "omega": 1.0},
    "level": None,
    "thetas": [0.25, 0.0625, 0.015625],
    "test_function": {"center": None, "radius": 0.25, "profile": "sine", "window": None},
    "sweep": {
        "eps_list": [0.2, 0.1, 0.05, 0.025],
        "sigma_list": [0.2, 0.1, 0.05, 0.025],
        "sigma": 0.3,
        "rho": 0.1,
        "pairs": 2000,
        "fit_slack": 1e-8,
    },
    "h_ladder": {"tau": 0.1, "alpha": 0.24, "base": 3, "points": 12},
    "hypergeometric": {"draws": 1000, "steps": 40},
}
