# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import hashlib
import json
import os
from copy import deepcopy
import yaml
from utils.constants import (
    DEFAULT_CONSTANTS, DEFAULT_DATUM, DEFAULT_EPS2, DEFAULT_EPS4, DEFAULT_EXPERIMENTS, DEFAULT_GRID,
    DEFAULT_MODEL, DEFAULT_SOLVER, SERIALIZED_DIGITS, THREADS_ENV_VAR
)
from utils.precision import mp, mpf
from utils.localization import _
import logging
logger = logging.getLogger(__name__)

SECTIONS = {
    "model": DEFAULT_MODEL,
    "grid": DEFAULT_GRID,
    "datum": DEFAULT_DATUM,
    "constants": DEFAULT_CONSTANTS,
    "solver": DEFAULT_SOLVER,
    "experiments": DEFAULT_EXPERIMENTS,
}

AUTO = "auto"
_DIGITS = SERIALIZED_DIGITS


class ConfigError(ValueError):
    """Invalid or unreadable run configuration; the CLI maps it to exit code 2."""


def thread_cap():
    raw = os.getenv(THREADS_ENV_VAR)
    if raw is None or raw.strip() == "":
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(_("{var} must be a positive integer, got {raw!r}").format(var=THREADS_ENV_VAR, raw=raw))
    if value < 1:
        raise ConfigError(_("{var} must be a positive integer, got {raw!r}").format(var=THREADS_ENV_VAR, raw=raw))
    return value


def _merge_defaults(data, defaults):
    for key, value in defaults.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            _merge_defaults(data[key], value)
        else:
            data.setdefault(key, deepcopy(value))
    return data


def read_config(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = yaml.safe_load(f)
    except FileNotFoundError:
        raise ConfigError(_("Config file not found: {path}").format(path=path))
    except yaml.YAMLError as e:
        raise ConfigError(_("Config file {path} is not valid YAML: {error}").format(path=path, error=e))
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(_("Config file {path} must hold a mapping of sections").format(path=path))
    unknown = sorted(set(data) - set(SECTIONS))
    if unknown:
        raise ConfigError(_("Unknown config section(s): {names}").format(names=", ".join(unknown)))
    for name, section in data.items():
        if section is not None and not isinstance(section, dict):
            raise ConfigError(_("Config section {name} must be a mapping").format(name=name))
    return data


def _as_text(value):
    return mp.nstr(mpf(value), _DIGITS)


def resolve_constants(config):
    """
    Replaces every "auto" entry of the constants section: eps2 = 2^-10,
    eps1 and eps3 from the smallness chain, eps4 = 1/8, theta as the largest
    grid value passing the smallness predicates and lambda0 from
    omega(R0) = 1, stored as its logarithm ``log_lambda0``. Extended-precision
    values are kept as decimal strings.
    """
    from models.exponent_pack import ExponentPack
    from services.iteration_service import eps_constants, select_theta
    model, constants = config["model"], config["constants"]
    if not float(model["p"]) >= 2.0:
        raise ConfigError(_("model.p: p must be at least 2, got {v}").format(v=model["p"]))
    if int(model["n"]) not in (1, 2):
        raise ConfigError(_("model.n: dimension must be 1 or 2, got {v}").format(v=model["n"]))
    try:
        E = ExponentPack(model["p"], model["n"], constants["q"], constants["gamma"])
    except ValueError as e:
        raise ConfigError(str(e))
    resolved = dict(constants)
    if resolved["eps2"] == AUTO:
        resolved["eps2"] = _as_text(DEFAULT_EPS2)
    if AUTO in (resolved["eps1"], resolved["eps3"]):
        eps1, note, eps3 = eps_constants(E, constants["c_ell"], constants["bar_c"], constants["tilde_c"],
                                         eps2=mpf(resolved["eps2"]))
        if resolved["eps1"] == AUTO:
            resolved["eps1"] = _as_text(eps1)
            resolved["eps1_binding"] = note
        if resolved["eps3"] == AUTO:
            resolved["eps3"] = _as_text(eps3)
    if resolved["eps4"] == AUTO:
        resolved["eps4"] = _as_text(DEFAULT_EPS4)
    if resolved["theta"] == AUTO:
        try:
            resolved["theta"] = select_theta(constants["tau"], E.alpha, mpf(resolved["eps4"]))
        except ValueError as e:
            raise ConfigError(f"constants.theta: {e}")
    resolved["lambda0_auto"] = resolved["lambda0"] == AUTO
    if resolved["lambda0"] == AUTO:
        log_lambda0 = mp.exp(mpf(resolved["theta"]) ** (-1 / E.alpha))
    else:
        log_lambda0 = mp.log(mpf(resolved["lambda0"]))
    resolved["log_lambda0"] = _as_text(log_lambda0)
    resolved.pop("lambda0")
    for key in ("eps1", "eps2", "eps3", "eps4"):
        if not isinstance(resolved[key], str):
            resolved[key] = _as_text(resolved[key])
    config["constants"] = resolved
    return config


def config_hash(config):
    """SHA-256 of the canonical JSON of the resolved config; the output directory is not part of it."""
    payload = deepcopy(config)
    payload.get("experiments", {}).pop("output_dir", None)
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def load_config(path, out=None, seed=None):
    data = read_config(path)
    config = {name: dict(data.get(name) or {}) for name in SECTIONS}
    for name, defaults in SECTIONS.items():
        _merge_defaults(config[name], defaults)
    if out is not None:
        config["experiments"]["output_dir"] = out
    if seed is not None:
        if int(seed) < 0 or int(seed) >= 2 ** 64:
            raise ConfigError(_("--seed must be an unsigned 64-bit integer"))
        config["experiments"]["seed"] = int(seed)
    config["config_path"] = os.path.abspath(path)
    try:
        resolve_constants(config)
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(_("Invalid constants section: {error}").format(error=e))
    config["config_hash"] = config_hash({k: v for k, v in config.items() if k != "config_path"})
    logger.info(f"Loaded config {path} (hash {config['config_hash'][:12]})")
    return config
