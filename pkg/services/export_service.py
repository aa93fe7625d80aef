# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import csv
import json
import math
import os
from enum import Enum
import numpy as np
import yaml
from models.inequality_report import InequalityReport
from utils.precision import mp, as_string
import logging
logger = logging.getLogger(__name__)

CHECK_HEADER = ["name", "lhs", "rhs", "fitted_c", "status"]


def _plain(value):
    """Converts results into JSON/YAML-safe builtins; non-finite floats become strings."""
    if isinstance(value, InequalityReport):
        return _plain(value.to_dict())
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, mp.mpf):
        return as_string(value)
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    return value


def format_cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, mp.mpf):
        return as_string(value)
    if isinstance(value, Enum):
        return str(value.value)
    return str(value)


def write_csv(path, header, rows, config_hash):
    """First line '# config_hash=<sha256>', then the header, then one line per row."""
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(f"# config_hash={config_hash}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_cell(v) for v in row])
    logger.debug(f"Wrote {len(rows)} row(s) to {path}")
    return path


def write_checks(path, reports, config_hash):
    rows = [[r.name, r.lhs, r.rhs, r.fitted_constant, r.status.value] for r in reports]
    return write_csv(path, CHECK_HEADER, rows, config_hash)


def write_summary(path, summary):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(_plain(summary), f, indent=2, sort_keys=True, ensure_ascii=False)
        f.write("\n")
    return path


def write_resolved_config(path, config):
    with open(path, 'w', encoding='utf-8') as f:
        yaml.safe_dump(_plain(config), f, sort_keys=True, allow_unicode=True)
    return path


def read_csv(path):
    """Returns (config_hash, header, rows) of a file written by write_csv."""
    with open(path, 'r', encoding='utf-8', newline='') as f:
        first = f.readline().rstrip("\n")
        reader = csv.reader(f)
        header = next(reader)
        rows = list(reader)
    config_hash = first.split("=", 1)[1] if first.startswith("# config_hash=") else None
    return config_hash, header, rows


def output_path(config, name):
    return os.path.join(config["experiments"]["output_dir"], name)
