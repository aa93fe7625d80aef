# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import json
import math
import numpy as np
import yaml
from models.inequality_report import InequalityReport
from services.export_service import (
    format_cell, read_csv, write_checks, write_csv, write_resolved_config, write_summary
)
from utils.enums import CheckStatus
from utils.precision import mpf

HASH = "ab" * 32


def test_csv_starts_with_config_hash(tmp_path):
    path = str(tmp_path / "rows.csv")
    write_csv(path, ["level", "value"], [[0, 0.5], [1, None]], HASH)
    with open(path, encoding="utf-8") as f:
        lines = f.read().splitlines()
    assert lines[0] == f"# config_hash={HASH}"
    assert lines[1] == "level,value"
    assert lines[2:] == ["0,0.5", "1,"]
    config_hash, header, rows = read_csv(path)
    assert config_hash == HASH and header == ["level", "value"] and rows == [["0", "0.5"], ["1", ""]]


def test_cells_keep_full_precision():
    assert format_cell(0.1) == "0.1"
    assert float(format_cell(1.0 / 3.0)) == 1.0 / 3.0
    assert format_cell(True) == "true"
    assert format_cell(np.int64(4)) == "4"
    assert format_cell(CheckStatus.UNDECIDED) == "UNDECIDED"
    assert format_cell(mpf(2) ** -10).startswith("0.0009765625")


def test_checks_file_uses_report_rows(tmp_path):
    path = str(tmp_path / "checks.csv")
    reports = [
        InequalityReport("caccioppoli", lhs=2.0, rhs_terms={"gradient": 1.0, "time": 0.5}, fitted_constant=4.0 / 3.0),
        InequalityReport.undecided("oscillation_cascade", "no index resolved by the grid"),
    ]
    write_checks(path, reports, HASH)
    _hash, header, rows = read_csv(path)
    assert header == ["name", "lhs", "rhs", "fitted_c", "status"]
    assert rows[0][0] == "caccioppoli" and float(rows[0][2]) == 1.5 and rows[0][4] == "pass"
    assert rows[1][3] == "" and rows[1][4] == "UNDECIDED"


def test_summary_is_plain_json(tmp_path):
    path = str(tmp_path / "summary.json")
    report = InequalityReport("modulus_endpoint", lhs=1.0, fitted_constant=math.inf, status=CheckStatus.FAIL)
    write_summary(path, {"checks": [report], "value": mpf(1) / 4, "flags": np.array([True, False]),
                         "status": CheckStatus.PASS})
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    assert data["checks"][0]["fitted_constant"] == "inf"
    assert data["checks"][0]["status"] == "fail"
    assert data["value"].startswith("0.25")
    assert data["flags"] == [True, False]
    assert data["status"] == "pass"


def test_resolved_config_round_trips_through_yaml(tmp_path):
    path = str(tmp_path / "resolved.yaml")
    write_resolved_config(path, {"constants": {"eps1": mpf(2) ** -12, "J": 20}, "model": {"p": 2.0}})
    with open(path, encoding="utf-8") as f:
        data = yaml.safe_load(f)
    assert data["constants"]["J"] == 20 and data["model"]["p"] == 2.0
    assert isinstance(data["constants"]["eps1"], str)
