# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import json
import os
import pytest
from main import main
from services.export_service import read_csv


def _run(command, config, out, *extra):
    return main([command, "--config", config, "--out", str(out), *extra])


def _summary(out):
    with open(os.path.join(out, "summary.json"), encoding="utf-8") as f:
        return json.load(f)


class TestUsage:
    def test_missing_config(self):
        assert main(["solve"]) == 2

    def test_unknown_command(self, config_file):
        assert main(["plot", "--config", config_file("default.yaml")]) == 2

    def test_seed_must_be_unsigned(self, config_file, tmp_path):
        assert _run("solve", config_file("default.yaml"), tmp_path, "--seed", "-1") == 2

    def test_version(self):
        assert main(["--version"]) == 0


class TestVerifyConstants:
    def test_default_constants_pass(self, config_file, tmp_path):
        assert _run("verify-constants", config_file("default.yaml"), tmp_path) == 0
        config_hash, header, rows = read_csv(os.path.join(tmp_path, "constants.csv"))
        assert header == ["check", "index", "value", "margin", "status"]
        assert all(row[-1] == "pass" for row in rows)
        summary = _summary(tmp_path)
        assert summary["status"] == "pass" and summary["config_hash"] == config_hash
        assert os.path.exists(os.path.join(tmp_path, "resolved_config.yaml"))

    def test_q_at_q_bar_is_a_config_error(self, config_file, tmp_path):
        assert _run("verify-constants", config_file("bad_q.yaml"), tmp_path) == 2

    def test_doubling_violation_fails(self, config_file, tmp_path):
        assert _run("verify-constants", config_file("doubling_violation.yaml"), tmp_path) == 1
        failed = _summary(tmp_path)["failed"]
        assert ["doubling", 0] in failed

    def test_unparseable_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("constants: {q: [\n", encoding="utf-8")
        assert _run("verify-constants", str(path), tmp_path / "out") == 2


class TestSolve:
    def test_constant_datum(self, config_file, tmp_path):
        assert _run("solve", config_file("constant_datum.yaml"), tmp_path) == 0
        _hash, header, rows = read_csv(os.path.join(tmp_path, "solution.csv"))
        assert header == ["level", "time", "x", "w", "u"]
        assert len(rows) == 9 * 33
        assert all(float(row[3]) == 0.25 for row in rows)
        statuses = {check["name"]: check["status"] for check in _summary(tmp_path)["checks"]}
        assert statuses["oscillation_cascade"] == "UNDECIDED"
        assert statuses["max_principle"] == "pass"

    def test_heat_oracle(self, config_file, tmp_path):
        assert _run("solve", config_file("heat_oracle.yaml"), tmp_path) == 0
        _hash, _header, rows = read_csv(os.path.join(tmp_path, "checks.csv"))
        assert [row[0] for row in rows] == ["heat_oracle", "max_principle"]

    def test_output_is_reproducible(self, config_file, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        assert _run("solve", config_file("constant_datum.yaml"), first) == 0
        assert _run("solve", config_file("constant_datum.yaml"), second) == 0
        for name in ("solution.csv", "newton_log.csv", "checks.csv", "summary.json"):
            with open(first / name, "rb") as a, open(second / name, "rb") as b:
                assert a.read() == b.read(), name

    def test_divergence_exits_with_failure(self, write_config, tmp_path):
        path = write_config({
            "model": {"p": 2.0, "a": 10.0},
            "grid": {"h": 0.03125, "dt": 0.0078125, "T": 0.0625},
            "datum": {"kind": "separable_sine"},
            "solver": {"newton_tol": 1e-300, "newton_max_iter": 2},
        })
        assert _run("solve", path, tmp_path / "out") == 1
        summary = _summary(tmp_path / "out")
        assert summary["status"] == "fail" and summary["step"] == 1

    def test_unknown_check_is_a_config_error(self, write_config, tmp_path):
        path = write_config({"experiments": {"checks": ["no_such_check"]}})
        assert _run("solve", path, tmp_path / "out") == 2


class TestSweep:
    def test_inactive_jump_is_eps_independent(self, config_file, tmp_path):
        assert _run("sweep", config_file("sweep_inactive.yaml"), tmp_path) == 0
        summary = _summary(tmp_path)
        assert summary["eps_independent"] is True
        assert summary["distances"] == [0.0, 0.0]
        _hash, header, rows = read_csv(os.path.join(tmp_path, "sweep.csv"))
        assert header == ["eps", "run_id", "sup_distance_to_prev", "max_principle_margin"]
        assert [row[0] for row in rows] == ["0.4", "0.2", "0.1"]

    def test_unresolvable_eps_is_rejected(self, write_config, tmp_path):
        path = write_config({
            "grid": {"h": 0.0625, "dt": 0.015625, "T": 0.0625},
            "experiments": {"sweep": {"eps_list": [0.1]}},
        })
        assert _run("sweep", path, tmp_path / "out") == 2

    @pytest.mark.slow
    def test_thread_cap_keeps_output_identical(self, config_file, tmp_path, monkeypatch):
        monkeypatch.setenv("STEFAN_LAB_THREADS", "1")
        assert _run("sweep", config_file("sweep_inactive.yaml"), tmp_path / "serial") == 0
        monkeypatch.setenv("STEFAN_LAB_THREADS", "3")
        assert _run("sweep", config_file("sweep_inactive.yaml"), tmp_path / "threaded") == 0
        with open(tmp_path / "serial" / "sweep.csv", "rb") as a, open(tmp_path / "threaded" / "sweep.csv", "rb") as b:
            assert a.read() == b.read()

    @pytest.mark.slow
    def test_acceptance_sweep_on_the_active_jump(self, config_file, tmp_path):
        code = _run("sweep", config_file("sweep_acceptance.yaml"), tmp_path)
        assert code in (0, 1)
        summary = _summary(tmp_path)
        statuses = {}
        for check in summary["checks"]:
            statuses.setdefault(check["name"], []).append(check)
        assert statuses["cauchy_trend"][0]["status"] == "pass"
        energy = statuses["near_jump_energy"]
        assert [check["detail"]["eps"] for check in energy] == [0.2, 0.1, 0.05, 0.025]
        assert energy[-1]["status"] == "pass"
        assert energy[-1]["lhs"] >= 0.8
        assert len(summary["energy_slopes"]) == 4
        _hash, header, rows = read_csv(os.path.join(tmp_path, "energy_scan.csv"))
        assert len(rows) == 16


class TestServiceErrors:
    def test_rejected_input_is_a_config_error(self, write_config, tmp_path):
        path = write_config({
            "datum": {"kind": "constant", "value": 0.25},
            "experiments": {"checks": ["max_principle"], "point": {"r": "wide"}},
        })
        assert _run("solve", path, tmp_path / "out") == 2


class TestResolvedCascade:
    def test_every_index_passes(self, config_file, tmp_path):
        assert _run("solve", config_file("cascade_resolved.yaml"), tmp_path) == 0
        checks = {check["name"]: check for check in _summary(tmp_path)["checks"]}
        cascade = checks["oscillation_cascade"]
        assert cascade["status"] == "pass"
        assert [row["j"] for row in cascade["detail"]["rows"]] == [0, 1, 2, 3, 4]
        assert all(row["pass"] for row in cascade["detail"]["rows"])
        assert checks["modulus_endpoint"]["status"] == "pass"
