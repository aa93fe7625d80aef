# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import os
import numpy as np
import pytest
import yaml
from models.boundary_datum import BoundaryDatum
from models.grid_domain import GridDomain
from models.grid_function import GridFunction
from models.model_params import ModelParams
from models.solve_config import SolveConfig

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_DIR = os.path.join(ROOT, "configs")


def config_path(name):
    return os.path.join(CONFIG_DIR, name)


@pytest.fixture
def rng():
    return np.random.default_rng(20250101)


@pytest.fixture
def make_params():
    def build(**overrides):
        values = {"strict": False}
        values.update(overrides)
        return ModelParams(**values)
    return build


@pytest.fixture
def make_interval():
    def build(h=1.0 / 32.0, dt=1.0 / 128.0, T=1.0 / 16.0, periodic=False):
        return GridDomain.interval(0.0, 1.0, h, T, dt, periodic=periodic)
    return build


@pytest.fixture
def grid_function():
    def build(domain, func):
        return GridFunction.from_callable(domain, func)
    return build


@pytest.fixture
def heat_datum():
    return BoundaryDatum("separable_sine", p=2.0, n=1, amplitude=1.0, frequency=1)


@pytest.fixture
def solve_config():
    return SolveConfig()


@pytest.fixture
def write_config(tmp_path):
    """Writes a YAML run config into tmp_path and returns its path."""
    def write(data, name="run.yaml"):
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data, sort_keys=True), encoding="utf-8")
        return str(path)
    return write


@pytest.fixture
def config_file():
    return config_path
