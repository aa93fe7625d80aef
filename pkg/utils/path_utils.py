# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import os

PACKAGE_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def get_resource_path(relative_path: str) -> str:
    return os.path.join(PACKAGE_ROOT, relative_path)


def resolve_config_relative(config_path: str, target: str) -> str:
    """Paths inside a run config are relative to the config file itself."""
    if os.path.isabs(target):
        return target
    return os.path.join(os.path.dirname(os.path.abspath(config_path)), target)


def ensure_output_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
