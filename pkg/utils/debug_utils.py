# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

import os

IS_DEBUG_MODE = False

# STEFAN_LAB_DEBUG wins over the generic DEBUG switch.
DEBUG_ENV_VARS = ("STEFAN_LAB_DEBUG", "DEBUG")


def setup_debug_mode():
    global IS_DEBUG_MODE
    for name in DEBUG_ENV_VARS:
        value = os.getenv(name)
        if value is not None:
            IS_DEBUG_MODE = value.lower() in ('1', 'true', 'on', 'yes')
            break
    return IS_DEBUG_MODE
