# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0