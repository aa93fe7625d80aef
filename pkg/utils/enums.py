# Copyright (c) 2025, TheSkyC
# SPDX-License-Identifier: Apache-2.0

from enum import Enum, IntEnum, auto


class NodeKind(IntEnum):
    EXTERIOR = 0
    INTERIOR = 1
    LATERAL = 2
    INITIAL = 3


class CheckStatus(Enum):
    PASS = "pass"
    FAIL = "fail"
    UNDECIDED = "UNDECIDED"

    def get_display_text(self):
        from utils.localization import _
        if self == CheckStatus.PASS:
            return _("pass")
        if self == CheckStatus.FAIL:
            return _("fail")
        return _("undecided")


class AlternativeTag(Enum):
    NO_JUMP = auto()   # b outside [mu-, mu+]
    ALT1 = auto()      # jump far below the supremum
    ALT2_1 = auto()    # near the supremum, jump mass above threshold
    ALT2_2 = auto()    # near the supremum, jump mass below threshold

    def get_display_text(self):
        from utils.localization import _
        if self == AlternativeTag.NO_JUMP:
            return _("No jump in range")
        if self == AlternativeTag.ALT1:
            return _("Jump far below the supremum")
        if self == AlternativeTag.ALT2_1:
            return _("Jump near the supremum, large jump mass")
        return _("Jump near the supremum, small jump mass")


class DatumKind(Enum):
    CONSTANT = "constant"
    HOLDER = "holder"
    SEPARABLE_SINE = "separable_sine"
    TABLE = "table"
    RAMP = "ramp"


class FieldKind(Enum):
    P_LAPLACIAN = "p_laplacian"
    P_LAPLACIAN_WITH_COEFFICIENT = "p_laplacian_with_coefficient"


class CylinderKind(Enum):
    SYMMETRIC = "symmetric"
    STRETCHED = "stretched"
    BACKWARD = "backward"
    WINDOW = "window"


class FamilyKind(Enum):
    LATERAL_1_2 = "lateral_1_2"
    LATERAL_3 = "lateral_3"
    INITIAL = "initial"


class CascadeBranch(Enum):
    UPPER = "upper"
    REFLECTED = "reflected"
    BOUNDARY_DOMINATED = "boundary_dominated"
