#!/usr/bin/env python3
"""
部分代数 {X₂, X₁ − 2(q/Ω)X₃} による進行波型の不変解

    h = y⁴H(z), u = −2q/Ω + y²U(z), v = y²V(z), z = (x + 2(q/Ω)t)/y

縮約系の右辺は q を含みません．
"""

from __future__ import annotations

import enum

from swinv.reduced.common import (
    DEFAULT_DENOM_FLOOR,
    Denominator,
    DenominatorReport,
    ModelParams,
    ReducedDerivative,
    ReducedState,
    checked_divide,
)


class Case2Variant(enum.Enum):
    """V′ の分母の選択"""

    AS_PRINTED = "as_printed"
    DH_DENOMINATOR = "dh_denominator"


def rhs_case2(
    z: float,
    st: ReducedState,
    p: ModelParams,
    variant: Case2Variant = Case2Variant.AS_PRINTED,
    floor: float = DEFAULT_DENOM_FLOOR,
) -> ReducedDerivative:
    H, U, V = st.H, st.U, st.V
    w = p.omega
    q3 = p.q3
    z2 = z * z

    n_h = 8.0 * H * H * z + H * (w * U * z + w * V - 4.0 * q3 * z + 4.0 * U * V - 4.0 * V * V * z)
    d_h = 2.0 * H * (z2 + 1.0) - (U - V * z) ** 2
    n_u = (
        -16.0 * H * H * z
        + 2.0
        * H
        * (-w * U * z + w * V * z2 + 4.0 * q3 * z - 2.0 * U * V * z2 - 6.0 * U * V + 4.0 * V * V * z)
        + V
        * (
            -w * U * U
            + 2.0 * w * U * V * z
            - w * V * V * z2
            + 2.0 * U**3
            - 4.0 * U * U * V * z
            + 2.0 * U * V * V * z2
        )
    )
    d_u = (U - V * z) * d_h
    n_v = (
        -16.0 * H * H
        + 2.0
        * H
        * (-w * U + w * V * z + 4.0 * q3 + 4.0 * U * U - 4.0 * U * V * z - 2.0 * V * V * z2 - 2.0 * V * V)
        + w * U**3
        - 2.0 * w * U * U * V * z
        + w * U * V * V * z2
        - 4.0 * q3 * U * U
        + 8.0 * q3 * U * V * z
        - 4.0 * q3 * V * V * z2
        + 2.0 * U * U * V * V
        - 4.0 * U * V**3 * z
        + 2.0 * V**4 * z2
    )

    dH = checked_divide(n_h, d_h, Denominator.CASE2_DH, floor)
    dU = checked_divide(n_u, d_u, Denominator.CASE2_DU, floor)
    if variant is Case2Variant.AS_PRINTED:
        dV = checked_divide(n_v, d_u, Denominator.CASE2_DU, floor)
    else:
        dV = checked_divide(n_v, d_h, Denominator.CASE2_DH, floor)

    return ReducedDerivative(dH, dU, dV, DenominatorReport(d_h=d_h, d_u=d_u))
