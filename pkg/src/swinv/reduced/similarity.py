#!/usr/bin/env python3
"""
部分代数 {X₂, X₃} による自己相似型の不変解

    h = t⁻⁴H(z), u = −2q/Ω + t⁻²U(z), v = t⁻²V(z), z = yt
"""

from __future__ import annotations

from swinv.reduced.common import (
    DEFAULT_DENOM_FLOOR,
    Denominator,
    DenominatorReport,
    ModelParams,
    ReducedDerivative,
    ReducedState,
    checked_divide,
)


def rhs_case3(
    z: float, st: ReducedState, p: ModelParams, floor: float = DEFAULT_DENOM_FLOOR
) -> ReducedDerivative:
    H, U, V = st.H, st.U, st.V
    w = p.omega
    q3 = p.q3
    z2 = z * z

    main = 2.0 * H - (V + z) ** 2
    v_plus_z = V + z
    n_h = 4.0 * H * z * (q3 * z2 - 1.0) - w * H * U * z - 2.0 * H * V
    n_u = 2.0 * U + w * V * z
    n_v = (
        8.0 * H
        + w * U * V * z
        + w * U * z2
        - 2.0 * V * V
        - 2.0 * V * z * (2.0 * q3 * z2 + 1.0)
        - 4.0 * q3 * z2 * z2
    )

    dH = checked_divide(n_h, main, Denominator.CASE3_MAIN, floor)
    dU = checked_divide(n_u, v_plus_z, Denominator.CASE3_VPLUSZ, floor)
    dV = checked_divide(n_v, main, Denominator.CASE3_MAIN, floor)

    return ReducedDerivative(dH, dU, dV, DenominatorReport(d_h=main, d_u=v_plus_z))
