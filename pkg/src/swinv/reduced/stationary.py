#!/usr/bin/env python3
"""
部分代数 {X₁, X₃} による定常一次元解 h = H(y), u = U(y), v = V(y)

求積関係
    VH = c₁
    U = Ωy²/2 + c₂
    V² + ¼Ω²y⁴ + Ωc₂y² + 4H − 2y²(q₃y² − q) = c₃
を使い，状態として H のみを積分します．
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from swinv.reduced.common import (
    DEFAULT_DENOM_FLOOR,
    Denominator,
    DenominatorReport,
    ModelParams,
    checked_divide,
)

_MARGIN_GRID_SIZE = 2001


@dataclass(frozen=True)
class StationaryConstants:
    """求積定数 c₁, c₂, c₃"""

    c1: float
    c2: float
    c3: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.c1, self.c2, self.c3)):
            msg = f"Stationary constants must be finite: {self}"
            raise ValueError(msg)


def _potential(y: float, c2: float, p: ModelParams) -> float:
    # H と V を含まない部分
    y2 = y * y
    return 0.25 * p.omega**2 * y2 * y2 + p.omega * c2 * y2 - 2.0 * y2 * (p.q3 * y2 - p.q)


def stationary_constants_from_ic(
    a: float, H_a: float, U_a: float, V_a: float, p: ModelParams
) -> StationaryConstants:
    if not H_a > 0:
        msg = f"H(a) must be positive: {H_a}"
        raise ValueError(msg)

    c1 = V_a * H_a
    c2 = U_a - p.omega * a * a / 2.0
    c3 = V_a * V_a + _potential(a, c2, p) + 4.0 * H_a
    return StationaryConstants(c1, c2, c3)


def rhs_case1(
    y: float, H: float, c: StationaryConstants, p: ModelParams, floor: float = DEFAULT_DENOM_FLOOR
) -> tuple[float, DenominatorReport]:
    """dH/dy と分母 2(c₁² − 2H³)"""
    H3 = H * H * H
    den = 2.0 * (c.c1 * c.c1 - 2.0 * H3)
    numerator = H3 * y * (2.0 * c.c2 * p.omega + p.omega**2 * y * y + 4.0 * p.q - 8.0 * p.q3 * y * y)
    return checked_divide(numerator, den, Denominator.CASE1_DEN, floor), DenominatorReport(d_h=den)


def algebraic_case1(y: float, H: float, c: StationaryConstants, p: ModelParams) -> tuple[float, float]:
    """(U, V) を代数的に復元する"""
    if H == 0:
        msg = "H must be nonzero to recover V = c1/H"
        raise ValueError(msg)
    return p.omega * y * y / 2.0 + c.c2, c.c1 / H


def conserved_case1(y: float, H: float, c: StationaryConstants, p: ModelParams) -> float:
    """第三の求積関係の左辺 − c₃ (厳密解では 0)"""
    if not H > 0:
        msg = f"H must be positive: {H}"
        raise ValueError(msg)
    V = c.c1 / H
    return V * V + _potential(y, c.c2, p) + 4.0 * H - c.c3


def _minimum_depth_term(c: StationaryConstants) -> float:
    # min_{H>0} (c₁²/H² + 4H)
    if c.c1 == 0:
        return 0.0
    return 6.0 * (c.c1 * c.c1 / 2.0) ** (1.0 / 3.0)


def case1_fold_margin(y: float, c: StationaryConstants, p: ModelParams) -> float:
    """
    点 y での可解性の余裕 c₃ − G(y) − min_H(c₁²/H² + 4H)

    0 となる y で H = (c₁²/2)^{1/3} となり分母 2(c₁² − 2H³) が消失します．
    """
    return c.c3 - _potential(y, c.c2, p) - _minimum_depth_term(c)


def locate_case1_fold(
    c: StationaryConstants, p: ModelParams, y_safe: float, y_beyond: float, tol: float
) -> tuple[float, float] | None:
    """
    y_safe と y_beyond の間で余裕が 0 になる点を挟む区間 (安全側, 消失側) を返す

    y_safe で余裕が正，y_beyond で負でなければ None を返します．
    """
    if not (case1_fold_margin(y_safe, c, p) > 0 and case1_fold_margin(y_beyond, c, p) < 0):
        return None

    xtol = tol / 4.0
    rtol = 4.0 * float(np.finfo(float).eps)
    root = scipy.optimize.brentq(
        case1_fold_margin, min(y_safe, y_beyond), max(y_safe, y_beyond), args=(c, p), xtol=xtol, rtol=rtol
    )
    # brentq の誤差は xtol + rtol·|root| 以下
    half = xtol + rtol * abs(root)
    toward_safe = math.copysign(half, y_safe - y_beyond)
    return float(root + toward_safe), float(root - toward_safe)


def case1_solvability_margin(
    c: StationaryConstants, p: ModelParams, y_lo: float, y_hi: float
) -> tuple[float, float]:
    """
    区間 [y_lo, y_hi] における可解性の余裕 min(c₃ − G(y)) − min_H(c₁²/H² + 4H) を返す

    Returns:
        (余裕, 最小となる y)．余裕が負なら解は区間内で分母が消失して破壊される

    """
    if not y_lo < y_hi:
        msg = f"Invalid interval: [{y_lo}, {y_hi}]"
        raise ValueError(msg)

    def margin(y: float) -> float:
        return case1_fold_margin(y, c, p)

    ys = np.linspace(y_lo, y_hi, _MARGIN_GRID_SIZE)
    values = np.array([margin(float(y)) for y in ys])
    i = int(np.argmin(values))
    lo = float(ys[max(i - 1, 0)])
    hi = float(ys[min(i + 1, len(ys) - 1)])
    refined = scipy.optimize.minimize_scalar(
        margin, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12}
    )

    if refined.success and refined.fun < values[i]:
        return float(refined.fun), float(refined.x)
    return float(values[i]), float(ys[i])


def critical_initial_velocity(
    a: float,
    H_a: float,
    V_a: float,
    p: ModelParams,
    y_end: float,
    bracket: tuple[float, float],
) -> float:
    """可解性の余裕が 0 となる U(a) を求める"""
    y_lo, y_hi = min(a, y_end), max(a, y_end)

    def margin(U_a: float) -> float:
        c = stationary_constants_from_ic(a, H_a, U_a, V_a, p)
        return case1_solvability_margin(c, p, y_lo, y_hi)[0]

    return float(scipy.optimize.brentq(margin, bracket[0], bracket[1], xtol=1e-12))
