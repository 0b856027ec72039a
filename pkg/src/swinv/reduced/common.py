#!/usr/bin/env python3
"""縮約常微分方程式系に共通の型定義"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

# 分母の下限は floor·(1 + |分子|) で判定する
DEFAULT_DENOM_FLOOR = 1e-12


class Case(enum.Enum):
    """不変解の種類 (部分代数)"""

    STATIONARY_X1X3 = "stationary_x1x3"
    TRAVELING_X2X1 = "traveling_x2x1"
    SIMILARITY_X2X3 = "similarity_x2x3"


class Denominator(enum.Enum):
    """消失を監視する分母の名前"""

    CASE1_DEN = "case1_den"
    CASE2_DH = "case2_Dh"
    CASE2_DU = "case2_Du"
    CASE3_MAIN = "case3_main"
    CASE3_VPLUSZ = "case3_VplusZ"


class DenominatorError(ZeroDivisionError):
    """縮約系の分母が下限を下回った場合に発生するエラー"""

    def __init__(self, which: Denominator, value: float, stage: int | None = None) -> None:
        self.which = which
        self.value = value
        self.stage = stage
        super().__init__(self._message())

    def _message(self) -> str:
        where = "" if self.stage is None else f" at stage {self.stage}"
        return f"denominator {self.which.value} vanished{where}: {self.value:.6e}"

    def at_stage(self, stage: int) -> DenominatorError:
        return DenominatorError(self.which, self.value, stage)


@dataclass(frozen=True)
class ModelParams:
    """底面 B = q₃y⁴ − qy² とコリオリ項 f = f₀ + Ωy を決める定数"""

    q: float
    q3: float
    omega: float = 1.0
    f0: float = 0.0

    def __post_init__(self) -> None:
        for name in ("q", "q3", "omega"):
            if not math.isfinite(getattr(self, name)):
                msg = f"{name} must be finite: {getattr(self, name)}"
                raise ValueError(msg)
        if self.omega == 0:
            msg = "omega must be nonzero"
            raise ValueError(msg)
        # NOTE: 同値変換で f₀ = 0 に正規化済み
        if self.f0 != 0:
            msg = f"f0 is fixed to 0: {self.f0}"
            raise ValueError(msg)

    @property
    def k(self) -> float:
        return self.q / self.omega


@dataclass(frozen=True)
class ReducedState:
    """縮約変数 (s は case 1 で y，case 2/3 で z)"""

    s: float
    H: float
    U: float
    V: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in (self.s, self.H, self.U, self.V)):
            msg = f"Reduced state must be finite: {self}"
            raise ValueError(msg)

    @property
    def physical(self) -> bool:
        return self.H > 0


@dataclass(frozen=True)
class DenominatorReport:
    """縮約系の分母の値"""

    d_h: float
    d_u: float | None = None

    @property
    def min_abs(self) -> float:
        if self.d_u is None:
            return abs(self.d_h)
        return min(abs(self.d_h), abs(self.d_u))

    def named(self) -> list[tuple[str, float]]:
        values = [("d_h", self.d_h)]
        if self.d_u is not None:
            values.append(("d_u", self.d_u))
        return values


@dataclass(frozen=True)
class ReducedDerivative:
    dH: float
    dU: float
    dV: float
    den: DenominatorReport


def denominator_floor_check(den: DenominatorReport, floor: float) -> bool:
    """全ての分母の絶対値が floor を超えていれば True"""
    if floor <= 0:
        msg = f"floor must be positive: {floor}"
        raise ValueError(msg)
    return den.min_abs > floor


def checked_divide(numerator: float, denominator: float, which: Denominator, floor: float) -> float:
    """相対下限付きの除算"""
    if not abs(denominator) > floor * (1.0 + abs(numerator)):
        raise DenominatorError(which, denominator)
    return numerator / denominator
