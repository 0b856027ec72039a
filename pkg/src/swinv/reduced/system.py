#!/usr/bin/env python3
"""縮約系を積分器から扱うための共通インターフェース"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import pandas as pd

import swinv.reduced.similarity
import swinv.reduced.stationary
import swinv.reduced.traveling
from swinv.reduced.common import (
    DEFAULT_DENOM_FLOOR,
    Case,
    Denominator,
    DenominatorReport,
    ModelParams,
    ReducedState,
)
from swinv.reduced.stationary import StationaryConstants
from swinv.reduced.traveling import Case2Variant

if TYPE_CHECKING:
    from swinv.integrator import Trajectory

TABLE_COLUMNS = ["s", "H", "U", "V", "dH", "dU", "dV", "den_min"]


@dataclass(frozen=True)
class ReducedSystem:
    """縮約系の選択とパラメータ"""

    case: Case
    params: ModelParams
    constants: StationaryConstants | None = None
    variant: Case2Variant = Case2Variant.AS_PRINTED
    floor: float = DEFAULT_DENOM_FLOOR

    def __post_init__(self) -> None:
        if self.case is Case.STATIONARY_X1X3 and self.constants is None:
            msg = "stationary case requires quadrature constants"
            raise ValueError(msg)

    @classmethod
    def build(
        cls,
        case: Case,
        params: ModelParams,
        initial: ReducedState,
        variant: Case2Variant = Case2Variant.AS_PRINTED,
        floor: float = DEFAULT_DENOM_FLOOR,
    ) -> ReducedSystem:
        constants = None
        if case is Case.STATIONARY_X1X3:
            constants = swinv.reduced.stationary.stationary_constants_from_ic(
                initial.s, initial.H, initial.U, initial.V, params
            )
        return cls(case, params, constants, variant, floor)

    def initial_vector(self, initial: ReducedState) -> np.ndarray:
        if self.case is Case.STATIONARY_X1X3:
            return np.array([initial.H])
        return np.array([initial.H, initial.U, initial.V])

    def derivative(self, s: float, x: np.ndarray) -> tuple[np.ndarray, DenominatorReport]:
        match self.case:
            case Case.STATIONARY_X1X3:
                dH, den = swinv.reduced.stationary.rhs_case1(
                    s, float(x[0]), self.constants, self.params, self.floor
                )
                return np.array([dH]), den
            case Case.TRAVELING_X2X1:
                deriv = swinv.reduced.traveling.rhs_case2(
                    s, _state(s, x), self.params, self.variant, self.floor
                )
            case Case.SIMILARITY_X2X3:
                deriv = swinv.reduced.similarity.rhs_case3(s, _state(s, x), self.params, self.floor)
        return np.array([deriv.dH, deriv.dU, deriv.dV]), deriv.den

    def denominator_name(self, slot: str) -> Denominator:
        """DenominatorReport の d_h / d_u に対応する分母の名前"""
        names = {
            Case.STATIONARY_X1X3: (Denominator.CASE1_DEN, Denominator.CASE1_DEN),
            Case.TRAVELING_X2X1: (Denominator.CASE2_DH, Denominator.CASE2_DU),
            Case.SIMILARITY_X2X3: (Denominator.CASE3_MAIN, Denominator.CASE3_VPLUSZ),
        }[self.case]
        return names[0] if slot == "d_h" else names[1]

    def refine_singularity(
        self, s_safe: float, s_beyond: float, which: Denominator, tol: float
    ) -> tuple[float, float] | None:
        """定常解では可解性の余裕の零点として分母の消失位置を求める"""
        if self.case is not Case.STATIONARY_X1X3 or which is not Denominator.CASE1_DEN:
            return None
        return swinv.reduced.stationary.locate_case1_fold(self.constants, self.params, s_safe, s_beyond, tol)

    def fields(self, s: np.ndarray, states: np.ndarray, derivatives: np.ndarray) -> dict[str, np.ndarray]:
        """格子上の (H, U, V) とその導関数"""
        if self.case is not Case.STATIONARY_X1X3:
            return {
                "H": states[:, 0],
                "U": states[:, 1],
                "V": states[:, 2],
                "dH": derivatives[:, 0],
                "dU": derivatives[:, 1],
                "dV": derivatives[:, 2],
            }

        c = self.constants
        H = states[:, 0]
        dH = derivatives[:, 0]
        return {
            "H": H,
            "U": self.params.omega * s * s / 2.0 + c.c2,
            "V": c.c1 / H,
            "dH": dH,
            "dU": self.params.omega * s,
            "dV": -c.c1 * dH / (H * H),
        }


def _state(s: float, x: np.ndarray) -> ReducedState:
    return ReducedState(s, float(x[0]), float(x[1]), float(x[2]))


def trajectory_table(system: ReducedSystem, trajectory: Trajectory | None) -> pd.DataFrame:
    """CSV 出力用の表 (s, H, U, V, dH, dU, dV, den_min)"""
    if trajectory is None or len(trajectory) == 0:
        return pd.DataFrame({name: pd.Series(dtype=float) for name in TABLE_COLUMNS})
    columns = {
        "s": trajectory.s,
        **system.fields(trajectory.s, trajectory.states, trajectory.derivatives),
        "den_min": trajectory.den_min,
    }
    return pd.DataFrame(columns, columns=TABLE_COLUMNS)
