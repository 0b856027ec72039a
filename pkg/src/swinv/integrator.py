#!/usr/bin/env python3
"""
固定刻みの 6 次 Runge-Kutta 法による積分と分母消失イベントの検出

分母の符号変化もしくは下限違反を検出すると，最後の安全な点から
刻み幅を二分法で縮めて特異点の位置を特定します．
"""

from __future__ import annotations

import dataclasses
import functools
import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
import pandas as pd
import scipy.interpolate

from swinv.reduced.common import DEFAULT_DENOM_FLOOR, Denominator, DenominatorError, DenominatorReport

DEFAULT_STEP = 1e-3
DEFAULT_MAX_STEPS = 1_000_000
DEFAULT_LOCATION_TOL = 1e-9
LOCATION_MAX_ITERATIONS = 60


class Rhs(Protocol):
    def __call__(self, s: float, x: np.ndarray) -> np.ndarray: ...


class OdeSystem(Protocol):
    """
    積分対象の系．分母を持たない系は DenominatorReport の代わりに None を返す

    任意で次のメソッドを持てます．
    - denominator_name(slot): DenominatorReport の欄に対応する分母の名前
    - refine_singularity(s_safe, s_beyond, which, tol): 分母の零点を挟む区間
      (安全側, 消失側) を返す．求められなければ None
    """

    def derivative(self, s: float, x: np.ndarray) -> tuple[np.ndarray, DenominatorReport | None]: ...


class IntegrationError(Exception):
    """積分を開始・継続できない場合のエラー"""


class ImmediateSingularityError(IntegrationError):
    """初期状態で分母が下限を下回っている場合のエラー"""

    def __init__(self, s: float, which: Denominator) -> None:
        self.s = s
        self.which = which
        super().__init__(f"initial state is singular at s={s:.17g} ({which.value})")


class StepLimitError(IntegrationError):
    """必要な刻み数が max_steps を超える場合のエラー"""


class SingularityError(IntegrationError):
    """特異点のない区間を前提とする処理で特異点に達した場合のエラー"""


@dataclass(frozen=True)
class ButcherTableau:
    """陽的 Runge-Kutta 法の係数"""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int

    @property
    def stages(self) -> int:
        return len(self.b)


def _fractions(rows: Sequence[Sequence[float]]) -> np.ndarray:
    width = max(len(row) for row in rows)
    return np.array([list(row) + [0.0] * (width - len(row)) for row in rows], dtype=float)


# Butcher による 7 段 6 次の公式
RK6 = ButcherTableau(
    a=_fractions(
        [
            [],
            [1 / 3],
            [0, 2 / 3],
            [1 / 12, 1 / 3, -1 / 12],
            [-1 / 16, 9 / 8, -3 / 16, -3 / 8],
            [0, 9 / 8, -3 / 8, -3 / 4, 1 / 2],
            [9 / 44, -9 / 11, 63 / 44, 18 / 11, 0, -16 / 11],
        ]
    ),
    b=np.array([11 / 120, 0, 27 / 40, 27 / 40, -4 / 15, -4 / 15, 11 / 120]),
    c=np.array([0, 1 / 3, 2 / 3, 1 / 3, 1 / 2, 1 / 2, 1]),
    order=6,
)


def quadrature_defects(tableau: ButcherTableau) -> np.ndarray:
    """x′ = sᵐ (m = 0..order−1) に対する一段の誤差 Σbc^m − 1/(m+1)"""
    return np.array([tableau.b @ tableau.c**m - 1.0 / (m + 1) for m in range(tableau.order)])


def check_tableau(tableau: ButcherTableau, tol: float = 1e-14) -> None:
    """行和条件と多項式に対する厳密性を確認する"""
    if not np.allclose(tableau.a.sum(axis=1), tableau.c, rtol=0.0, atol=tol):
        msg = "Butcher tableau violates the row-sum condition"
        raise ValueError(msg)
    if np.any(np.triu(tableau.a) != 0.0):
        msg = "Butcher tableau is not explicit"
        raise ValueError(msg)
    defects = quadrature_defects(tableau)
    if np.max(np.abs(defects)) > tol:
        msg = f"Butcher tableau fails quadrature order conditions: {defects}"
        raise ValueError(msg)


check_tableau(RK6)


def rk6_step(rhs: Rhs, s: float, state: np.ndarray, h: float, tableau: ButcherTableau = RK6) -> np.ndarray:
    """一段進めた状態を返す．分母の消失は段番号を付けて送出する"""
    state = np.asarray(state, dtype=float)
    k = np.empty((tableau.stages, state.size))
    for i in range(tableau.stages):
        stage_state = state + h * (tableau.a[i, :i] @ k[:i]) if i > 0 else state
        try:
            k[i] = rhs(s + tableau.c[i] * h, stage_state)
        except DenominatorError as e:
            raise e.at_stage(i) from e
    return state + h * (tableau.b @ k)


@dataclass(frozen=True)
class IntegrationConfig:
    s_start: float
    s_end: float
    step: float = DEFAULT_STEP
    denom_floor: float = DEFAULT_DENOM_FLOOR
    max_steps: int = DEFAULT_MAX_STEPS
    location_tol: float = DEFAULT_LOCATION_TOL

    def __post_init__(self) -> None:
        if not (self.step > 0 and self.denom_floor > 0 and self.max_steps > 0 and self.location_tol > 0):
            msg = f"step, denom_floor, max_steps and location_tol must be positive: {self}"
            raise ValueError(msg)

    @property
    def direction(self) -> float:
        return 1.0 if self.s_end >= self.s_start else -1.0

    def step_count(self) -> int:
        span = abs(self.s_end - self.s_start)
        return max(math.ceil(span / self.step - 1e-9), 0)


@dataclass(frozen=True)
class SingularityEvent:
    """
    分母が消失した位置

    bracket は (積分方向で手前の安全な端, 消失側の端) で，s はその間にあります．
    """

    s: float
    which: Denominator
    bracket: tuple[float, float]

    @property
    def bracket_width(self) -> float:
        return abs(self.bracket[1] - self.bracket[0])


@dataclass(frozen=True)
class Trajectory:
    """離散化された解．s は積分方向に狭義単調"""

    s: np.ndarray
    states: np.ndarray
    derivatives: np.ndarray
    d_h: np.ndarray
    d_u: np.ndarray
    event: SingularityEvent | None = None

    def __len__(self) -> int:
        return len(self.s)

    @property
    def den_min(self) -> np.ndarray:
        return np.fmin(np.abs(self.d_h), np.abs(self.d_u))

    @property
    def coverage(self) -> tuple[float, float]:
        return float(np.min(self.s)), float(np.max(self.s))

    @property
    def terminal(self) -> np.ndarray:
        return self.states[-1]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"s": self.s})
        for j in range(self.states.shape[1]):
            frame[f"x{j}"] = self.states[:, j]
            frame[f"dx{j}"] = self.derivatives[:, j]
        frame["den_min"] = self.den_min
        return frame

    @functools.cached_property
    def dense(self) -> DenseOutput:
        return DenseOutput(self)


class OutOfRangeError(ValueError):
    """密出力の範囲外を参照した場合のエラー"""


class DenseOutput:
    """格子点の値と導関数による 3 次 Hermite 補間"""

    def __init__(self, trajectory: Trajectory) -> None:
        if len(trajectory) < 2:
            msg = "dense output needs at least two samples"
            raise OutOfRangeError(msg)
        s, states, derivatives = trajectory.s, trajectory.states, trajectory.derivatives
        if s[0] > s[-1]:
            s, states, derivatives = s[::-1], states[::-1], derivatives[::-1]
        self.lo, self.hi = trajectory.coverage
        self._spline = scipy.interpolate.CubicHermiteSpline(s, states, derivatives, axis=0, extrapolate=False)

    def __call__(self, s: float) -> np.ndarray:
        if not self.lo <= s <= self.hi:
            msg = f"s={s:.17g} outside the trajectory coverage [{self.lo:.17g}, {self.hi:.17g}]"
            raise OutOfRangeError(msg)
        return self._spline(s)


@dataclass
class _Guard:
    """積分の各段で分母の符号と下限を監視する"""

    system: OdeSystem
    floor: float
    signs: list[float] = field(default_factory=list)

    def evaluate(self, s: float, x: np.ndarray) -> tuple[np.ndarray, DenominatorReport | None]:
        if not np.all(np.isfinite(x)):
            raise DenominatorError(_which_of(self.system, "d_h"), math.nan)
        deriv, den = self.system.derivative(s, x)
        if den is not None:
            for (slot, value), sign in zip(den.named(), self.signs, strict=False):
                if value * sign <= 0 or abs(value) <= self.floor:
                    raise DenominatorError(_which_of(self.system, slot), value)
        return deriv, den

    def __call__(self, s: float, x: np.ndarray) -> np.ndarray:
        return self.evaluate(s, x)[0]


def _which_of(system: OdeSystem, slot: str) -> Denominator:
    # 分母の名前は系の case に依存する
    resolver = getattr(system, "denominator_name", None)
    if resolver is None:
        return Denominator.CASE1_DEN
    return resolver(slot)


def _signs(den: DenominatorReport | None) -> list[float]:
    if den is None:
        return []
    return [math.copysign(1.0, value) for _, value in den.named()]


def _try_step(guard: _Guard, s: float, x: np.ndarray, h: float):
    """一段進め，終点の状態・導関数・分母を返す．失敗時は消失した分母を返す"""
    try:
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            x_next = rk6_step(guard, s, x, h)
            deriv, den = guard.evaluate(s + h, x_next)
    except DenominatorError as e:
        return None, e.which
    except (OverflowError, FloatingPointError, ValueError):
        return None, _which_of(guard.system, "d_h")
    return (x_next, deriv, den), None


def _locate(guard: _Guard, s: float, x: np.ndarray, h: float, which: Denominator, tol: float):
    """最後の安全な点から刻み幅を二分して，一段で到達できる範囲の端を挟み込む"""
    lo, hi = 0.0, abs(h)
    direction = math.copysign(1.0, h)
    for _ in range(LOCATION_MAX_ITERATIONS):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        result, failed = _try_step(guard, s, x, direction * mid)
        if result is None:
            hi, which = mid, failed
        else:
            lo = mid
    return SingularityEvent(s + direction * 0.5 * (lo + hi), which, (s + direction * lo, s + direction * hi))


def _refine(system: OdeSystem, event: SingularityEvent, s_back: float, s_beyond: float, tol: float):
    """系が分母の零点を直接求められる場合は，その区間で事象を置き換える"""
    refine = getattr(system, "refine_singularity", None)
    if refine is None:
        return event
    bracket = refine(s_back, s_beyond, event.which, tol)
    if bracket is None:
        logging.debug("singularity %s kept at the step bracket", event.which.value)
        return event
    return SingularityEvent(0.5 * (bracket[0] + bracket[1]), event.which, bracket)


def integrate(system: OdeSystem, cfg: IntegrationConfig, initial: np.ndarray) -> Trajectory:
    """s_start から s_end まで固定刻みで積分する"""
    n_steps = cfg.step_count()
    if n_steps > cfg.max_steps:
        msg = f"integration needs {n_steps} steps (max_steps={cfg.max_steps})"
        raise StepLimitError(msg)

    x = np.asarray(initial, dtype=float)
    s = cfg.s_start
    try:
        deriv, den = system.derivative(s, x)
    except DenominatorError as e:
        raise ImmediateSingularityError(s, e.which) from e
    if den is not None and den.min_abs <= cfg.denom_floor:
        slot = min(den.named(), key=lambda item: abs(item[1]))[0]
        raise ImmediateSingularityError(s, _which_of(system, slot))

    guard = _Guard(system, cfg.denom_floor, _signs(den))
    samples_s = [s]
    states = [x]
    derivatives = [deriv]
    dens = [den]
    event = None

    for i in range(1, n_steps + 1):
        s_next = cfg.s_end if i == n_steps else cfg.s_start + cfg.direction * i * cfg.step
        h = s_next - s
        result, failed = _try_step(guard, s, x, h)
        if result is None:
            event = _locate(guard, s, x, h, failed, cfg.location_tol)
            s_back = samples_s[-2] if len(samples_s) > 1 else s
            event = _refine(system, event, s_back, s_next, cfg.location_tol)
            logging.info(
                "singularity %s located at s=%.9f (bracket %.3e)",
                event.which.value,
                event.s,
                event.bracket_width,
            )
            break
        x, deriv, den = result
        s = s_next
        samples_s.append(s)
        states.append(x)
        derivatives.append(deriv)
        dens.append(den)

    if event is not None:
        # 零点より先の格子点は捨てる
        keep = max(sum(1 for value in samples_s if cfg.direction * (value - event.bracket[0]) <= 0), 1)
        if keep < len(samples_s):
            logging.debug("drop %d samples beyond the singularity", len(samples_s) - keep)
        del samples_s[keep:], states[keep:], derivatives[keep:], dens[keep:]

    d_h = np.array([math.nan if d is None else d.d_h for d in dens])
    d_u = np.array([math.nan if d is None or d.d_u is None else d.d_u for d in dens])
    return Trajectory(
        s=np.array(samples_s),
        states=np.array(states),
        derivatives=np.array(derivatives),
        d_h=d_h,
        d_u=d_u,
        event=event,
    )


def estimate_convergence_order(
    system: OdeSystem,
    cfg: IntegrationConfig,
    initial: np.ndarray,
    step_pairs: Sequence[tuple[float, float]],
    exact: Callable[[float], np.ndarray] | None = None,
) -> float:
    """
    終点の値の比較から経験的な次数を推定する

    exact が与えられない場合は h/4 の解を加えた自己収束で評価します．
    誤差が全て 0 の場合は math.inf を返します．
    """

    def terminal(step: float) -> np.ndarray:
        trajectory = integrate(system, dataclasses.replace(cfg, step=step), initial)
        if trajectory.event is not None:
            msg = f"singularity at s={trajectory.event.s:.9f} with step {step}"
            raise SingularityError(msg)
        return trajectory.terminal

    orders = []
    for h, h_half in step_pairs:
        coarse, fine = terminal(h), terminal(h_half)
        if exact is not None:
            reference = np.asarray(exact(cfg.s_end), dtype=float)
            e1 = float(np.max(np.abs(coarse - reference)))
            e2 = float(np.max(np.abs(fine - reference)))
        else:
            finest = terminal(h_half * h_half / h)
            e1 = float(np.max(np.abs(coarse - fine)))
            e2 = float(np.max(np.abs(fine - finest)))

        if e2 == 0.0:
            orders.append(math.inf)
        else:
            orders.append(math.log(e1 / e2) / math.log(h / h_half))

    return min(orders)
