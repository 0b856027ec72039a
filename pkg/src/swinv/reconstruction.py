#!/usr/bin/env python3
"""
縮約解から物理場 h(t,x,y), u(t,x,y), v(t,x,y) を復元し，元の偏微分方程式

    h_t + uh_x + vh_y + h(u_x + v_y) = 0
    u_t + uu_x + vu_y − fv + 2h_x = B_x
    v_t + uv_x + vv_y + fu + 2h_y = B_y

の残差を中心差分で評価します (f = Ωy, B = q₃y⁴ − qy²)．
"""

from __future__ import annotations

import functools
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

import swinv.integrator
from swinv.integrator import IntegrationConfig, OutOfRangeError, Trajectory
from swinv.reduced.common import Case, ModelParams, ReducedState
from swinv.reduced.stationary import StationaryConstants, algebraic_case1
from swinv.reduced.system import ReducedSystem
from swinv.reduced.traveling import Case2Variant

DEFAULT_DELTA = 1e-3
DEFAULT_TOL = 1e-4
DEFAULT_RATIO_RANGE = (3.5, 4.5)
# これより小さい (正規化済み) 残差は丸め誤差とみなし収束比の判定から除く
NOISE_FLOOR = 1e-10
# 特異点からの最小距離
SINGULARITY_MARGIN = 0.1

CASE1_POINTS = (-1.0, -0.5, 0.0, 0.5, 1.0)
WINDOW_FRACTIONS = (0.25, 0.5, 0.75)
CASE2_Y_VALUES = (0.5, 1.0, 2.0)
CASE2_T_VALUES = (0.0, 1.0)
CASE3_T_VALUES = (0.5, 1.0, 2.0)

COMPONENTS = ("mass", "momx", "momy")

Point = tuple[float, float, float]


class InconclusiveVariantError(Exception):
    """V′ の分母の選択を残差で決定できない場合のエラー"""


@dataclass(frozen=True)
class FieldSample:
    t: float
    x: float
    y: float
    h: float
    u: float
    v: float

    @property
    def physical(self) -> bool:
        return self.h > 0


Sampler = Callable[[float, float, float], FieldSample]


@dataclass(frozen=True)
class ResidualTriple:
    """残差と各方程式の項の大きさの和"""

    r_mass: float
    r_momx: float
    r_momy: float
    scale_mass: float = 1.0
    scale_momx: float = 1.0
    scale_momy: float = 1.0

    def raw(self) -> np.ndarray:
        return np.array([self.r_mass, self.r_momx, self.r_momy])

    def scaled(self) -> np.ndarray:
        scales = np.array([self.scale_mass, self.scale_momx, self.scale_momy])
        return np.abs(self.raw()) / np.where(scales > 0.0, scales, 1.0)


def bottom_and_gradient(p: ModelParams, x: float, y: float) -> tuple[float, float, float]:
    y2 = y * y
    return p.q3 * y2 * y2 - p.q * y2, 0.0, 4.0 * p.q3 * y2 * y - 2.0 * p.q * y


def coriolis(p: ModelParams, y: float) -> float:
    return p.f0 + p.omega * y


def sample_case1(
    traj: Trajectory, c: StationaryConstants, p: ModelParams, t: float, x: float, y: float
) -> FieldSample:
    H = float(traj.dense(y)[0])
    U, V = algebraic_case1(y, H, c, p)
    return FieldSample(t, x, y, H, U, V)


def sample_case2(traj: Trajectory, p: ModelParams, t: float, x: float, y: float) -> FieldSample:
    if y == 0:
        msg = "y = 0 is outside the domain of the traveling-wave representation"
        raise OutOfRangeError(msg)
    z = (x + 2.0 * p.k * t) / y
    H, U, V = traj.dense(z)
    y2 = y * y
    return FieldSample(t, x, y, y2 * y2 * H, -2.0 * p.k + y2 * U, y2 * V)


def sample_case3(traj: Trajectory, p: ModelParams, t: float, x: float, y: float) -> FieldSample:
    if t == 0:
        msg = "t = 0 is outside the domain of the self-similar representation"
        raise OutOfRangeError(msg)
    H, U, V = traj.dense(y * t)
    t2 = t * t
    return FieldSample(t, x, y, H / (t2 * t2), -2.0 * p.k + U / t2, V / t2)


def make_sampler(system: ReducedSystem, traj: Trajectory) -> Sampler:
    match system.case:
        case Case.STATIONARY_X1X3:
            return functools.partial(sample_case1, traj, system.constants, system.params)
        case Case.TRAVELING_X2X1:
            return functools.partial(sample_case2, traj, system.params)
        case Case.SIMILARITY_X2X3:
            return functools.partial(sample_case3, traj, system.params)


def comoving_speed(case: Case, p: ModelParams) -> float:
    """
    残差の t 方向の差分をとる座標系の x 方向の速度

    case 2/3 の表現は u = −2k + (縮約変数の項) なので，x + 2kt を固定した方向に差分をとると
    t 方向の差分が q によらなくなります．
    """
    return 0.0 if case is Case.STATIONARY_X1X3 else -2.0 * p.k


def pde_residual(
    sampler: Sampler, p: ModelParams, point: Point, delta: float, frame_speed: float = 0.0
) -> ResidualTriple:
    """
    7 点の中心差分で残差を評価する

    t 方向の差分は x = x₀ + frame_speed·t に沿ってとり，h_t + uh_x を
    (沿った差分) + (u − frame_speed)h_x として評価します (u_t, v_t も同様)．
    """
    t, x, y = point
    center = sampler(t, x, y)
    shift = frame_speed * delta
    t_plus, t_minus = sampler(t + delta, x + shift, y), sampler(t - delta, x - shift, y)
    x_plus, x_minus = sampler(t, x + delta, y), sampler(t, x - delta, y)
    y_plus, y_minus = sampler(t, x, y + delta), sampler(t, x, y - delta)

    def diff(plus: FieldSample, minus: FieldSample, name: str) -> float:
        return (getattr(plus, name) - getattr(minus, name)) / (2.0 * delta)

    h, u, v = center.h, center.u, center.v
    # 座標系に対する x 方向の速度
    w = u - frame_speed
    h_t, u_t, v_t = (diff(t_plus, t_minus, name) for name in ("h", "u", "v"))
    h_x, u_x, v_x = (diff(x_plus, x_minus, name) for name in ("h", "u", "v"))
    h_y, u_y, v_y = (diff(y_plus, y_minus, name) for name in ("h", "u", "v"))

    f = coriolis(p, y)
    _, B_x, B_y = bottom_and_gradient(p, x, y)

    mass = (h_t, w * h_x, v * h_y, h * u_x, h * v_y)
    momx = (u_t, w * u_x, v * u_y, -f * v, 2.0 * h_x, -B_x)
    momy = (v_t, w * v_x, v * v_y, f * u, 2.0 * h_y, -B_y)

    return ResidualTriple(
        r_mass=sum(mass),
        r_momx=sum(momx),
        r_momy=sum(momy),
        scale_mass=sum(abs(term) for term in mass),
        scale_momx=sum(abs(term) for term in momx),
        scale_momy=sum(abs(term) for term in momy),
    )


def default_abscissae(case: Case, s_start: float, s_end: float) -> tuple[float, ...]:
    if case is Case.STATIONARY_X1X3:
        return CASE1_POINTS
    direction = 1.0 if s_end >= s_start else -1.0
    return tuple(s_start + direction * fraction for fraction in WINDOW_FRACTIONS)


def grid_points(case: Case, p: ModelParams, abscissae: Sequence[float]) -> list[tuple[float, Point]]:
    """縮約変数の値ごとに物理空間の評価点を並べる"""
    points: list[tuple[float, Point]] = []
    for s in abscissae:
        match case:
            case Case.STATIONARY_X1X3:
                points.append((s, (0.0, 0.0, s)))
            case Case.TRAVELING_X2X1:
                points += [
                    (s, (t, s * y - 2.0 * p.k * t, y)) for y in CASE2_Y_VALUES for t in CASE2_T_VALUES
                ]
            case Case.SIMILARITY_X2X3:
                points += [(s, (t, 0.0, s / t)) for t in CASE3_T_VALUES]
    return points


@dataclass(frozen=True)
class ResidualRow:
    point: Point
    coarse: ResidualTriple
    fine: ResidualTriple


@dataclass
class ResidualReport:
    """delta と delta/2 での残差の比較"""

    delta: float
    tol: float
    ratio_range: tuple[float, float] = DEFAULT_RATIO_RANGE
    rows: list[ResidualRow] = field(default_factory=list)
    skipped: list[Point] = field(default_factory=list)
    variant: Case2Variant | None = None

    def _max(self, attr: str, scaled: bool) -> np.ndarray:
        if not self.rows:
            return np.full(3, np.nan)
        values = [
            getattr(row, attr).scaled() if scaled else np.abs(getattr(row, attr).raw()) for row in self.rows
        ]
        return np.max(np.array(values), axis=0)

    @property
    def max_scaled(self) -> np.ndarray:
        return self._max("coarse", scaled=True)

    @property
    def max_raw(self) -> np.ndarray:
        return self._max("coarse", scaled=False)

    @property
    def max_raw_fine(self) -> np.ndarray:
        return self._max("fine", scaled=False)

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.max_raw / self.max_raw_fine

    @property
    def exempt(self) -> np.ndarray:
        """丸め誤差の水準にあり収束比を判定しない成分"""
        return self.max_scaled < NOISE_FLOOR

    @property
    def passed(self) -> bool:
        if not self.rows:
            return False
        if not np.all(self.max_scaled < self.tol):
            return False
        lo, hi = self.ratio_range
        ratios = self.ratios
        return all(exempt or lo <= ratio <= hi for exempt, ratio in zip(self.exempt, ratios, strict=True))

    def to_text(self) -> str:
        lines = [f"delta: {self.delta:.6g}", f"points: {len(self.rows)} (skipped {len(self.skipped)})"]
        if self.variant is not None:
            lines.append(f"variant: {self.variant.value}")
        for i, name in enumerate(COMPONENTS):
            ratio = "exempt (roundoff)" if self.exempt[i] else f"{self.ratios[i]:.4f}"
            lines.append(
                f"{name}: max_residual={self.max_raw[i]:.6e} scaled={self.max_scaled[i]:.6e} ratio={ratio}"
            )
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


def verify_residual(
    sampler: Sampler,
    p: ModelParams,
    points: Sequence[Point],
    delta: float = DEFAULT_DELTA,
    tol: float = DEFAULT_TOL,
    frame_speed: float = 0.0,
) -> ResidualReport:
    """各点で delta と delta/2 の残差を評価する．ステンシルが解の範囲外に出る点は除く"""
    report = ResidualReport(delta=delta, tol=tol)
    for point in points:
        try:
            coarse = pde_residual(sampler, p, point, delta, frame_speed)
            fine = pde_residual(sampler, p, point, delta / 2.0, frame_speed)
        except OutOfRangeError as e:
            logging.warning("Skip residual point %s: %s", point, e)
            report.skipped.append(point)
            continue
        report.rows.append(ResidualRow(point, coarse, fine))
    return report


def admissible_points(
    case: Case, p: ModelParams, traj: Trajectory, abscissae: Sequence[float]
) -> tuple[list[Point], list[Point]]:
    """特異点から離れた評価点とそれ以外に分ける"""
    accepted: list[Point] = []
    rejected: list[Point] = []
    for s, point in grid_points(case, p, abscissae):
        if traj.event is not None and abs(s - traj.event.s) < SINGULARITY_MARGIN:
            rejected.append(point)
        else:
            accepted.append(point)
    return accepted, rejected


def verify_trajectory(
    system: ReducedSystem,
    traj: Trajectory,
    abscissae: Sequence[float],
    delta: float = DEFAULT_DELTA,
    tol: float = DEFAULT_TOL,
) -> ResidualReport:
    accepted, rejected = admissible_points(system.case, system.params, traj, abscissae)
    if len(traj) < 2:
        report = ResidualReport(delta=delta, tol=tol)
        report.skipped += accepted + rejected
        return report
    sampler = make_sampler(system, traj)
    speed = comoving_speed(system.case, system.params)
    report = verify_residual(sampler, system.params, accepted, delta, tol, speed)
    report.skipped += rejected
    if system.case is Case.TRAVELING_X2X1:
        report.variant = system.variant
    return report


_variant_cache: dict[tuple, Case2Variant] = {}


def clear_variant_cache() -> None:
    _variant_cache.clear()


def evaluate_case2_variants(
    p: ModelParams,
    ics: ReducedState,
    window: float = 1.0,
    step: float = swinv.integrator.DEFAULT_STEP,
    delta: float = DEFAULT_DELTA,
    tol: float = DEFAULT_TOL,
) -> dict[Case2Variant, ResidualReport]:
    """両方の候補を短い区間で積分し，残差の収束を評価する"""
    cfg = IntegrationConfig(s_start=ics.s, s_end=ics.s + window, step=step)
    abscissae = default_abscissae(Case.TRAVELING_X2X1, cfg.s_start, cfg.s_end)
    reports = {}
    for variant in Case2Variant:
        system = ReducedSystem.build(Case.TRAVELING_X2X1, p, ics, variant)
        try:
            traj = swinv.integrator.integrate(system, cfg, system.initial_vector(ics))
        except swinv.integrator.ImmediateSingularityError as e:
            logging.warning("Variant %s is singular at the start: %s", variant.value, e)
            report = ResidualReport(delta=delta, tol=tol, variant=variant)
        else:
            report = verify_trajectory(system, traj, abscissae, delta, tol)
        reports[variant] = report
        logging.info("variant %s:\n%s", variant.value, report.to_text())
    return reports


def resolve_case2_variant(
    p: ModelParams,
    ics: ReducedState,
    window: float = 1.0,
    step: float = swinv.integrator.DEFAULT_STEP,
    delta: float = DEFAULT_DELTA,
    tol: float = DEFAULT_TOL,
) -> Case2Variant:
    """残差が 2 次で収束する候補を選ぶ．結果はパラメータと初期値ごとにキャッシュする"""
    key = (p, ics, window, step, delta, tol)
    if key in _variant_cache:
        return _variant_cache[key]

    reports = evaluate_case2_variants(p, ics, window, step, delta, tol)
    passing = [variant for variant, report in reports.items() if report.passed]
    if len(passing) != 1:
        outcome = ", ".join(
            f"{variant.value}={'pass' if report.passed else 'fail'}" for variant, report in reports.items()
        )
        msg = f"case-2 variant is inconclusive: {outcome}"
        raise InconclusiveVariantError(msg)

    logging.info("case-2 variant resolved: %s", passing[0].value)
    _variant_cache[key] = passing[0]
    return passing[0]
