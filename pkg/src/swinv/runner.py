#!/usr/bin/env python3
"""
サブコマンドの処理本体

終了コード:
    0: 正常終了
    2: 特異点で積分を打ち切った
    3: 検証に失敗した
    4: 入出力エラー
"""

from __future__ import annotations

import logging
import math
import multiprocessing
import os
import pathlib
import time
from dataclasses import dataclass, field

import pandas as pd

import swinv.integrator
import swinv.lie_l3
import swinv.plot
import swinv.reconstruction
import swinv.reduced.stationary
from swinv.config import RunConfig, ScanConfig, apply_value
from swinv.integrator import SingularityEvent, Trajectory
from swinv.reduced.common import Case
from swinv.reduced.system import ReducedSystem, trajectory_table
from swinv.reduced.traveling import Case2Variant

EXIT_SUCCESS = 0
EXIT_SINGULARITY = 2
EXIT_VERIFICATION_FAILED = 3
EXIT_IO_ERROR = 4

LIE_CHECK_TOL = 1e-10

_ABSCISSA = {
    Case.STATIONARY_X1X3: "y",
    Case.TRAVELING_X2X1: "z",
    Case.SIMILARITY_X2X3: "z",
}


@dataclass
class SolveResult:
    exit_code: int
    system: ReducedSystem | None = None
    trajectory: Trajectory | None = None
    event: SingularityEvent | None = None
    csv_path: pathlib.Path | None = None
    svg_paths: list[pathlib.Path] = field(default_factory=list)


def choose_variant(cfg: RunConfig) -> Case2Variant:
    """case 2 の V′ の分母を決める．設定で指定がなければ残差で選ぶ"""
    if cfg.variant is not None:
        return cfg.variant
    direction = cfg.integration_config().direction
    return swinv.reconstruction.resolve_case2_variant(cfg.params, cfg.initial.to_state(), window=direction)


def build_system(cfg: RunConfig) -> ReducedSystem:
    variant = Case2Variant.AS_PRINTED
    if cfg.case is Case.TRAVELING_X2X1:
        try:
            variant = choose_variant(cfg)
        except swinv.reconstruction.InconclusiveVariantError as e:
            logging.warning("%s; fall back to %s", e, variant.value)
    return ReducedSystem.build(
        cfg.case, cfg.params, cfg.initial.to_state(), variant, cfg.integration.denom_floor
    )


def solve(cfg: RunConfig, system: ReducedSystem | None = None) -> SolveResult:
    """積分のみを行う (ファイルは書かない)"""
    system = build_system(cfg) if system is None else system
    initial = cfg.initial.to_state()
    try:
        trajectory = swinv.integrator.integrate(
            system, cfg.integration_config(), system.initial_vector(initial)
        )
    except swinv.integrator.ImmediateSingularityError as e:
        logging.warning("%s", e)
        event = SingularityEvent(e.s, e.which, (e.s, e.s))
        return SolveResult(EXIT_SINGULARITY, system, None, event)

    if trajectory.event is not None:
        return SolveResult(EXIT_SINGULARITY, system, trajectory, trajectory.event)
    return SolveResult(EXIT_SUCCESS, system, trajectory)


def write_trajectory_csv(
    path: pathlib.Path, frame: pd.DataFrame, event: SingularityEvent | None
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    if event is not None:
        with path.open("a", encoding="utf-8", newline="\n") as f:
            f.write(f"# singularity s={event.s:.17g} which={event.which.value}\n")


def _write_plots(cfg: RunConfig, frame: pd.DataFrame, out_dir: pathlib.Path) -> list[pathlib.Path]:
    paths = []
    abscissa = _ABSCISSA[cfg.case]
    for variable in cfg.output.svg:
        series = list(zip(frame["s"], frame[variable], strict=True))
        try:
            svg = swinv.plot.emit_svg_plot(
                series, swinv.plot.variable_labels(variable, abscissa, cfg.case.value)
            )
        except swinv.plot.EmptySeriesError as e:
            logging.warning("Skip plot of %s: %s", variable, e)
            continue
        path = out_dir / cfg.output.svg_path(variable)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(svg, encoding="utf-8")
        paths.append(path)
    return paths


def run_solve(cfg: RunConfig, out_dir: pathlib.Path) -> SolveResult:
    start_time = time.perf_counter()
    result = solve(cfg)

    frame = trajectory_table(result.system, result.trajectory)
    csv_path = out_dir / cfg.output.csv
    try:
        write_trajectory_csv(csv_path, frame, result.event)
        result.svg_paths = _write_plots(cfg, frame, out_dir)
    except OSError as e:
        logging.error("Failed to write outputs: %s", e)
        result.exit_code = EXIT_IO_ERROR
        return result
    result.csv_path = csv_path

    if result.event is not None:
        logging.warning(
            "solution destroyed: %s vanishes at s=%.9f", result.event.which.value, result.event.s
        )
    logging.info("Save %s.", csv_path)
    logging.info("elapsed time: solve = %.3f sec", time.perf_counter() - start_time)
    return result


def run_verify_residual(cfg: RunConfig, delta: float | None = None) -> tuple[int, str]:
    """解を再構成して元の方程式の残差を評価する"""
    start_time = time.perf_counter()
    delta = cfg.verify.delta if delta is None else delta

    if cfg.case is Case.TRAVELING_X2X1:
        try:
            variant = choose_variant(cfg)
        except swinv.reconstruction.InconclusiveVariantError as e:
            logging.error("%s", e)
            return EXIT_VERIFICATION_FAILED, f"case: {cfg.case.value}\n{e}\nresult: FAIL\n"
        system = ReducedSystem.build(
            cfg.case, cfg.params, cfg.initial.to_state(), variant, cfg.integration.denom_floor
        )
    else:
        system = build_system(cfg)

    result = solve(cfg, system)
    if result.trajectory is None:
        return EXIT_SINGULARITY, f"case: {cfg.case.value}\nimmediate singularity\nresult: FAIL\n"

    report = swinv.reconstruction.verify_trajectory(
        system, result.trajectory, cfg.verify_abscissae(), delta, cfg.verify.tol
    )
    text = f"case: {cfg.case.value}\n" + report.to_text()
    if not report.rows and result.event is not None:
        # 評価点に届く前に解が破壊された
        return EXIT_SINGULARITY, text

    logging.info("elapsed time: verify-residual = %.3f sec", time.perf_counter() - start_time)
    return (EXIT_SUCCESS if report.passed else EXIT_VERIFICATION_FAILED), text


def _scan_one(cfg: RunConfig) -> tuple[int, float]:
    result = solve(cfg)
    if result.event is None:
        return 1, math.nan
    return 0, result.event.s


def _predicted_threshold(scan: ScanConfig) -> float | None:
    base = scan.base
    if base.case is not Case.STATIONARY_X1X3 or scan.vary != "initial.U":
        return None
    try:
        return swinv.reduced.stationary.critical_initial_velocity(
            base.initial.s,
            base.initial.H,
            base.initial.V,
            base.params,
            base.integration.end,
            (scan.lo, scan.hi),
        )
    except ValueError:
        # 走査範囲内で符号が変わらない
        return None


def run_singularity_scan(scan: ScanConfig, out_dir: pathlib.Path) -> tuple[int, pathlib.Path | None]:
    """パラメータを変えて解が破壊されるかを調べる"""
    start_time = time.perf_counter()
    values = scan.values()
    configs = [apply_value(scan.base, scan.vary, value) for value in values]

    if scan.workers == 1:
        outcomes = [_scan_one(cfg) for cfg in configs]
    else:
        processes = scan.workers or min(len(configs), os.cpu_count() or 1)
        # NOTE: 各実行は独立なのでプロセスに分散する
        with multiprocessing.Pool(processes=processes) as pool:
            tasks = [pool.apply_async(_scan_one, (cfg,)) for cfg in configs]
            outcomes = [task.get() for task in tasks]

    frame = pd.DataFrame(
        {
            "value": values,
            "completed": [completed for completed, _ in outcomes],
            "singular_s": [singular_s for _, singular_s in outcomes],
        }
    )

    threshold = _predicted_threshold(scan)
    if threshold is not None:
        logging.info("predicted threshold of %s: %.9f", scan.vary, threshold)

    csv_path = out_dir / scan.base.output.csv.with_name(f"{scan.base.output.csv.stem}_scan.csv")
    try:
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(csv_path, index=False, float_format="%.17g", na_rep="", lineterminator="\n")
    except OSError as e:
        logging.error("Failed to write scan result: %s", e)
        return EXIT_IO_ERROR, None

    logging.info("Save %s.", csv_path)
    logging.info("elapsed time: scan = %.3f sec", time.perf_counter() - start_time)
    return EXIT_SUCCESS, csv_path


def run_lie_check(q: float, omega: float) -> tuple[int, str]:
    start_time = time.perf_counter()
    sc = swinv.lie_l3.StructureConstantsL3.from_params(q, omega)
    report = swinv.lie_l3.verify_optimal_system(sc, LIE_CHECK_TOL)
    logging.info("elapsed time: lie-check = %.3f sec", time.perf_counter() - start_time)
    return (EXIT_SUCCESS if report.passed else EXIT_VERIFICATION_FAILED), report.to_text()
