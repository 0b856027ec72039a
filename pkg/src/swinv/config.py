#!/usr/bin/env python3
"""設定ファイルの型定義

設計方針:
- 設定は YAML で記述し my_lib.config でスキーマ検証してから読み込む
- 未知のキーはエラー，必須キーの欠落はまとめて報告する
- serialize() の出力は parse_config() でそのまま元に戻る
"""

from __future__ import annotations

import dataclasses
import pathlib
from dataclasses import dataclass
from typing import Any

import my_lib.config

import swinv.integrator
import swinv.reconstruction
from swinv.integrator import IntegrationConfig
from swinv.reduced.common import DEFAULT_DENOM_FLOOR, Case, ModelParams, ReducedState
from swinv.reduced.traveling import Case2Variant

__all__ = [
    "ConfigError",
    "RunConfig",
    "ScanConfig",
    "apply_value",
    "load",
    "parse_config",
    "parse_scan_config",
    "serialize",
]

SCHEMA_PATH = pathlib.Path(__file__).parent / "schema" / "run.schema"

# case 2/3 の積分区間の既定の終点
DEFAULT_WINDOW_END = 30.0
PLOT_VARIABLES = ("H", "U", "V")
VARIANT_AUTO = "auto"

SCAN_ALIASES = {
    "U_a": "initial.U",
    "H_a": "initial.H",
    "V_a": "initial.V",
    "a": "initial.s",
}
SCANNABLE = {
    "initial.s",
    "initial.H",
    "initial.U",
    "initial.V",
    "params.q",
    "params.q3",
    "params.omega",
}

_REQUIRED = object()


class ConfigError(ValueError):
    """設定の検証エラー"""


@dataclass(frozen=True)
class InitialConfig:
    """初期値 (s は case 1 で a，case 2/3 で z₀)"""

    s: float
    H: float
    U: float
    V: float

    def to_state(self) -> ReducedState:
        return ReducedState(self.s, self.H, self.U, self.V)


@dataclass(frozen=True)
class IntegrationSection:
    end: float
    step: float = swinv.integrator.DEFAULT_STEP
    denom_floor: float = DEFAULT_DENOM_FLOOR
    max_steps: int = swinv.integrator.DEFAULT_MAX_STEPS
    location_tol: float = swinv.integrator.DEFAULT_LOCATION_TOL


@dataclass(frozen=True)
class OutputConfig:
    """出力ファイル (--out-dir からの相対パス)"""

    csv: pathlib.Path
    svg: tuple[str, ...] = PLOT_VARIABLES

    def svg_path(self, variable: str) -> pathlib.Path:
        return self.csv.with_name(f"{self.csv.stem}_{variable}.svg")


@dataclass(frozen=True)
class VerifyConfig:
    delta: float = swinv.reconstruction.DEFAULT_DELTA
    tol: float = swinv.reconstruction.DEFAULT_TOL
    points: tuple[float, ...] | None = None


@dataclass(frozen=True)
class RunConfig:
    case: Case
    params: ModelParams
    initial: InitialConfig
    integration: IntegrationSection
    output: OutputConfig
    verify: VerifyConfig = VerifyConfig()
    # None は残差による自動選択
    variant: Case2Variant | None = None

    def integration_config(self) -> IntegrationConfig:
        return IntegrationConfig(
            s_start=self.initial.s,
            s_end=self.integration.end,
            step=self.integration.step,
            denom_floor=self.integration.denom_floor,
            max_steps=self.integration.max_steps,
            location_tol=self.integration.location_tol,
        )

    def verify_abscissae(self) -> tuple[float, ...]:
        if self.verify.points is not None:
            return self.verify.points
        return swinv.reconstruction.default_abscissae(self.case, self.initial.s, self.integration.end)


@dataclass(frozen=True)
class ScanConfig:
    base: RunConfig
    vary: str
    lo: float
    hi: float
    count: int
    workers: int = 0

    def values(self) -> list[float]:
        step = (self.hi - self.lo) / (self.count - 1)
        return [self.lo + i * step for i in range(self.count - 1)] + [self.hi]


class _Collector:
    """欠落・未知・不正なキーを集める"""

    def __init__(self) -> None:
        self.missing: list[str] = []
        self.unknown: list[str] = []
        self.invalid: list[str] = []

    def section(self, data: dict[str, Any], name: str, allowed: set[str]) -> dict[str, Any]:
        value = data.get(name, {})
        if value is None:
            value = {}
        if not isinstance(value, dict):
            self.invalid.append(f"{name}: expected a mapping")
            return {}
        self.unknown += [f"{name}.{key}" for key in value if key not in allowed]
        return value

    def take(self, data: dict[str, Any], path: str, key: str, convert=float, default: Any = _REQUIRED) -> Any:
        if key not in data:
            if default is _REQUIRED:
                self.missing.append(f"{path}{key}")
            return default
        value = data[key]
        try:
            if isinstance(value, bool):
                raise TypeError(value)
            return convert(value)
        except (TypeError, ValueError) as e:
            self.invalid.append(f"{path}{key}: {e}")
            return default

    def raise_if_any(self) -> None:
        problems = []
        if self.missing:
            problems.append("missing keys: " + ", ".join(self.missing))
        if self.unknown:
            problems.append("unknown keys: " + ", ".join(self.unknown))
        if self.invalid:
            problems.append("invalid values: " + "; ".join(self.invalid))
        if problems:
            msg = " / ".join(problems)
            raise ConfigError(msg)


def _positive_int(value: Any) -> int:
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"expected an integer: {value}")
    result = int(value)
    if result <= 0:
        raise ValueError(f"must be positive: {value}")
    return result


def _positive_float(value: Any) -> float:
    result = float(value)
    if not result > 0:
        raise ValueError(f"must be positive: {value}")
    return result


def _variant(value: Any) -> Case2Variant | None:
    if value == VARIANT_AUTO:
        return None
    return Case2Variant(value)


def _variables(value: Any) -> tuple[str, ...]:
    variables = tuple(str(v) for v in value)
    unknown = [v for v in variables if v not in PLOT_VARIABLES]
    if unknown:
        raise ValueError(f"unknown plot variables {unknown}")
    return variables


def _points(value: Any) -> tuple[float, ...]:
    return tuple(float(v) for v in value)


_TOP_LEVEL = {"case", "params", "initial", "integration", "output", "verify", "variant", "scan"}


def parse_config(data: dict[str, Any] | None) -> RunConfig:
    """辞書から RunConfig を生成する"""
    data = {} if data is None else data
    if not isinstance(data, dict):
        msg = "config must be a mapping"
        raise ConfigError(msg)

    col = _Collector()
    col.unknown += [key for key in data if key not in _TOP_LEVEL]

    case = col.take(data, "", "case", Case)
    params = col.section(data, "params", {"q", "q3", "omega"})
    initial = col.section(data, "initial", {"s", "H", "U", "V"})
    integration = col.section(
        data, "integration", {"end", "step", "denom_floor", "max_steps", "location_tol"}
    )
    output = col.section(data, "output", {"csv", "svg"})
    verify = col.section(data, "verify", {"delta", "tol", "points"})

    q = col.take(params, "params.", "q")
    q3 = col.take(params, "params.", "q3")
    omega = col.take(params, "params.", "omega")
    if omega == 0:
        col.invalid.append("params.omega: must be nonzero")

    initial_values = {key: col.take(initial, "initial.", key) for key in ("s", "H", "U", "V")}

    end_default = _REQUIRED if case in (Case.STATIONARY_X1X3, _REQUIRED, None) else DEFAULT_WINDOW_END
    end = col.take(integration, "integration.", "end", default=end_default)
    step = col.take(integration, "integration.", "step", _positive_float, swinv.integrator.DEFAULT_STEP)
    denom_floor = col.take(integration, "integration.", "denom_floor", _positive_float, DEFAULT_DENOM_FLOOR)
    max_steps = col.take(
        integration, "integration.", "max_steps", _positive_int, swinv.integrator.DEFAULT_MAX_STEPS
    )
    location_tol = col.take(
        integration, "integration.", "location_tol", _positive_float, swinv.integrator.DEFAULT_LOCATION_TOL
    )

    variant = col.take(data, "", "variant", _variant, None)

    csv_default = f"{case.value}.csv" if isinstance(case, Case) else "trajectory.csv"
    csv = col.take(output, "output.", "csv", pathlib.Path, pathlib.Path(csv_default))
    svg = col.take(output, "output.", "svg", _variables, PLOT_VARIABLES)

    delta = col.take(verify, "verify.", "delta", _positive_float, swinv.reconstruction.DEFAULT_DELTA)
    tol = col.take(verify, "verify.", "tol", _positive_float, swinv.reconstruction.DEFAULT_TOL)
    points = col.take(verify, "verify.", "points", _points, None)

    col.raise_if_any()

    try:
        integration_section = IntegrationSection(end, step, denom_floor, max_steps, location_tol)
        config = RunConfig(
            case=case,
            params=ModelParams(q=q, q3=q3, omega=omega),
            initial=InitialConfig(**initial_values),
            integration=integration_section,
            output=OutputConfig(csv, svg),
            verify=VerifyConfig(delta, tol, points),
            variant=variant,
        )
        config.integration_config()
        config.initial.to_state()
    except ValueError as e:
        raise ConfigError(str(e)) from e

    n_steps = config.integration_config().step_count()
    if n_steps > max_steps:
        msg = f"integration.max_steps: {n_steps} steps are needed but max_steps is {max_steps}"
        raise ConfigError(msg)

    return config


def parse_scan_config(data: dict[str, Any] | None) -> ScanConfig:
    """scan セクションを含む辞書から ScanConfig を生成する"""
    data = {} if data is None else data
    base = parse_config(data)

    col = _Collector()
    if "scan" not in data:
        col.missing.append("scan")
        col.raise_if_any()
    scan = col.section(data, "scan", {"vary", "range", "count", "workers"})

    vary = col.take(scan, "scan.", "vary", str)
    bounds = col.take(scan, "scan.", "range", _points)
    count = col.take(scan, "scan.", "count", _positive_int)
    workers = col.take(scan, "scan.", "workers", int, 0)
    col.raise_if_any()

    vary = SCAN_ALIASES.get(vary, vary)
    if vary not in SCANNABLE:
        msg = f"scan.vary: unsupported field {vary} (choose from {', '.join(sorted(SCANNABLE))})"
        raise ConfigError(msg)
    if len(bounds) != 2 or not bounds[0] < bounds[1]:
        msg = f"scan.range: expected [lo, hi] with lo < hi: {list(bounds)}"
        raise ConfigError(msg)
    if count < 2:
        msg = f"scan.count: must be at least 2: {count}"
        raise ConfigError(msg)

    return ScanConfig(base=base, vary=vary, lo=bounds[0], hi=bounds[1], count=count, workers=workers)


def apply_value(cfg: RunConfig, path: str, value: float) -> RunConfig:
    """ドット区切りのフィールドを置き換えた RunConfig を返す"""
    section, key = path.split(".", 1)
    updated = dataclasses.replace(getattr(cfg, section), **{key: value})
    return dataclasses.replace(cfg, **{section: updated})


def serialize(cfg: RunConfig) -> dict[str, Any]:
    """parse_config() の逆変換"""
    return {
        "case": cfg.case.value,
        "params": {"q": cfg.params.q, "q3": cfg.params.q3, "omega": cfg.params.omega},
        "initial": dataclasses.asdict(cfg.initial),
        "integration": dataclasses.asdict(cfg.integration),
        "variant": VARIANT_AUTO if cfg.variant is None else cfg.variant.value,
        "output": {"csv": str(cfg.output.csv), "svg": list(cfg.output.svg)},
        "verify": {
            "delta": cfg.verify.delta,
            "tol": cfg.verify.tol,
            **({} if cfg.verify.points is None else {"points": list(cfg.verify.points)}),
        },
    }


def _describe(e: BaseException) -> str:
    # YAML の構文エラーには行と列，スキーマ違反にはキーの位置を添える
    for err in (e, e.__cause__):
        mark = getattr(err, "problem_mark", None)
        if mark is not None:
            problem = getattr(err, "problem", None) or err
            return f"line {mark.line + 1}, column {mark.column + 1}: {problem}"
        path = getattr(err, "absolute_path", None)
        if path is not None:
            where = ".".join(str(part) for part in path) or "(root)"
            return f"{where}: {getattr(err, 'message', err)}"
    return str(e)


def _read(config_path: str | pathlib.Path, schema_path: pathlib.Path | None) -> Any:
    """YAML を読み込んでスキーマ検証する．読めない場合の OSError 以外は ConfigError にする"""
    try:
        return my_lib.config.load(str(config_path), schema_path)
    except OSError:
        raise
    except Exception as e:
        msg = f"{config_path}: {_describe(e)}"
        raise ConfigError(msg) from e


def load(config_path: str | pathlib.Path, schema_path: pathlib.Path | None = SCHEMA_PATH) -> RunConfig:
    """設定ファイルを読み込んで RunConfig を返す"""
    return parse_config(_read(config_path, schema_path))


def load_scan(config_path: str | pathlib.Path, schema_path: pathlib.Path | None = SCHEMA_PATH) -> ScanConfig:
    """scan セクションを含む設定ファイルを読み込んで ScanConfig を返す"""
    return parse_scan_config(_read(config_path, schema_path))
