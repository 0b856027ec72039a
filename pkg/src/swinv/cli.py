#!/usr/bin/env python3
"""
回転浅水方程式の不変解を数値的に求めて検証します。

Usage:
  swinv solve CONFIG [--out-dir DIR] [--step H] [--quiet] [-D]
  swinv verify-residual CONFIG [--delta D] [--step H] [--quiet] [-D]
  swinv scan CONFIG [--out-dir DIR] [--step H] [--quiet] [-D]
  swinv lie-check [--q Q] [--omega W] [--quiet] [-D]

Options:
  --out-dir DIR     : 出力ファイルを DIR 以下に保存します。[default: .]
  --step H          : 設定ファイルの積分刻み幅を H で上書きします。
  --delta D         : 残差評価の差分間隔を指定します。(省略時は設定ファイルの値)
  --q Q             : リー代数の検査に使うパラメータ q を指定します。[default: 0]
  --omega W         : リー代数の検査に使うパラメータ Ω を指定します。[default: 1]
  --quiet           : 警告以上のログのみ出力します。
  -D                : デバッグモードで動作します。
"""

from __future__ import annotations

import dataclasses
import logging
import pathlib
import sys

import docopt
import my_lib.logger

import swinv.config
import swinv.runner
from swinv.config import ConfigError, RunConfig

# 設定ファイルまたは引数の誤り
EXIT_CONFIG_ERROR = 1


def _override_step(cfg: RunConfig, step: str | None) -> RunConfig:
    if step is None:
        return cfg
    data = swinv.config.serialize(cfg)
    try:
        data["integration"]["step"] = float(step)
    except ValueError as e:
        msg = f"--step: invalid value {step}"
        raise ConfigError(msg) from e
    return swinv.config.parse_config(data)


def _log_level(args: dict) -> int:
    if args["-D"]:
        return logging.DEBUG
    if args["--quiet"]:
        return logging.WARNING
    return logging.INFO


def _execute(args: dict) -> int:
    if args["lie-check"]:
        try:
            q = float(args["--q"])
            omega = float(args["--omega"])
        except ValueError as e:
            logging.error("Invalid argument: %s", e)
            return EXIT_CONFIG_ERROR
        if omega == 0:
            logging.error("--omega must be nonzero")
            return EXIT_CONFIG_ERROR
        status, text = swinv.runner.run_lie_check(q, omega)
        print(text, end="")  # noqa: T201
        return status

    config_file = pathlib.Path(args["CONFIG"])
    out_dir = pathlib.Path(args["--out-dir"] or ".")

    try:
        if args["scan"]:
            scan = swinv.config.load_scan(config_file)
            scan = dataclasses.replace(scan, base=_override_step(scan.base, args["--step"]))
        else:
            cfg = _override_step(swinv.config.load(config_file), args["--step"])
    except ConfigError as e:
        logging.error("Invalid config %s: %s", config_file, e)
        return EXIT_CONFIG_ERROR
    except OSError as e:
        logging.error("Failed to read %s: %s", config_file, e)
        return swinv.runner.EXIT_IO_ERROR

    if args["solve"]:
        return swinv.runner.run_solve(cfg, out_dir).exit_code

    if args["verify-residual"]:
        try:
            delta = None if args["--delta"] is None else float(args["--delta"])
        except ValueError as e:
            logging.error("Invalid argument: %s", e)
            return EXIT_CONFIG_ERROR
        status, text = swinv.runner.run_verify_residual(cfg, delta)
        print(text, end="")  # noqa: T201
        return status

    status, _ = swinv.runner.run_singularity_scan(scan, out_dir)
    return status


def main(argv: list[str] | None = None) -> int:
    assert __doc__ is not None  # noqa: S101
    args = docopt.docopt(__doc__, argv=argv)

    my_lib.logger.init("swinv", level=_log_level(args))

    try:
        status = _execute(args)
    except Exception:
        logging.exception("Unexpected error")
        raise
    logging.info("Finish (exit code: %d).", status)
    return status


if __name__ == "__main__":
    sys.exit(main())
