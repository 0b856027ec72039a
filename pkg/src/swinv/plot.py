#!/usr/bin/env python3
"""
縮約変数の折れ線グラフを SVG で生成します。

Usage:
  plot.py -i CSV_FILE -v VARIABLE -o SVG_FILE [-D]

Options:
  -i CSV_FILE       : solve が出力した CSV を読み込みます。
  -v VARIABLE       : 描画する変数 (H, U, V) を指定します。
  -o SVG_FILE       : 生成した SVG を指定されたパスに保存します。
  -D                : デバッグモードで動作します。
"""

from __future__ import annotations

import io
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot

_FIGURE_SIZE = (6.4, 4.0)
_MARGIN = 0.05
# 同じ入力から同じバイト列を得るための設定
_SVG_RC = {
    "svg.hashsalt": "swinv",
    "svg.fonttype": "path",
    "path.simplify": False,
}


class EmptySeriesError(ValueError):
    """描画できる点が足りない場合に発生するエラー"""


@dataclass(frozen=True)
class PlotLabels:
    title: str
    xlabel: str
    ylabel: str


def emit_svg_plot(series: Sequence[tuple[float, float]], labels: PlotLabels) -> str:
    """(s, value) の列を 1 本の折れ線として描いた SVG 文書を返す"""
    if len(series) < 2:
        msg = f"at least two points are needed: {len(series)}"
        raise EmptySeriesError(msg)
    if not all(math.isfinite(s) and math.isfinite(value) for s, value in series):
        msg = "series contains non-finite values"
        raise EmptySeriesError(msg)

    xs = [s for s, _ in series]
    ys = [value for _, value in series]

    with matplotlib.rc_context(_SVG_RC):
        fig = matplotlib.pyplot.figure(figsize=_FIGURE_SIZE)
        try:
            ax = fig.add_subplot(1, 1, 1)
            ax.plot(xs, ys, color="#1f4e79", linewidth=1.2)
            ax.margins(_MARGIN)
            ax.set_title(labels.title)
            ax.set_xlabel(labels.xlabel)
            ax.set_ylabel(labels.ylabel)
            ax.grid(True, linewidth=0.3)

            buf = io.StringIO()
            fig.savefig(buf, format="svg", metadata={"Date": None})
            return buf.getvalue()
        finally:
            matplotlib.pyplot.clf()
            matplotlib.pyplot.close(fig)


def variable_labels(variable: str, abscissa: str, title: str) -> PlotLabels:
    return PlotLabels(title=f"{title}: {variable}({abscissa})", xlabel=abscissa, ylabel=variable)


if __name__ == "__main__":
    # TEST Code
    import pathlib

    import docopt
    import my_lib.logger
    import pandas as pd

    args = docopt.docopt(__doc__)

    csv_file = args["-i"]
    variable = args["-v"]
    out_file = pathlib.Path(args["-o"])
    debug_mode = args["-D"]

    my_lib.logger.init("swinv", level=logging.DEBUG if debug_mode else logging.INFO)

    frame = pd.read_csv(csv_file, comment="#")
    series = list(zip(frame["s"], frame[variable], strict=True))
    svg = emit_svg_plot(series, variable_labels(variable, "s", csv_file))
    out_file.write_text(svg, encoding="utf-8")

    logging.info("Save %s.", out_file)
