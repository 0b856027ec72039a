#!/usr/bin/env python3
# ruff: noqa: S101
"""
サブコマンド処理の結合テスト

設定ファイルから積分・CSV/SVG 出力・残差検証・走査までを通して確認します。
"""

import dataclasses

import numpy as np
import pandas as pd
import pytest


def _lines(path):
    return path.read_text(encoding="utf-8").splitlines()


def _negated_dh(mocker):
    import swinv.reduced.traveling

    original = swinv.reduced.traveling.rhs_case2

    def corrupted(*args, **kwargs):
        deriv = original(*args, **kwargs)
        return dataclasses.replace(deriv, dH=-deriv.dH)

    return mocker.patch("swinv.reduced.traveling.rhs_case2", side_effect=corrupted)


class TestRunSolve:
    """solve サブコマンドのテスト"""

    def test_stationary_profile(self, config, tmp_path):
        """定常解を最後まで積分して CSV と SVG を出力すること"""
        import swinv.runner
        from swinv.reduced.system import TABLE_COLUMNS, trajectory_table

        result = swinv.runner.run_solve(config, tmp_path)

        assert result.exit_code == swinv.runner.EXIT_SUCCESS
        assert result.event is None
        assert result.csv_path == tmp_path / "stationary.csv"
        names = [p.name for p in result.svg_paths]
        assert names == ["stationary_H.svg", "stationary_U.svg", "stationary_V.svg"]
        for path in result.svg_paths:
            assert "<svg" in path.read_text(encoding="utf-8")

        frame = pd.read_csv(result.csv_path, comment="#")
        assert list(frame.columns) == TABLE_COLUMNS
        assert frame["s"].iloc[0] == 1.4
        assert frame["s"].iloc[-1] == pytest.approx(-1.4, abs=1e-12)
        assert (frame["H"] > 0).all()
        assert (frame["den_min"] > 0).all()
        assert not any(line.startswith("#") for line in _lines(result.csv_path))

        # 17 桁で書き出しているので値がそのまま戻る
        expected = trajectory_table(result.system, result.trajectory)
        pd.testing.assert_frame_equal(frame, expected, check_exact=True)

    def test_stationary_humps(self, config, tmp_path):
        """H(y) が y = ±0.7 付近にふたつのこぶを持つこと"""
        import scipy.signal

        import swinv.runner

        result = swinv.runner.run_solve(config, tmp_path)
        frame = pd.read_csv(result.csv_path, comment="#")

        peaks, _ = scipy.signal.find_peaks(frame["H"].to_numpy())

        assert len(peaks) == 2
        ys = sorted(frame["s"].to_numpy()[peaks])
        assert ys[0] == pytest.approx(-0.7, abs=0.15)
        assert ys[1] == pytest.approx(0.7, abs=0.15)

    def test_slow_flow_records_singularity(self, config, tmp_path):
        """U(a) = 0.30 では分母の消失を CSV の末尾に記録すること"""
        import swinv.config
        import swinv.runner

        cfg = swinv.config.apply_value(config, "initial.U", 0.30)

        result = swinv.runner.run_solve(cfg, tmp_path)

        assert result.exit_code == swinv.runner.EXIT_SINGULARITY
        last = _lines(result.csv_path)[-1]
        assert last.startswith("# singularity s=")
        assert last.endswith("which=case1_den")
        s = float(last.split("s=")[1].split()[0])
        assert 0.65 <= s <= 0.8

        frame = pd.read_csv(result.csv_path, comment="#")
        assert frame["s"].min() > s

    def test_immediate_singularity(self, config_similarity_window, tmp_path):
        """初期状態で分母が消えていれば空の表と特異点の記録を出力すること"""
        import swinv.config
        import swinv.runner

        cfg = swinv.config.apply_value(config_similarity_window, "initial.V", 0.0)

        result = swinv.runner.run_solve(cfg, tmp_path)

        assert result.exit_code == swinv.runner.EXIT_SINGULARITY
        assert result.trajectory is None
        lines = _lines(result.csv_path)
        assert lines[0] == "s,H,U,V,dH,dU,dV,den_min"
        assert len(lines) == 2
        assert lines[1].startswith("# singularity s=0 which=case3_")
        assert result.svg_paths == []

    def test_unwritable_output(self, config, tmp_path):
        """出力先に書き込めなければ終了コード 4 になること"""
        import swinv.runner

        blocker = tmp_path / "blocker"
        blocker.write_text("", encoding="utf-8")

        result = swinv.runner.run_solve(config, blocker)

        assert result.exit_code == swinv.runner.EXIT_IO_ERROR
        assert result.csv_path is None

    def test_traveling_config(self, config_traveling, tmp_path):
        """進行波解の設定で積分できること"""
        import swinv.runner

        result = swinv.runner.run_solve(config_traveling, tmp_path)

        assert result.exit_code in (swinv.runner.EXIT_SUCCESS, swinv.runner.EXIT_SINGULARITY)
        assert result.csv_path.exists()
        frame = pd.read_csv(result.csv_path, comment="#")
        assert frame["s"].iloc[0] == -30.0
        assert np.all(np.diff(frame["s"].to_numpy()) > 0)

    def test_similarity_long_window_is_destroyed(self, tmp_path):
        """z₀ = -30 から始めた自己相似解は分母の消失で打ち切られること"""
        import swinv.config
        import swinv.runner

        from tests.conftest import CONFIG_SIMILARITY_FILE

        cfg = swinv.config.load(CONFIG_SIMILARITY_FILE)

        result = swinv.runner.run_solve(cfg, tmp_path)

        assert result.exit_code == swinv.runner.EXIT_SINGULARITY
        assert result.event is not None
        assert _lines(result.csv_path)[-1].startswith("# singularity")

    def test_similarity_window(self, config_similarity_window, tmp_path):
        """正則区間では最後まで積分できること"""
        import swinv.runner

        result = swinv.runner.run_solve(config_similarity_window, tmp_path)

        assert result.exit_code == swinv.runner.EXIT_SUCCESS
        frame = pd.read_csv(result.csv_path, comment="#")
        assert frame["s"].iloc[-1] == pytest.approx(1.0, abs=1e-12)


class TestRunVerifyResidual:
    """verify-residual サブコマンドのテスト"""

    def test_stationary(self, config):
        """定常解の残差検証に合格すること"""
        import swinv.runner

        exit_code, text = swinv.runner.run_verify_residual(config)

        assert exit_code == swinv.runner.EXIT_SUCCESS
        assert text.startswith("case: stationary_x1x3\n")
        assert text.rstrip().endswith("result: PASS")

    @pytest.mark.parametrize("q", [0.0, 7.0])
    def test_similarity_window(self, config_similarity_window, q):
        """自己相似解の残差検証は q によらず合格すること"""
        import swinv.config
        import swinv.runner

        cfg = swinv.config.apply_value(config_similarity_window, "params.q", q)

        exit_code, text = swinv.runner.run_verify_residual(cfg)

        assert exit_code == swinv.runner.EXIT_SUCCESS
        assert "result: PASS" in text

    def test_traveling_uses_as_printed(self, config_traveling):
        """進行波解は印刷どおりの分母で残差検証に合格すること"""
        import swinv.config
        import swinv.runner

        cfg = swinv.config.apply_value(config_traveling, "integration.end", -29.0)

        exit_code, text = swinv.runner.run_verify_residual(cfg)

        assert exit_code == swinv.runner.EXIT_SUCCESS
        assert "variant: as_printed" in text

    def test_corrupted_system_fails(self, config_traveling, mocker):
        """H′ の符号を反転させた系は検証に失敗すること"""
        import swinv.config
        import swinv.runner

        _negated_dh(mocker)
        cfg = swinv.config.apply_value(config_traveling, "integration.end", -29.0)

        exit_code, text = swinv.runner.run_verify_residual(cfg)

        assert exit_code == swinv.runner.EXIT_VERIFICATION_FAILED
        assert "inconclusive" in text
        assert text.rstrip().endswith("result: FAIL")

    def test_immediate_singularity(self, config_similarity_window):
        """初期状態で特異なら終了コード 2 になること"""
        import swinv.config
        import swinv.runner

        cfg = swinv.config.apply_value(config_similarity_window, "initial.V", 0.0)

        exit_code, text = swinv.runner.run_verify_residual(cfg)

        assert exit_code == swinv.runner.EXIT_SINGULARITY
        assert "result: FAIL" in text


class TestRunSingularityScan:
    """scan サブコマンドのテスト"""

    def test_initial_velocity_threshold(self, tmp_path):
        """U(a) の走査で破壊と完走の境界がひとつだけ現れること"""
        import swinv.config
        import swinv.runner

        from tests.conftest import CONFIG_FILE

        scan = swinv.config.load_scan(CONFIG_FILE)
        scan = dataclasses.replace(scan, lo=0.310, hi=0.320, count=11, workers=1)

        exit_code, csv_path = swinv.runner.run_singularity_scan(scan, tmp_path)

        assert exit_code == swinv.runner.EXIT_SUCCESS
        assert csv_path == tmp_path / "stationary_scan.csv"
        frame = pd.read_csv(csv_path)
        assert list(frame.columns) == ["value", "completed", "singular_s"]
        assert len(frame) == 11

        completed = frame["completed"].to_numpy()
        values = frame["value"].to_numpy()
        assert (completed[values <= 0.3125] == 0).all()
        assert (completed[values >= 0.3165] == 1).all()
        assert np.count_nonzero(np.diff(completed)) == 1
        assert frame.loc[frame["completed"] == 1, "singular_s"].isna().all()
        assert frame.loc[frame["completed"] == 0, "singular_s"].between(0.6, 0.9).all()

    def test_worker_pool(self, tmp_path):
        """プロセスプールでも同じ結果になること"""
        import swinv.config
        import swinv.runner

        from tests.conftest import CONFIG_FILE

        scan = swinv.config.load_scan(CONFIG_FILE)
        scan = dataclasses.replace(scan, lo=0.30, hi=0.317, count=2, workers=2)

        exit_code, csv_path = swinv.runner.run_singularity_scan(scan, tmp_path)

        assert exit_code == swinv.runner.EXIT_SUCCESS
        frame = pd.read_csv(csv_path)
        assert frame["value"].tolist() == [0.30, 0.317]
        assert frame["completed"].tolist() == [0, 1]

    def test_unwritable_output(self, tmp_path):
        """出力先に書き込めなければ終了コード 4 になること"""
        import swinv.config
        import swinv.runner

        from tests.conftest import CONFIG_FILE

        scan = swinv.config.load_scan(CONFIG_FILE)
        scan = dataclasses.replace(scan, lo=0.316, hi=0.317, count=2, workers=1)
        blocker = tmp_path / "blocker"
        blocker.write_text("", encoding="utf-8")

        exit_code, csv_path = swinv.runner.run_singularity_scan(scan, blocker)

        assert exit_code == swinv.runner.EXIT_IO_ERROR
        assert csv_path is None


class TestRunLieCheck:
    """lie-check サブコマンドのテスト"""

    @pytest.mark.parametrize("q", [0.0, 2.0, 10.0])
    def test_passes(self, q):
        """最適系の検査に合格すること"""
        import swinv.runner

        exit_code, text = swinv.runner.run_lie_check(q, 1.0)

        assert exit_code == swinv.runner.EXIT_SUCCESS
        assert text.startswith("lie-check k=")
        assert text.rstrip().endswith("result: PASS")
