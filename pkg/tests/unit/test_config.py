#!/usr/bin/env python3
# ruff: noqa: S101
"""
設定ファイル関連のユニットテスト
"""

import pathlib

import pytest

CONFIG_FILES = [
    "config.example.yaml",
    "config-traveling.example.yaml",
    "config-similarity.example.yaml",
    "config-similarity-window.example.yaml",
]


def _minimal(**overrides):
    data = {
        "case": "stationary_x1x3",
        "params": {"q": 5.0, "q3": 5.0, "omega": 1.0},
        "initial": {"s": 1.4, "H": 1.5, "U": 0.317, "V": 6.0},
        "integration": {"end": -1.4},
    }
    data.update(overrides)
    return data


class TestConfigLoad:
    """設定ファイル読み込みのテスト"""

    def test_load_stationary_config(self, config):
        """定常解の設定ファイルが正しく読み込めること"""
        from swinv.reduced.common import Case

        assert config.case is Case.STATIONARY_X1X3
        assert (config.params.q, config.params.q3, config.params.omega) == (5.0, 5.0, 1.0)
        initial = config.initial
        assert (initial.s, initial.H, initial.U, initial.V) == (1.4, 1.5, 0.317, 6.0)
        assert config.integration.end == -1.4
        assert config.integration.step == 1e-3
        assert config.output.csv == pathlib.Path("stationary.csv")
        assert config.output.svg == ("H", "U", "V")

    @pytest.mark.parametrize("config_file", CONFIG_FILES)
    def test_shipped_configs_load(self, config_file):
        """同梱の設定ファイルがすべて読み込めること"""
        import swinv.config

        assert swinv.config.load(config_file) is not None

    def test_traveling_config_uses_auto_variant(self, config_traveling):
        """進行波解の設定は分母を自動選択すること"""
        assert config_traveling.variant is None
        assert config_traveling.integration.end == 30.0

    def test_load_scan_config(self):
        """scan セクションが読み込めること"""
        import swinv.config

        scan = swinv.config.load_scan("config.example.yaml")

        assert scan.vary == "initial.U"
        assert (scan.lo, scan.hi, scan.count) == (0.310, 0.330, 21)
        values = scan.values()
        assert len(values) == 21
        assert values[0] == 0.310
        assert values[-1] == 0.330
        assert values[6] == pytest.approx(0.316)

    def test_empty_file_lists_all_missing_keys(self, tmp_path):
        """空のファイルでは必須キーがすべて列挙されること"""
        import swinv.config

        path = tmp_path / "empty.yaml"
        path.write_text("", encoding="utf-8")

        with pytest.raises(swinv.config.ConfigError) as exc_info:
            swinv.config.load(path)

        message = str(exc_info.value)
        for key in ("case", "params.q", "params.omega", "initial.s", "initial.H", "integration.end"):
            assert key in message

    def test_empty_file_for_scan(self, tmp_path):
        """scan 用の読み込みでも空のファイルは ConfigError になること"""
        import swinv.config

        path = tmp_path / "empty.yaml"
        path.write_text("# no settings\n", encoding="utf-8")

        with pytest.raises(swinv.config.ConfigError, match="case"):
            swinv.config.load_scan(path)

    def test_malformed_yaml_reports_line(self, tmp_path):
        """YAML の構文エラーは行番号つきの ConfigError になること"""
        import swinv.config

        path = tmp_path / "broken.yaml"
        path.write_text("case: stationary_x1x3\n  params: 5\n", encoding="utf-8")

        with pytest.raises(swinv.config.ConfigError, match=r"broken\.yaml: line 2, column \d+"):
            swinv.config.load(path)

    def test_schema_violation(self, tmp_path):
        """スキーマに合わない値は ConfigError になること"""
        import swinv.config

        path = tmp_path / "typed.yaml"
        path.write_text("case: stationary_x1x3\nparams:\n  q: abc\n", encoding="utf-8")

        with pytest.raises(swinv.config.ConfigError, match=r"typed\.yaml"):
            swinv.config.load(path)

    def test_missing_file_is_os_error(self, tmp_path):
        """存在しないファイルは OSError のまま送出されること"""
        import swinv.config

        with pytest.raises(OSError):
            swinv.config.load(tmp_path / "missing.yaml")


class TestParseConfig:
    """設定の検証のテスト"""

    def test_empty_document_lists_all_missing_keys(self):
        """空の設定では必須キーがすべて列挙されること"""
        from swinv.config import ConfigError, parse_config

        with pytest.raises(ConfigError) as exc_info:
            parse_config({})

        message = str(exc_info.value)
        expected = [
            "case",
            "params.q",
            "params.q3",
            "params.omega",
            "initial.s",
            "initial.V",
            "integration.end",
        ]
        for key in expected:
            assert key in message

    def test_zero_omega_rejected(self):
        """Ω = 0 はエラーになること"""
        from swinv.config import ConfigError, parse_config

        with pytest.raises(ConfigError, match="params.omega"):
            parse_config(_minimal(params={"q": 5.0, "q3": 5.0, "omega": 0.0}))

    def test_unknown_keys_rejected(self):
        """未知のキーはエラーになること"""
        from swinv.config import ConfigError, parse_config

        with pytest.raises(ConfigError, match=r"unknown keys: colour, params\.f0"):
            parse_config(_minimal(params={"q": 5.0, "q3": 5.0, "omega": 1.0, "f0": 0.0}, colour="red"))

    def test_unknown_case_rejected(self):
        """未知の case はエラーになること"""
        from swinv.config import ConfigError, parse_config

        with pytest.raises(ConfigError, match="case"):
            parse_config(_minimal(case="rotating"))

    def test_window_end_defaults_for_similarity(self):
        """case 2/3 では終点を省略すると 30 になること"""
        from swinv.config import parse_config

        cfg = parse_config(_minimal(case="similarity_x2x3", integration={}))

        assert cfg.integration.end == 30.0

    def test_stationary_requires_end(self):
        """case 1 では終点が必須であること"""
        from swinv.config import ConfigError, parse_config

        with pytest.raises(ConfigError, match="integration.end"):
            parse_config(_minimal(integration={"step": 1e-3}))

    def test_step_limit(self):
        """刻み数が max_steps を超えるとエラーになること"""
        from swinv.config import ConfigError, parse_config

        with pytest.raises(ConfigError, match="max_steps"):
            parse_config(_minimal(integration={"end": -1.4, "step": 1e-3, "max_steps": 100}))

    def test_non_positive_step_rejected(self):
        """刻み幅が正でなければエラーになること"""
        from swinv.config import ConfigError, parse_config

        with pytest.raises(ConfigError, match="integration.step"):
            parse_config(_minimal(integration={"end": -1.4, "step": -1e-3}))

    def test_unknown_plot_variable_rejected(self):
        """描画できない変数はエラーになること"""
        from swinv.config import ConfigError, parse_config

        with pytest.raises(ConfigError, match="output.svg"):
            parse_config(_minimal(output={"svg": ["H", "W"]}))

    def test_default_outputs(self):
        """出力ファイル名の既定値が case から決まること"""
        from swinv.config import parse_config

        cfg = parse_config(_minimal())

        assert cfg.output.csv == pathlib.Path("stationary_x1x3.csv")
        assert cfg.output.svg_path("H") == pathlib.Path("stationary_x1x3_H.svg")
        assert cfg.verify_abscissae() == (-1.0, -0.5, 0.0, 0.5, 1.0)

    @pytest.mark.parametrize("config_file", CONFIG_FILES)
    def test_round_trip(self, config_file):
        """serialize() の結果を parse_config() で元に戻せること"""
        import swinv.config

        cfg = swinv.config.load(config_file)

        assert swinv.config.parse_config(swinv.config.serialize(cfg)) == cfg

    def test_round_trip_with_explicit_fields(self):
        """分母と評価点を指定した設定も元に戻せること"""
        from swinv.config import parse_config, serialize
        from swinv.reduced.traveling import Case2Variant

        cfg = parse_config(
            _minimal(
                case="traveling_x2x1",
                variant="dh_denominator",
                initial={"s": -30.0, "H": 2.0, "U": -3.0, "V": 5.0},
                integration={"end": -20.0, "step": 1e-2},
                verify={"points": [-29.5, -29.0]},
            )
        )

        assert cfg.variant is Case2Variant.DH_DENOMINATOR
        assert cfg.verify_abscissae() == (-29.5, -29.0)
        assert parse_config(serialize(cfg)) == cfg


class TestScanConfig:
    """走査設定のテスト"""

    def test_alias_and_values(self):
        """U_a が initial.U に読み替えられ，端点を含む等間隔の値になること"""
        from swinv.config import parse_scan_config

        scan = parse_scan_config(_minimal(scan={"vary": "U_a", "range": [0.31, 0.33], "count": 2}))

        assert scan.vary == "initial.U"
        assert scan.values() == [0.31, 0.33]
        assert scan.workers == 0

    @pytest.mark.parametrize(
        ("scan", "match"),
        [
            ({"vary": "U_a", "range": [0.33, 0.31], "count": 5}, "scan.range"),
            ({"vary": "U_a", "range": [0.31, 0.33], "count": 1}, "scan.count"),
            ({"vary": "integration.step", "range": [0.1, 0.2], "count": 3}, "scan.vary"),
            ({"vary": "U_a", "count": 3}, "scan.range"),
        ],
    )
    def test_invalid_scan_rejected(self, scan, match):
        """不正な走査設定はエラーになること"""
        from swinv.config import ConfigError, parse_scan_config

        with pytest.raises(ConfigError, match=match):
            parse_scan_config(_minimal(scan=scan))

    def test_missing_scan_section(self):
        """scan セクションがなければエラーになること"""
        from swinv.config import ConfigError, parse_scan_config

        with pytest.raises(ConfigError, match="scan"):
            parse_scan_config(_minimal())

    def test_apply_value(self):
        """ドット区切りのフィールドだけが置き換わること"""
        from swinv.config import apply_value, parse_config

        cfg = parse_config(_minimal())

        updated = apply_value(cfg, "params.q3", 7.0)

        assert updated.params.q3 == 7.0
        assert updated.params.q == cfg.params.q
        assert updated.initial == cfg.initial
        assert cfg.params.q3 == 5.0
