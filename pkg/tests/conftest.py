#!/usr/bin/env python3
# ruff: noqa: S101
"""
共通テストフィクスチャ

テスト全体で使用する共通のフィクスチャとヘルパーを定義します。
"""

import pathlib
import unittest.mock

import pytest

# === 定数 ===
CONFIG_FILE = "config.example.yaml"
CONFIG_TRAVELING_FILE = "config-traveling.example.yaml"
CONFIG_SIMILARITY_FILE = "config-similarity.example.yaml"
CONFIG_SIMILARITY_WINDOW_FILE = "config-similarity-window.example.yaml"
# プロジェクトルートの reports/evidence/ に SVG を保存
EVIDENCE_DIR = pathlib.Path(__file__).parent.parent / "reports" / "evidence"
EVIDENCE_DIR.mkdir(parents=True, exist_ok=True)


# === 環境モック ===
@pytest.fixture(scope="session", autouse=True)
def env_mock():
    """テスト環境用の環境変数モック"""
    with unittest.mock.patch.dict(
        "os.environ",
        {
            "TEST": "true",
            "NO_COLORED_LOGS": "true",
        },
    ) as fixture:
        yield fixture


@pytest.fixture(autouse=True)
def _clear():
    """各テスト前に case 2 の分母選択のキャッシュをクリア"""
    import swinv.reconstruction

    swinv.reconstruction.clear_variant_cache()
    yield
    swinv.reconstruction.clear_variant_cache()


# === 設定フィクスチャ ===
@pytest.fixture
def config():
    """定常解 (case 1) の設定を読み込む"""
    import swinv.config

    return swinv.config.load(CONFIG_FILE)


@pytest.fixture
def config_traveling():
    """進行波解 (case 2) の設定を読み込む"""
    import swinv.config

    return swinv.config.load(CONFIG_TRAVELING_FILE)


@pytest.fixture
def config_similarity_window():
    """自己相似解 (case 3) の正則区間の設定を読み込む"""
    import swinv.config

    return swinv.config.load(CONFIG_SIMILARITY_WINDOW_FILE)


@pytest.fixture
def model_params():
    """q = q₃ = 5, Ω = 1"""
    from swinv.reduced.common import ModelParams

    return ModelParams(q=5.0, q3=5.0, omega=1.0)


# === 積分のヘルパー ===
def _integrate_case(case, params, initial, end, step=1e-3, variant=None):
    """縮約系を組み立てて積分し (system, trajectory) を返す"""
    import swinv.integrator
    from swinv.reduced.system import ReducedSystem
    from swinv.reduced.traveling import Case2Variant

    variant = Case2Variant.AS_PRINTED if variant is None else variant
    system = ReducedSystem.build(case, params, initial, variant)
    cfg = swinv.integrator.IntegrationConfig(s_start=initial.s, s_end=end, step=step)
    return system, swinv.integrator.integrate(system, cfg, system.initial_vector(initial))


@pytest.fixture
def integrate():
    """縮約系を積分するヘルパー"""
    return _integrate_case
