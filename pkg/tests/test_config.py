from __future__ import annotations

from pathlib import Path

import pytest

from varwidthci.config import (
    OUTPUT_DIR_ENV,
    ConfigError,
    RunConfig,
    default_output_dir,
    load_config,
    merge,
    parse_config_text,
    save_config,
)


def test_defaults():
    config = RunConfig()
    assert config.alpha == 0.05
    assert config.w == 0.1
    assert config.bfun == "standard"
    assert config.n == 0
    assert config.seed == 0


def test_parse_config_text():
    text = """
    # solver settings
    alpha = 0.1
    knot-count = 41   # trailing comment
    bfun = runs/b.json
    """
    assert parse_config_text(text) == {"alpha": "0.1", "knot_count": "41", "bfun": "runs/b.json"}


def test_parse_config_text_rejects_bare_words():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config_text("alpha = 0.1\nnonsense\n")


def test_merge_coerces_and_ignores_unknown_keys():
    base = RunConfig()
    merged = merge(base, {"alpha": "0.1", "knot-count": "1e2", "unknown": "x", "w": None, "kind": " lasso "})
    assert merged.alpha == 0.1
    assert merged.knot_count == 100
    assert merged.w == base.w
    assert merged.kind == "lasso"
    assert base.alpha == 0.05


@pytest.mark.parametrize("overrides", [{"alpha": "abc"}, {"knot_count": "40.5"}, {"seed": "many"}])
def test_merge_rejects_bad_values(overrides):
    with pytest.raises(ConfigError):
        merge(RunConfig(), overrides)


def test_load_config(tmp_path):
    assert load_config() == RunConfig()
    path = tmp_path / "run.cfg"
    path.write_text("w = 0.25\nn = 20\npsi_values = 0,1,2\n", encoding="utf-8")
    config = load_config(path)
    assert config.w == 0.25
    assert config.n == 20
    assert config.psi_values == "0,1,2"


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="Cannot read"):
        load_config(tmp_path / "absent.cfg")


def test_save_then_load_restores_config(tmp_path):
    config = merge(RunConfig(), {"command": "theorem2", "alpha": 0.01, "n_list": "10,20", "out": "x.csv"})
    path = tmp_path / "saved.cfg"
    save_config(config, path)
    assert load_config(path) == config


def test_default_output_dir(monkeypatch, tmp_path):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)
    assert default_output_dir() == Path(".")
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(tmp_path))
    assert default_output_dir() == tmp_path
