import json

import pytest

from staf.config import ConfigError, RunConfig, load_config, save_config


def test_defaults_pass_validation():
    config = RunConfig().validate()
    assert config.variant == "B"
    assert config.sigma == 7.0
    assert config.radius == 8.0
    assert config.alpha == 0.5


def test_validation_names_the_bad_field():
    with pytest.raises(ConfigError, match="variant"):
        RunConfig(variant="Z").validate()
    with pytest.raises(ConfigError, match="sigma"):
        RunConfig(sigma=-1.0).validate()
    with pytest.raises(ConfigError, match="alpha"):
        RunConfig(alpha=1.5).validate()
    with pytest.raises(ConfigError, match="n_samples"):
        RunConfig(n_samples=1).validate()


def test_file_layer(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"sigma": 5.0, "variant": "A"}))
    config = load_config(path, env={})
    assert config.sigma == 5.0
    assert config.variant == "A"
    assert config.radius == 8.0


def test_unknown_file_key_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"smoothing": 3}))
    with pytest.raises(ConfigError, match="smoothing"):
        load_config(path, env={})


def test_invalid_json_rejected(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text("{:::")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(path, env={})


def test_env_layer_overrides_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"sigma": 5.0}))
    config = load_config(path, env={"STAF_SIGMA": "6.5", "STAF_MAX_MISSES": "3"})
    assert config.sigma == 6.5
    assert config.max_misses == 3


def test_explicit_overrides_win(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"sigma": 5.0}))
    config = load_config(path, env={"STAF_SIGMA": "6.5"}, overrides={"sigma": "7.25"})
    assert config.sigma == 7.25


def test_coercion_failure_names_field_and_layer_value():
    with pytest.raises(ConfigError, match="seed"):
        load_config(env={"STAF_SEED": "twelve"})


def test_bool_is_not_a_number():
    with pytest.raises(ConfigError, match="n_samples"):
        load_config(env={}, overrides={"n_samples": True})


def test_save_load_roundtrip(tmp_path):
    config = RunConfig(variant="C", sigma=4.0, seed=11)
    path = tmp_path / "cfg.json"
    save_config(config, path)
    assert load_config(path, env={}) == config


def test_derived_parameter_objects():
    config = RunConfig(alpha=0.25, min_keypoints=4, min_id_votes=3, max_misses=2)
    params = config.inference_params()
    assert params.alpha == 0.25 and params.min_keypoints == 4
    tp = config.tracker_params()
    assert tp.min_id_votes == 3 and tp.max_misses == 2
    assert config.topology().n_channels == 309
