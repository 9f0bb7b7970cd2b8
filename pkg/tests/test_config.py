import pytest
from pydantic import ValidationError as PydanticValidationError

from config import Settings, load_config_file
from exceptions import ValidationError
from models.frame import BitDepth
from models.schemas import CflMode, QuantizerConfig, RunConfig


def test_run_config_defaults():
    config = RunConfig()
    assert config.quantizers == [20, 32, 43, 55]
    assert config.cfl == CflMode.BOTH
    assert config.lambda_const == pytest.approx(0.057)
    assert (config.rate_model, config.search_space, config.block_size) == ("param-only", "pruned", 8)


def test_quantizers_are_sorted():
    assert RunConfig(quantizers=[55, 20, 32]).quantizers == [20, 32, 55]


@pytest.mark.parametrize("override", [
    {"quantizers": []},
    {"quantizers": [20, 20]},
    {"quantizers": [300]},
    {"block_size": 12},
    {"rate_model": "exact"},
    {"search_space": "greedy"},
    {"chroma_format": "411"},
    {"jobs": 0},
    {"lambda_const": -1.0},
    {"deadzone": 1.0},
    {"step_scale": 0},
])
def test_run_config_rejects(override):
    with pytest.raises(PydanticValidationError):
        RunConfig(**override)


def test_cfl_mode_configurations():
    assert CflMode.BOTH.configurations() == [False, True]
    assert CflMode("on").configurations() == [True]


def test_quantizer_config_from_index():
    config = QuantizerConfig.from_index(24, BitDepth.EIGHT, step_scale=0.5, lambda_const=0.1)
    assert config.luma_step == pytest.approx(2.0)
    assert config.chroma_step == config.luma_step
    assert config.lambda_ == pytest.approx(0.4)


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("CFL_LAMBDA_CONST", "0.08")
    monkeypatch.setenv("CFL_QUANTIZERS", "[10, 40]")
    monkeypatch.setenv("CFL_JOBS", "3")
    settings = Settings()
    assert settings.lambda_const == pytest.approx(0.08)
    assert settings.quantizers == [10, 40]
    assert settings.jobs == 3


def test_load_toml_config(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('quantizers = [32, 43]\nlambda-const = 0.05\ncfl = "on"\n')
    assert load_config_file(str(path)) == {"quantizers": [32, 43], "lambda_const": 0.05, "cfl": "on"}


def test_load_json_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text('{"block_size": 16, "rate-model": "full"}')
    assert load_config_file(str(path)) == {"block_size": 16, "rate_model": "full"}


@pytest.mark.parametrize("name, body", [
    ("bad.toml", "quantizers = ["),
    ("bad.json", "{not json"),
    ("list.json", "[1, 2]"),
])
def test_bad_config_files(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(body)
    with pytest.raises(ValidationError):
        load_config_file(str(path))


def test_missing_config_file(tmp_path):
    with pytest.raises(ValidationError) as excinfo:
        load_config_file(str(tmp_path / "nope.toml"))
    assert excinfo.value.exit_code == 2
