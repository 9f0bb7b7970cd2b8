import json

import pandas as pd
import pytest

import main
from exceptions import ValidationError
from media.y4m import Y4MHeader, write_y4m
from models.frame import ChromaFormat
from models.schemas import BLOCK_COLUMNS, DC_ERROR_COLUMNS, FIT_COLUMNS, RD_POINT_COLUMNS


@pytest.fixture
def y4m_input(tmp_path, small_frame):
    path = tmp_path / "small.y4m"
    write_y4m(path, Y4MHeader.build(small_frame.width, small_frame.height, ChromaFormat.YUV420), [small_frame])
    return str(path)


def _run(*argv):
    return main.main(list(argv))


def test_eval_writes_points_and_bd_table(tmp_path, y4m_input, capsys):
    out = tmp_path / "out"
    code = _run("eval", "--input", y4m_input, "--quantizers", "32,55", "--jobs", "1", "--out", str(out))
    assert code == 0

    points = pd.read_csv(out / "rd_points.csv")
    assert list(points.columns) == RD_POINT_COLUMNS
    assert len(points) == 4
    assert set(points["config"]) == {"cfl-off", "cfl-on"}
    assert set(points["image"]) == {"small"}

    bd = pd.read_csv(out / "bd_rate.csv")
    assert list(bd.columns) == ["metric", "bd_rate_percent"]
    assert bd["metric"].tolist() == ["PSNR", "PSNR-Cb", "PSNR-Cr", "CIEDE2000"]
    assert "BD-rate (%)" in capsys.readouterr().out


def test_eval_single_configuration_skips_bd_table(tmp_path, y4m_input):
    out = tmp_path / "out"
    assert _run("eval", "--input", y4m_input, "--quantizers", "43", "--cfl", "on",
                "--jobs", "1", "--out", str(out)) == 0
    assert len(pd.read_csv(out / "rd_points.csv")) == 1
    assert not (out / "bd_rate.csv").exists()


@pytest.mark.slow
def test_eval_on_synthetic_corpus(tmp_path):
    out = tmp_path / "out"
    assert _run("eval", "--synthetic", "2", "--jobs", "1", "--out", str(out)) == 0
    points = pd.read_csv(out / "rd_points.csv")
    assert len(points) == 2 * 2 * 4
    assert list(points.columns) == RD_POINT_COLUMNS


def test_dump_blocks(tmp_path, y4m_input, capsys):
    out = tmp_path / "out"
    assert _run("dump-blocks", "--input", y4m_input, "--quantizers", "32", "--out", str(out), "--jobs", "1") == 0
    blocks = pd.read_csv(out / "blocks.csv")
    assert list(blocks.columns) == BLOCK_COLUMNS
    assert len(blocks) == 9
    assert set(blocks["mode"]) <= {"dc", "cfl"}
    summary = json.loads((out / "blocks.json").read_text())
    assert summary["blocks"] == 9
    assert "9 blocks" in capsys.readouterr().out


def test_analyze_dc(tmp_path, y4m_input):
    out = tmp_path / "out"
    assert _run("analyze-dc", "--input", y4m_input, "--out", str(out), "--jobs", "1") == 0
    table = pd.read_csv(out / "dc_error.csv")
    assert list(table.columns) == DC_ERROR_COLUMNS
    assert table["size"].tolist() == [4, 8, 16]


def test_compare_fit(tmp_path, y4m_input):
    out = tmp_path / "out"
    assert _run("compare-fit", "--input", y4m_input, "--out", str(out), "--jobs", "1") == 0
    table = pd.read_csv(out / "fit_comparison.csv")
    assert list(table.columns) == FIT_COLUMNS
    assert table["size"].tolist() == [4, 8]


def test_missing_input_exits_with_input_error(tmp_path):
    assert _run("eval", "--input", str(tmp_path / "missing.y4m"), "--out", str(tmp_path)) == 2


def test_empty_corpus_exits_with_input_error(tmp_path):
    assert _run("eval", "--jobs", "1", "--out", str(tmp_path)) == 2


def test_invalid_flag_values_exit_with_input_error(tmp_path, y4m_input):
    assert _run("eval", "--input", y4m_input, "--block-size", "12", "--out", str(tmp_path)) == 2
    assert _run("eval", "--input", y4m_input, "--quantizers", "20,20", "--out", str(tmp_path)) == 2


def test_argument_errors_exit_two():
    with pytest.raises(SystemExit) as excinfo:
        _run("eval", "--quantizers", "a,b")
    assert excinfo.value.code == 2
    with pytest.raises(SystemExit):
        _run("transcode")


def test_precedence_settings_file_flags(tmp_path, monkeypatch):
    monkeypatch.setattr(main.settings, "lambda_const", 0.09)
    monkeypatch.setattr(main.settings, "block_size", 16)
    config_file = tmp_path / "run.toml"
    config_file.write_text("quantizers = [43]\nblock-size = 4\nseed = 7\n")
    parser = main.build_parser()

    config = main.resolve_config(parser.parse_args(["eval", "--config", str(config_file), "--seed", "9"]))
    assert config.lambda_const == pytest.approx(0.09)  # settings
    assert config.block_size == 4  # config file over settings
    assert config.quantizers == [43]
    assert config.seed == 9  # flag over config file

    config = main.resolve_config(parser.parse_args(["eval", "--quantizers", "20,55"]))
    assert config.quantizers == [20, 55]
    assert config.block_size == 16


def test_resolve_config_reports_every_problem():
    args = main.build_parser().parse_args(["eval", "--block-size", "12", "--rate-model", "full", "--jobs", "0"])
    with pytest.raises(ValidationError) as excinfo:
        main.resolve_config(args)
    locations = {error["loc"] for error in excinfo.value.details["validation_errors"]}
    assert locations == {"block_size", "jobs"}
