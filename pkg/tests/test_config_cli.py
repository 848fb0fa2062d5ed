import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from scalebandits.adversaries import QualitySchedule
from scalebandits.cli import main
from scalebandits.config import ConfigError, describe, parse_config, parse_schedule, preset
from scalebandits.output import AGGREGATE_HEADER, RUNS_HEADER, emit_csv, emit_svg
from scalebandits.policies import POLICY_IDS
from scalebandits.simulator import AggregateCurve, ExperimentConfig, run_experiment_full


def test_presets():
    f1 = preset("fig1")
    assert f1.raw_means == (0.5, 0.8) and f1.runs == 100 and f1.horizon == 10**5
    assert f1.policies == POLICY_IDS
    assert preset("fig2").raw_means == (0.005, 0.001)
    f4 = preset("fig4")
    assert f4.schedule == QualitySchedule.cold_start(25, 1.0)
    assert f4.horizon == 30_000 and f4.policies == ("thompson", "aaeas")
    f3 = preset("fig3", t0=1000)
    assert f3.schedule.t0 == 1000 and f3.horizon == 1000 + 10**5
    with pytest.raises(ConfigError):
        preset("fig9")


def test_describe_tags_sources():
    text = describe("fig4")
    assert "cold_start(25, 1.0)" in text
    assert "[reference]" in text and "[default]" in text


@pytest.mark.parametrize("text,expected", [
    ("constant(0.5)", QualitySchedule.constant(0.5)),
    ("cold_start(25)", QualitySchedule.cold_start(25, 1.0)),
    ("cold_start(10, 0.5)", QualitySchedule.cold_start(10, 0.5)),
    ("targeted_zero(0.99, 1.0)", QualitySchedule.targeted_zero(0.99, 1.0)),
    ("custom([0.1, 0.2])", QualitySchedule.custom([0.1, 0.2])),
])
def test_parse_schedule(text, expected):
    assert parse_schedule(text) == expected


@pytest.mark.parametrize("text", ["constant(2)", "cold_start()", "wobble(1)", "constant"])
def test_parse_schedule_rejects(text):
    with pytest.raises(ConfigError):
        parse_schedule(text)


def _write(tmp_path, body):
    path = tmp_path / "exp.cfg"
    path.write_text(body)
    return path


def test_minimal_preset_config(tmp_path):
    cfg = parse_config(_write(tmp_path, "preset = fig4\n"))
    assert cfg == preset("fig4")


def test_theta_config_matches_preset_core(tmp_path):
    cfg = parse_config(_write(tmp_path, "# fig1 by hand\ntheta = [0.5, 0.8]\n"
                                        "schedule = constant(1.0)\nruns = 100\n"
                                        "horizon = 100000\n"))
    ref = preset("fig1")
    for field in ("raw_means", "schedule", "runs", "horizon", "policies"):
        assert getattr(cfg, field) == getattr(ref, field)


def test_config_overrides_and_preset_order(tmp_path):
    cfg = parse_config(_write(tmp_path, "runs = 3\naaeas.delta = 0.01\npreset = fig1\n"))
    assert cfg.runs == 3
    assert cfg.overrides == {"aaeas": {"delta": 0.01}}


@pytest.mark.parametrize("body,line,needle", [
    ("theta = [1.5]\n", 1, "[0, 1]"),
    ("theta = [0.5]\nhorizn = 10\n", 2, "unknown key"),
    ("preset = fig1\n\nruns = 2\nruns = 3\n", 4, "duplicate"),
    ("theta = [0.5, 0.8]\nschedule = sometimes(1)\n", 2, "unknown schedule"),
    ("theta = [0.5]\nucb.delta = 0.1\n", None, "no parameter"),
    ("runs = 4\n", None, "required"),
])
def test_config_errors(tmp_path, body, line, needle):
    path = _write(tmp_path, body)
    with pytest.raises(ConfigError) as err:
        parse_config(path)
    msg = str(err.value)
    assert needle in msg
    if line is not None:
        assert f"{path}:{line}:" in msg


def _tiny_result(runs=3):
    cfg = ExperimentConfig((0.5, 0.8), QualitySchedule.cold_start(25), ("thompson", "aaeas"),
                           horizon=350, runs=runs, master_seed=7, name="tiny")
    return run_experiment_full(cfg)


def test_csv_layout_and_determinism(tmp_path):
    runs_csv, agg_csv = emit_csv(_tiny_result(), tmp_path / "a")
    lines = runs_csv.read_text().splitlines()
    assert lines[0].startswith("# scalebandits") and "master_seed=7" in lines[0]
    assert lines[1] == RUNS_HEADER
    # 2 policies x 3 runs x checkpoints {100, 200, 300, 350}
    assert len(lines) == 2 + 2 * 3 * 4
    agg = agg_csv.read_text().splitlines()
    assert agg[1] == AGGREGATE_HEADER and len(agg) == 2 + 2 * 4

    again_runs, again_agg = emit_csv(_tiny_result(), tmp_path / "b")
    assert again_runs.read_bytes() == runs_csv.read_bytes()
    assert again_agg.read_bytes() == agg_csv.read_bytes()


def test_single_run_csv_has_zero_stderr(tmp_path):
    _, agg_csv = emit_csv(_tiny_result(runs=1), tmp_path)
    for row in agg_csv.read_text().splitlines()[2:]:
        assert row.split(",")[4] == "0.0"


def test_svg_small_and_wellformed(tmp_path):
    curve = AggregateCurve("ucb", np.array([1, 2]), np.array([0.0, 1.0]), np.zeros(2), 1)
    path = emit_svg([curve], tmp_path / "one.svg")
    root = ET.parse(path).getroot()
    lines = root.findall("{http://www.w3.org/2000/svg}polyline")
    assert len(lines) == 1
    assert len(lines[0].get("points").split()) == 2
    first = path.read_bytes()
    emit_svg([curve], path)
    assert path.read_bytes() == first


def test_svg_log_axis(tmp_path):
    result = _tiny_result()
    path = emit_svg(result.curves, tmp_path / "log.svg", log_x=True, title="a < b & c")
    root = ET.parse(path).getroot()
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) == 2


def test_cli_run_twice_identical(tmp_path, capsys):
    outs = []
    for sub in ("x", "y"):
        code = main(["run", "--preset", "fig4", "--seed", "7", "--runs", "4", "--horizon", "2000",
                     "--out", str(tmp_path / sub)])
        assert code == 0
        outs.append(tmp_path / sub)
    printed = capsys.readouterr().out
    assert "thompson" in printed and "aaeas" in printed
    for name in ("fig4_runs.csv", "fig4_aggregate.csv", "fig4.svg"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()


def test_cli_config_file(tmp_path, capsys):
    cfg = _write(tmp_path, f"theta = [0.2, 0.4, 0.3]\npolicies = [ucb, broad]\nhorizon = 500\n"
                           f"runs = 2\nname = three\nout = {tmp_path / 'res'}\n")
    assert main(["run", "--config", str(cfg)]) == 0
    assert (tmp_path / "res" / "three_aggregate.csv").exists()


def test_cli_errors(tmp_path, capsys):
    assert main(["run", "--preset", "fig1", "--t0", "5", "--out", str(tmp_path)]) == 2
    assert "error:" in capsys.readouterr().err
    bad = _write(tmp_path, "theta = [0.5, 2]\n")
    assert main(["run", "--config", str(bad)]) == 2
    assert ":1:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["run", "--preset", "fig1", "--policies", "greedy"])


def test_cli_describe(capsys):
    assert main(["describe", "--preset", "fig2"]) == 0
    assert "0.005" in capsys.readouterr().out


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "scalebandits", "describe", "--preset", "fig1"],
                         capture_output=True, text=True, check=True)
    assert "fig1" in out.stdout
