import json

import pytest

from main import EXIT_CONFIG, EXIT_GUARD, EXIT_OK, main
from rlsForget.scenarios.catalog import BUILTINS
from rlsForget.scenarios.traceFile import read_trace


def test_list_machine_prints_the_catalog(capsys):
    assert main(["list", "--machine"]) == EXIT_OK
    catalog = json.loads(capsys.readouterr().out)
    assert [entry["name"] for entry in catalog] == list(BUILTINS)


def test_list_human_readable(capsys):
    assert main(["list"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "pe-bounds" in out
    assert "demonstrates:" in out


def test_unknown_scenario_is_a_config_error(capsys, tmp_path):
    assert main(["run", "--scenario", "no-such-scenario", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_invalid_override_is_a_config_error(tmp_path):
    assert main(["run", "--scenario", "scalar-zero-after", "--steps", "0", "--out", str(tmp_path)]) == EXIT_CONFIG


def test_run_writes_the_trace(capsys, tmp_path):
    assert main(["run", "--scenario", "scalar-zero-after", "--steps", "80", "--out", str(tmp_path)]) == EXIT_OK
    path = tmp_path / "scalar-zero-after.csv"
    assert str(path) in capsys.readouterr().out
    header, frame, footer = read_trace(str(path))
    assert header["scenario"]["steps"] == 80
    assert len(frame) == 80
    assert footer == []


def test_guard_trip_exits_with_its_own_code(tmp_path):
    scenario = {
        "name": "unexcited-direction",
        "generator": {"kind": "Constant", "value": 1.0},
        "regressor": {"kind": "input_window", "width": 2},
        "theta_true": [1.0, -0.5],
        "estimator": {"strategy": "uniform", "lambda": 0.5},
        "steps": 200,
        "guard_kappa": 100.0,
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(scenario), encoding="utf-8")

    assert main(["run", "--scenario", str(path), "--out", str(tmp_path)]) == EXIT_GUARD
    _, frame, footer = read_trace(str(tmp_path / "unexcited-direction.csv"))
    assert footer and footer[0].startswith("guard: tripped at k=")
    assert len(frame) < 200
    assert frame["kappaP"].iloc[-1] > 100.0


@pytest.mark.parametrize("argv", [["verify", "--suite", "everything"], ["run"]])
def test_argument_errors(argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2
