import json
import subprocess
import sys

import pytest

from adhocsim.cli import main
from adhocsim.scenario import dumps, loads, paper_default


def test_emit_default_scenario_round_trips(capsys):
    assert main(["emit-default-scenario"]) == 0
    assert loads(capsys.readouterr().out) == paper_default()


def test_emit_to_file_then_validate(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert main(["emit-default-scenario", "--out", str(path)]) == 0
    assert main(["validate", "--scenario", str(path)]) == 0
    assert "12 nodes" in capsys.readouterr().out


def test_run_writes_outputs(tmp_path):
    assert main(["run", "--horizon", "2", "--protocol", "dsr", "--out", str(tmp_path)]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["dsr_deaths.csv", "dsr_energy.csv", "dsr_report.json", "dsr_trace.txt"]
    report = json.loads((tmp_path / "dsr_report.json").read_text())
    assert report["protocol"] == "dsr" and report["horizon"] == 2.0
    assert (tmp_path / "dsr_energy.csv").read_text().startswith("time,node,residual_joules\n")


def test_compare_writes_both_runs_and_summary(tmp_path):
    assert main(["compare", "--horizon", "2", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "comparison.json").read_text())
    assert {"dsr_lifetime", "essdsr_lifetime", "improvement_percent"} <= set(summary)
    assert (tmp_path / "essdsr_trace.txt").exists()
    assert len((tmp_path / "residual_deltas.csv").read_text().splitlines()) == 13


def test_invalid_scenario_exits_2(tmp_path, capsys):
    data = json.loads(dumps(paper_default()))
    data["nodes"][1]["id"] = 0
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert main(["validate", "--scenario", str(path)]) == 2
    assert "duplicate node id 0" in capsys.readouterr().err


def test_missing_file_exits_3(tmp_path):
    assert main(["run", "--scenario", str(tmp_path / "nope.json")]) == 3


def test_unwritable_output_exits_3(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert main(["run", "--horizon", "1", "--out", str(blocker / "sub")]) == 3


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["run", "--seed", "x"], ["compare", "--protocol", "dsr"]])
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as info:
        main(argv)
    assert info.value.code == 1


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "adhocsim", "validate"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("ok: paper-default")
