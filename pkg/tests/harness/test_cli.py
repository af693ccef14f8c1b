import json

import pytest

from causalrep import manage_runs
from causalrep.pipelines.run_config import load_run_config
from causalrep.utils import write_json


@pytest.fixture(autouse=True)
def _no_global_torch_settings(monkeypatch):
	monkeypatch.setattr(manage_runs, "configure_torch", lambda: None)


def test_missing_command_prints_help():
	assert manage_runs.main([]) == 1


def test_usage_errors_exit_two():
	with pytest.raises(SystemExit) as excinfo:
		manage_runs.main(["train", "--task", "mars"])
	assert excinfo.value.code == 2


def test_failures_print_one_parseable_line(tmp_path, capsys):
	assert manage_runs.main(["eval", "--checkpoint", str(tmp_path / "missing")]) == 1
	lines = capsys.readouterr().err.strip().splitlines()
	assert len(lines) == 1
	prefix, _, message = lines[0].partition(" message=")
	assert prefix == "error=FileNotFoundError"
	assert "missing" in json.loads(message)


def test_bad_protocol_selection_is_reported(tmp_path, capsys):
	checkpoint = tmp_path / "run" / "checkpoints" / "step_600"
	assert manage_runs.main(["eval", "--checkpoint", str(checkpoint), "--protocols", "P13"]) == 1
	assert capsys.readouterr().err.strip().splitlines()[-1].startswith("error=UnknownProtocolError ")


def test_train_eval_report_flow(tmp_path):
	run_dir = tmp_path / "run"
	assert manage_runs.main(["train", "--config", "smoke", "--variant", "intervene", "--seed", "2", "--out", str(run_dir)]) == 0
	assert (run_dir / "train_log.csv").exists()
	assert json.loads((run_dir / "config.json").read_text())["seed"] == 2

	checkpoint = run_dir / "checkpoints" / "step_600"
	assert manage_runs.main(["eval", "--checkpoint", str(checkpoint), "--protocols", "P0,P5", "--episodes", "1"]) == 0
	report = json.loads((run_dir / "report.json").read_text())
	assert [row["id"] for row in report["protocols"]] == ["P0", "P5"]
	assert report["run"]["checkpoint_step"] == 600

	out_dir = tmp_path / "summary"
	assert manage_runs.main(["report", "--runs", str(run_dir), "--out", str(out_dir)]) == 0
	summary = json.loads((out_dir / "summary.json").read_text())
	assert list(summary["runs"]) == ["run"]
	assert summary["variants"]["pushing/intervene"]["runs"] == ["run"]
	assert summary["variants"]["pushing/intervene"]["seeds"] == [2]
	assert summary["trend_checks"]["causalcf_iter_scores_at_least_intervene"] is None
	assert (out_dir / "training_curves.png").exists()
	assert (out_dir / "protocol_scores.png").exists()


def test_malformed_checkpoint_is_reported(tmp_path, capsys):
	checkpoint = tmp_path / "run" / "checkpoints" / "step_600"
	checkpoint.mkdir(parents=True)
	write_json(checkpoint / "config.json", load_run_config("smoke").model_dump(mode="json"))
	write_json(checkpoint / "trainer.json", {"refreshes_done": 0, "trainer": {}})
	assert manage_runs.main(["eval", "--checkpoint", str(checkpoint)]) == 1
	lines = capsys.readouterr().err.strip().splitlines()
	assert len(lines) == 1
	prefix, _, message = lines[0].partition(" message=")
	assert prefix == "error=CorruptCheckpointError"
	assert "step" in json.loads(message)
