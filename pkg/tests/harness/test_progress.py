import pytest

from causalrep import progress


@pytest.mark.parametrize("raw, expected", [("0", False), ("off", False), ("No", False), ("1", True), ("", True)])
def test_env_toggle(monkeypatch, raw, expected):
	monkeypatch.setattr(progress, "_enabled", None)
	monkeypatch.setenv("CAUSALREP_PROGRESS", raw)
	assert progress.progress_enabled() is expected


def test_step_progress_starts_at_resumed_step():
	with progress.step_progress(200, 600, "resume") as bar:
		assert bar.n == 200
		assert bar.total == 600
