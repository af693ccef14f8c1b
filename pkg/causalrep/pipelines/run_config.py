"""Run-config loading, validation and the refresh/checkpoint schedules."""
from __future__ import annotations

from pathlib import Path
from typing import List

from pydantic import ValidationError

from causalrep.config import get_settings
from causalrep.schemas import RunConfig
from causalrep.scm.tables import get_scm_tables, tables_to_dict
from causalrep.utils import read_json, write_json

CONFIGS_DIR = Path(__file__).resolve().parent.parent.parent / "configs"
PRESETS = ("desk", "full", "smoke")
SCM_ECHO_KEY = "scm_tables"


class ConfigurationError(ValueError):
	"""Raised when a run config violates a schedule or variant invariant."""


def validate_run_config(config: RunConfig) -> RunConfig:
	if config.iter_start >= config.total_steps:
		raise ConfigurationError(
			f"iter_start ({config.iter_start}) must be below total_steps ({config.total_steps})"
		)
	if config.cf.horizon > config.task.episode_length:
		raise ConfigurationError(
			f"Counterfactual horizon {config.cf.horizon} exceeds episode length {config.task.episode_length}"
		)
	return config


def load_run_config(source: str | Path) -> RunConfig:
	"""Loads a preset name (desk, full, smoke) or a JSON run-config path."""
	path = CONFIGS_DIR / f"{source}.json" if str(source) in PRESETS else Path(source)
	raw = read_json(path)
	raw.pop(SCM_ECHO_KEY, None)
	try:
		config = RunConfig.model_validate(raw)
	except ValidationError as exc:
		raise ConfigurationError(f"Invalid run config {path}: {exc}") from exc
	return validate_run_config(config)


def echo_run_config(config: RunConfig, run_dir: str | Path) -> Path:
	"""Writes config.json with the SCM interval and protocol tables alongside the run settings."""
	payload = config.model_dump(mode="json")
	payload[SCM_ECHO_KEY] = tables_to_dict(get_scm_tables())
	return write_json(Path(run_dir) / "config.json", payload)


def default_run_dir(config: RunConfig) -> Path:
	if config.output_dir:
		return Path(config.output_dir)
	name = f"{config.task.task_id}_{config.variant}_seed{config.seed}"
	return Path(get_settings().RUNS_ROOT) / name


def refresh_schedule(config: RunConfig) -> List[int]:
	"""Env steps at which the counterfactual model is refreshed (iteration variant only)."""
	validate_run_config(config)
	if config.variant != "causalcf_iter":
		return []
	return list(range(config.iter_start, config.total_steps, config.iter_every))


def checkpoint_schedule(config: RunConfig) -> List[int]:
	return list(range(config.checkpoint_every, config.total_steps + 1, config.checkpoint_every))
