"""train_log.csv persistence and training-curve smoothing."""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

from causalrep.schemas import TrainingCurve

logger = logging.getLogger(__name__)

LOG_COLUMNS = ["episode", "env_steps", "frac_success", "reward", "rep_version"]
SMOOTHING_WINDOW = 100


@dataclass(frozen=True)
class EpisodeRecord:
	episode: int
	env_steps: int
	frac_success: float
	reward: float
	rep_version: int

	def as_row(self) -> dict:
		return {
			"episode": self.episode,
			"env_steps": self.env_steps,
			"frac_success": repr(float(self.frac_success)),
			"reward": repr(float(self.reward)),
			"rep_version": self.rep_version,
		}


class TrainingLog:
	"""Append-only episode log; each row is flushed when the episode ends."""

	def __init__(self, path: str | Path):
		self.path = Path(path)
		self.path.parent.mkdir(parents=True, exist_ok=True)
		if not self.path.exists():
			with self.path.open("w", newline="", encoding="utf-8") as handle:
				csv.DictWriter(handle, fieldnames=LOG_COLUMNS).writeheader()

	def append(self, record: EpisodeRecord) -> None:
		with self.path.open("a", newline="", encoding="utf-8") as handle:
			csv.DictWriter(handle, fieldnames=LOG_COLUMNS).writerow(record.as_row())


def read_training_log(path: str | Path) -> List[EpisodeRecord]:
	source = Path(path)
	if not source.exists():
		raise FileNotFoundError(f"Training log not found at {source}")
	with source.open("r", newline="", encoding="utf-8") as handle:
		return [
			EpisodeRecord(
				episode=int(row["episode"]),
				env_steps=int(row["env_steps"]),
				frac_success=float(row["frac_success"]),
				reward=float(row["reward"]),
				rep_version=int(row["rep_version"]),
			)
			for row in csv.DictReader(handle)
		]


def truncate_training_log(source: str | Path, target: str | Path, max_env_steps: int) -> int:
	"""Copies rows finished at or before `max_env_steps` into `target`; returns the kept count."""
	kept = [record for record in read_training_log(source) if record.env_steps <= max_env_steps]
	target_path = Path(target)
	target_path.parent.mkdir(parents=True, exist_ok=True)
	with target_path.open("w", newline="", encoding="utf-8") as handle:
		writer = csv.DictWriter(handle, fieldnames=LOG_COLUMNS)
		writer.writeheader()
		writer.writerows(record.as_row() for record in kept)
	logger.info("Kept %d log rows up to step %d in %s", len(kept), max_env_steps, target_path)
	return len(kept)


def smooth_curve(records: Sequence[EpisodeRecord], window: int = SMOOTHING_WINDOW) -> TrainingCurve:
	"""Non-overlapping window means; a trailing incomplete window is reported as `partial`."""
	per_episode = [record.frac_success for record in records]
	env_steps = [record.env_steps for record in records]
	full = len(per_episode) // window
	smoothed = [math.fsum(per_episode[i * window:(i + 1) * window]) / window for i in range(full)]
	smoothed_steps = [env_steps[(i + 1) * window - 1] for i in range(full)]
	remainder = per_episode[full * window:]
	partial = math.fsum(remainder) / len(remainder) if remainder else None
	return TrainingCurve(
		window=window,
		per_episode=per_episode,
		env_steps=env_steps,
		smoothed=smoothed,
		smoothed_steps=smoothed_steps,
		partial=partial,
	)
