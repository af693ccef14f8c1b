from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from pathlib import Path

from causalrep.schemas import RunConfig


class BaseRun(ABC):
	"""Shared structure for training runs: a counterfactual phase followed by agent training."""

	def __init__(self, config: RunConfig, run_dir: Path):
		self.config = config
		self.run_dir = Path(run_dir)
		self.logger = logging.getLogger(self.__class__.__name__)

	def run(self):
		self.logger.info(
			"Starting %s run on %s (seed=%d) in %s",
			self.config.variant,
			self.config.task.task_id,
			self.config.seed,
			self.run_dir,
		)
		self.prepare()
		self.run_counterfactual_phase()
		result = self.run_agent_phase()
		self.logger.info("Completed %s run in %s", self.config.variant, self.run_dir)
		return result

	def prepare(self) -> None:
		self.run_dir.mkdir(parents=True, exist_ok=True)

	@abstractmethod
	def run_counterfactual_phase(self) -> None:  # pragma: no cover - interface
		"""Produce the causal representation the agent starts with (if the variant uses one)."""

	@abstractmethod
	def run_agent_phase(self):  # pragma: no cover - interface
		"""Train the agent to the configured step budget and return the run result."""
