"""Variant runs: baselines, counterfactual bootstrap, iteration training, transfer and resume."""
from __future__ import annotations

import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

from causalrep.pipelines.agent_training import LOG_FILENAME, AgentTrainer, TrainerState, rep_width_for
from causalrep.pipelines.base_run import BaseRun
from causalrep.pipelines.counterfactual_training import train_counterfactual_phase
from causalrep.pipelines.run_config import (
	ConfigurationError,
	checkpoint_schedule,
	default_run_dir,
	echo_run_config,
	refresh_schedule,
	validate_run_config,
)
from causalrep.schemas import RunConfig
from causalrep.services.checkpoints import CheckpointBundle, load_checkpoint, run_dir_of, save_checkpoint
from causalrep.services.counterfactual import CounterfactualLearner
from causalrep.services.curves import truncate_training_log
from causalrep.services.policies import ScriptedPolicy
from causalrep.services.rep_store import CausalRep, ShapeError, latest_rep_path, load_rep, save_rep, zero_rep
from causalrep.services.sac_agent import AgentPolicy

logger = logging.getLogger(__name__)

# Variants that train the counterfactual model before the agent starts.
BOOTSTRAP_VARIANTS = {"counterfactual_intervene", "causalcf_iter"}


class TransferError(RuntimeError):
	"""Raised when a representation cannot be transferred into a new run."""


@dataclass
class RunResult:
	run_dir: Path
	final_step: int
	rep: Optional[CausalRep]
	refresh_steps: List[int] = field(default_factory=list)
	checkpoint_steps: List[int] = field(default_factory=list)

	@property
	def log_path(self) -> Path:
		return self.run_dir / LOG_FILENAME


class VariantRun(BaseRun):
	"""
	One training run of any variant.

	`intervene` and `no_intervene` never touch the counterfactual model; the bootstrap variants
	train it first with the scripted policy, and `causalcf_iter` refreshes it on schedule with the
	current agent policy.
	"""

	def __init__(self, config: RunConfig, run_dir: Optional[Path] = None, *, rep: Optional[CausalRep] = None):
		validate_run_config(config)
		super().__init__(config, run_dir or default_run_dir(config))
		self.rep = rep
		self.learner: Optional[CounterfactualLearner] = None
		self.trainer: Optional[AgentTrainer] = None
		self.refreshes_done = 0
		self.refresh_steps: List[int] = []
		self.checkpoint_steps: List[int] = []
		self._refresh_at = set(refresh_schedule(config))
		self._checkpoint_at = set(checkpoint_schedule(config))

	def prepare(self) -> None:
		super().prepare()
		echo_run_config(self.config, self.run_dir)

	# --- Phases ---

	def run_counterfactual_phase(self) -> None:
		variant = self.config.variant
		if variant == "causalcf_iter" and self.config.cf_bootstrap == "initialized":
			self.rep = zero_rep(self.config.cf.rep_width, 0)
			save_rep(self.rep, self.run_dir)
			return
		if variant not in BOOTSTRAP_VARIANTS:
			return
		policy = ScriptedPolicy(self.config.task.task_id, noise=self.config.cf.rollout_noise)
		result = train_counterfactual_phase(self.config, policy)
		self.learner, self.rep = result.learner, result.rep
		save_rep(self.rep, self.run_dir)

	def run_agent_phase(self) -> RunResult:
		if self.config.uses_rep != (self.rep is not None):
			raise ConfigurationError(
				f"Variant {self.config.variant} {'needs' if self.config.uses_rep else 'must not use'} a causal representation"
			)
		if self.trainer is None:
			self.trainer = AgentTrainer(self.config, self.run_dir, self.rep)
		if self.trainer.state.env_steps == 0 and 0 in self._refresh_at:
			self._refresh(0)
		self.trainer.train(self.config.total_steps, hook=self._on_step)
		return RunResult(
			run_dir=self.run_dir,
			final_step=self.trainer.state.env_steps,
			rep=self.rep,
			refresh_steps=list(self.refresh_steps),
			checkpoint_steps=list(self.checkpoint_steps),
		)

	# --- Schedule hooks ---

	def _on_step(self, step: int) -> None:
		if step in self._refresh_at:
			self._refresh(step)
		if step in self._checkpoint_at:
			self.save_checkpoint(step)

	def _refresh(self, step: int) -> None:
		"""Continues counterfactual training on data from the current policy and swaps the rep."""
		assert self.trainer is not None
		policy = AgentPolicy(self.trainer.agent, self.rep, self.trainer.rep_width, deterministic=False)
		round_index = self.refreshes_done + (1 if self.config.cf_bootstrap == "scripted" else 0)
		result = train_counterfactual_phase(
			self.config,
			policy,
			learner=self.learner,
			previous_rep=self.rep,
			round_index=round_index,
		)
		self.learner = result.learner
		self.rep = result.rep
		self.trainer.set_rep(self.rep)
		self.refreshes_done += 1
		self.refresh_steps.append(step)
		save_rep(self.rep, self.run_dir)
		logger.info("Refreshed causal representation to v%d at step %d", self.rep.version, step)

	def save_checkpoint(self, step: int) -> Path:
		assert self.trainer is not None
		self.checkpoint_steps.append(step)
		return save_checkpoint(
			self.run_dir,
			CheckpointBundle(
				step=step,
				config=self.config,
				agent=self.trainer.agent,
				buffer=self.trainer.buffer,
				trainer_state=self.trainer.capture_state().to_dict(),
				rep=self.rep,
				learner=self.learner,
				refreshes_done=self.refreshes_done,
			),
		)


def train_run(config: RunConfig, run_dir: Optional[Path] = None) -> RunResult:
	"""Trains any variant except transfer, which needs a source representation."""
	if config.variant == "transfer_rep_intervene":
		raise ConfigurationError("transfer_rep_intervene runs start from transfer_rep()")
	return VariantRun(config, run_dir).run()


def run_iteration_training(config: RunConfig, run_dir: Optional[Path] = None) -> RunResult:
	if config.variant != "causalcf_iter":
		raise ConfigurationError(f"Iteration training needs variant causalcf_iter, got {config.variant}")
	return train_run(config, run_dir)


# =============================================================================
# Transfer
# =============================================================================

class TransferRun(VariantRun):
	"""Fresh agent on the target task with a representation loaded from another run."""

	def run_counterfactual_phase(self) -> None:
		save_rep(self.rep, self.run_dir)


def _resolve_rep_source(source: Path) -> Path:
	if source.is_dir():
		path = latest_rep_path(source)
		if path is None:
			raise TransferError(f"No rep_vK.json found in {source}")
		return path
	if not source.exists():
		raise TransferError(f"Representation file {source} does not exist")
	return source


def transfer_rep(source: str | Path, target_config: RunConfig, run_dir: Optional[Path] = None) -> RunResult:
	"""Trains a new agent with a representation taken from a source run directory or rep file."""
	path = _resolve_rep_source(Path(source))
	width = target_config.cf.rep_width
	try:
		rep = load_rep(path, expected_width=width)
	except (ShapeError, KeyError) as exc:
		raise TransferError(f"Cannot transfer representation from {path}: {exc}") from exc
	config = target_config.model_copy(update={"variant": "transfer_rep_intervene"})
	logger.info("Transferring rep v%d (width=%d) from %s to task %s", rep.version, rep.width, path, config.task.task_id)
	return TransferRun(config, run_dir, rep=rep).run()


# =============================================================================
# Resume
# =============================================================================

def resume_run(checkpoint: str | Path, out_dir: Optional[str | Path] = None) -> RunResult:
	"""Restores a checkpoint bundle and continues training to the configured budget."""
	bundle = load_checkpoint(checkpoint)
	source_dir = run_dir_of(checkpoint)
	target_dir = Path(out_dir) if out_dir else source_dir
	target_dir.mkdir(parents=True, exist_ok=True)
	if target_dir.resolve() != source_dir.resolve():
		for rep_file in source_dir.glob("rep_v*.json"):
			shutil.copy2(rep_file, target_dir / rep_file.name)
	truncate_training_log(source_dir / LOG_FILENAME, target_dir / LOG_FILENAME, bundle.step)

	config = bundle.config
	run = TransferRun(config, target_dir, rep=bundle.rep) if config.variant == "transfer_rep_intervene" else VariantRun(config, target_dir, rep=bundle.rep)
	run.prepare()
	run.learner = bundle.learner
	run.refreshes_done = bundle.refreshes_done
	run.trainer = AgentTrainer(
		config,
		target_dir,
		bundle.rep,
		agent=bundle.agent,
		buffer=bundle.buffer,
		state=TrainerState.from_dict(bundle.trainer_state),
	)
	logger.info("Resuming %s run from step %d into %s", config.variant, bundle.step, target_dir)
	return run.run_agent_phase()


__all__ = [
	"BOOTSTRAP_VARIANTS",
	"RunResult",
	"TransferError",
	"TransferRun",
	"VariantRun",
	"resume_run",
	"rep_width_for",
	"run_iteration_training",
	"train_run",
	"transfer_rep",
]
