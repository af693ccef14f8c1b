"""checkpoints/step_N/ bundles: agent, replay buffer, counterfactual model, rep and counters."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from causalrep.schemas import RunConfig
from causalrep.services.counterfactual import CounterfactualLearner, load_cf_model, save_cf_model
from causalrep.services.replay_buffer import ReplayBuffer
from causalrep.services.rep_store import CausalRep, load_rep
from causalrep.services.sac_agent import SACAgent, load_agent, save_agent
from causalrep.utils import read_json, write_json

logger = logging.getLogger(__name__)

CHECKPOINTS_DIR = "checkpoints"
BUFFER_FILE = "buffer.npz"
REP_FILE = "rep.json"
STATE_FILE = "trainer.json"
CONFIG_FILE = "config.json"
CF_MODEL_DIR = "cf_model"


class CorruptCheckpointError(ValueError):
	pass


@dataclass
class CheckpointBundle:
	step: int
	config: RunConfig
	agent: SACAgent
	buffer: ReplayBuffer
	trainer_state: dict
	rep: Optional[CausalRep] = None
	learner: Optional[CounterfactualLearner] = None
	refreshes_done: int = 0


def checkpoint_dir(run_dir: str | Path, step: int) -> Path:
	return Path(run_dir) / CHECKPOINTS_DIR / f"step_{step}"


def save_checkpoint(run_dir: str | Path, bundle: CheckpointBundle) -> Path:
	target = checkpoint_dir(run_dir, bundle.step)
	target.mkdir(parents=True, exist_ok=True)
	save_agent(
		bundle.agent,
		target,
		extra={"step": bundle.step, "rep_version": None if bundle.rep is None else bundle.rep.version},
	)
	bundle.buffer.save(target / BUFFER_FILE)
	if bundle.rep is not None:
		write_json(target / REP_FILE, bundle.rep.to_dict())
	if bundle.learner is not None:
		save_cf_model(bundle.learner, target / CF_MODEL_DIR)
	write_json(
		target / STATE_FILE,
		{"step": bundle.step, "refreshes_done": bundle.refreshes_done, "trainer": bundle.trainer_state},
	)
	write_json(target / CONFIG_FILE, bundle.config.model_dump(mode="json"))
	logger.info("Saved checkpoint at step %d to %s", bundle.step, target)
	return target


def load_checkpoint(path: str | Path) -> CheckpointBundle:
	source = Path(path)
	if not (source / STATE_FILE).exists():
		raise FileNotFoundError(f"No checkpoint found at {source}")
	try:
		return _read_bundle(source)
	except (KeyError, TypeError) as exc:
		# Missing or mistyped manifest fields.
		raise CorruptCheckpointError(f"Malformed checkpoint at {source}: missing or invalid field {exc}") from exc


def _read_bundle(source: Path) -> CheckpointBundle:
	config = RunConfig.model_validate(read_json(source / CONFIG_FILE))
	state = read_json(source / STATE_FILE)
	rep = load_rep(source / REP_FILE) if (source / REP_FILE).exists() else None
	learner = load_cf_model(source / CF_MODEL_DIR, config.cf) if (source / CF_MODEL_DIR).exists() else None
	return CheckpointBundle(
		step=int(state["step"]),
		config=config,
		agent=load_agent(source),
		buffer=ReplayBuffer.load(source / BUFFER_FILE),
		trainer_state=state["trainer"],
		rep=rep,
		learner=learner,
		refreshes_done=int(state["refreshes_done"]),
	)


def run_dir_of(checkpoint: str | Path) -> Path:
	"""<run_dir>/checkpoints/step_N -> <run_dir>."""
	return Path(checkpoint).resolve().parent.parent
