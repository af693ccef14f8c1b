"""Episodic SAC training with per-episode goal interventions and a fixed causal representation."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from causalrep.progress import step_progress
from causalrep.schemas import RunConfig
from causalrep.scm.interventions import Intervention, apply_intervention, describe_intervention, sample_space
from causalrep.scm.variables import CausalVariables, default_variables
from causalrep.services.curves import EpisodeRecord, TrainingLog
from causalrep.services.replay_buffer import ReplayBuffer
from causalrep.services.rep_store import CausalRep
from causalrep.services.sac_agent import SACAgent, augment_observation
from causalrep.utils import derive_seed
from causalrep.world.world import OBS_WIDTH, MiniCausalWorld, WorldState

logger = logging.getLogger(__name__)

LOG_FILENAME = "train_log.csv"
NO_REP_VERSION = -1

StepHook = Callable[[int], None]


def rep_width_for(config: RunConfig) -> int:
	return config.cf.rep_width if config.uses_rep else 0


@dataclass
class TrainerState:
	"""Counters and the in-flight episode; everything needed to resume bit-identically."""
	env_steps: int = 0
	episodes: int = 0
	updates: int = 0
	episode_active: bool = False
	episode_step: int = 0
	fs_values: List[float] = field(default_factory=list)
	reward_sum: float = 0.0
	world: Optional[dict] = None

	def to_dict(self) -> dict:
		return asdict(self)

	@classmethod
	def from_dict(cls, raw: dict) -> "TrainerState":
		return cls(**raw)


class AgentTrainer:
	"""
	Owns the SAC agent, its replay buffer and one environment.

	Every random draw is keyed by (seed, counter): exploration actions, policy noise, episode
	interventions and replay sampling.
	"""

	def __init__(
			self,
			config: RunConfig,
			run_dir: Path,
			rep: Optional[CausalRep] = None,
			*,
			agent: Optional[SACAgent] = None,
			buffer: Optional[ReplayBuffer] = None,
			state: Optional[TrainerState] = None,
	):
		self.config = config
		self.run_dir = Path(run_dir)
		self.rep_width = rep_width_for(config)
		self.obs_width = OBS_WIDTH + self.rep_width
		self.agent = agent or SACAgent(self.obs_width, config.sac, derive_seed(config.seed, "agent"))
		self.buffer = buffer or ReplayBuffer(
			config.sac.buffer_size,
			self.obs_width,
			learning_starts=config.sac.learning_starts,
		)
		self.env = MiniCausalWorld(config.task, config.physics)
		self.state = state or TrainerState()
		self.log = TrainingLog(self.run_dir / LOG_FILENAME)
		self.episode_interventions: List[Intervention] = []
		self.losses: List[Dict[str, float]] = []
		self.rep: Optional[CausalRep] = None
		self.set_rep(rep)
		if self.state.episode_active and self.state.world is not None:
			self.env.restore(WorldState.from_dict(self.state.world))

	@property
	def rep_version(self) -> int:
		return NO_REP_VERSION if self.rep is None else self.rep.version

	def set_rep(self, rep: Optional[CausalRep]) -> None:
		# Shape checks happen here so a bad rep fails before any step is taken.
		augment_observation(np.zeros(OBS_WIDTH), rep, self.rep_width)
		self.rep = rep

	def episode_variables(self, episode: int) -> tuple[CausalVariables, Intervention]:
		base = default_variables(self.config.task.task_id)
		if self.config.variant == "no_intervene":
			return base, {}
		intervention = sample_space(
			"A",
			("gp",),
			derive_seed(self.config.seed, "episode", episode),
			task_id=self.config.task.task_id,
		)
		return apply_intervention(base, intervention), intervention

	def _begin_episode(self) -> np.ndarray:
		variables, intervention = self.episode_variables(self.state.episodes)
		self.episode_interventions.append(intervention)
		logger.debug("Episode %d intervention: %s", self.state.episodes, describe_intervention(intervention))
		obs = self.env.reset(variables, seed=derive_seed(self.config.seed, "reset", self.state.episodes))
		self.state.episode_active = True
		self.state.episode_step = 0
		self.state.fs_values = []
		self.state.reward_sum = 0.0
		return obs

	def _choose_action(self, obs_aug: np.ndarray) -> np.ndarray:
		step = self.state.env_steps
		if step < self.config.sac.learning_starts:
			self.env.action_space.seed(derive_seed(self.config.seed, "explore", step))
			return self.env.action_space.sample().astype(np.float64)
		return self.agent.select_action(obs_aug, deterministic=False, rng_seed=derive_seed(self.config.seed, "act", step))

	def _finish_episode(self) -> None:
		record = EpisodeRecord(
			episode=self.state.episodes,
			env_steps=self.state.env_steps,
			frac_success=math.fsum(self.state.fs_values) / len(self.state.fs_values),
			reward=self.state.reward_sum,
			rep_version=self.rep_version,
		)
		self.log.append(record)
		self.state.episodes += 1
		self.state.episode_active = False
		self.state.world = None

	def train(self, until_step: int, hook: Optional[StepHook] = None) -> TrainerState:
		"""Steps the environment until `until_step` total env steps; `hook` runs after every step."""
		obs = self.env.observation() if self.state.episode_active else None
		with step_progress(self.state.env_steps, until_step, f"{self.config.variant} agent") as bar:
			while self.state.env_steps < until_step:
				if not self.state.episode_active:
					obs = self._begin_episode()
				obs_aug = augment_observation(obs, self.rep, self.rep_width)
				action = self._choose_action(obs_aug)
				next_obs, reward, done, info = self.env.step(action)
				next_aug = augment_observation(next_obs, self.rep, self.rep_width)
				self.buffer.push(obs_aug, action, reward, next_aug, done, self.rep_version)
				self.state.env_steps += 1
				self.state.episode_step += 1
				self.state.fs_values.append(float(info["fractional_success"]))
				self.state.reward_sum += float(reward)
				obs = next_obs

				if self.buffer.ready(self.config.sac.batch_size):
					self.losses.append(self.agent.update(self.buffer))
					self.state.updates = self.agent.updates
				if done:
					self._finish_episode()
				bar.update(1)
				if hook is not None:
					hook(self.state.env_steps)
		return self.state

	def capture_state(self) -> TrainerState:
		if self.state.episode_active:
			self.state.world = self.env.snapshot().to_dict()
		return self.state
