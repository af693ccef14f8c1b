"""Soft actor-critic learner on observations augmented with the causal representation."""
from __future__ import annotations

import copy
import logging
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np
import torch
import torch.nn as nn
import torch.nn.functional as F

from causalrep.models.sac import Actor, Critic
from causalrep.schemas import SACConfig
from causalrep.services.replay_buffer import NotReadyError, ReplayBuffer
from causalrep.services.rep_store import CausalRep, InvalidRepresentationError, ShapeError
from causalrep.utils import derive_seed, make_torch_generator, read_json, write_json
from causalrep.world.world import ACTION_WIDTH, OBS_WIDTH

logger = logging.getLogger(__name__)

AGENT_ARCHIVE = "agent.pt"
AGENT_MANIFEST = "agent.json"

RepLike = Union[CausalRep, np.ndarray, None]


def augment_observation(obs: np.ndarray, rep: RepLike, rep_width: int) -> np.ndarray:
	"""[obs | rep]; a missing rep is only valid for a zero-width configuration."""
	obs = np.asarray(obs, dtype=np.float64)
	if obs.shape != (OBS_WIDTH,):
		raise ShapeError(f"Observation must have width {OBS_WIDTH}, got {obs.shape}")
	if rep is None:
		if rep_width != 0:
			raise ShapeError(f"Run expects a width-{rep_width} representation but none is loaded")
		return obs.copy()
	values = rep.values if isinstance(rep, CausalRep) else np.asarray(rep, dtype=np.float64).reshape(-1)
	if not np.all(np.isfinite(values)):
		raise InvalidRepresentationError("Causal representation contains non-finite values")
	if values.shape[0] != rep_width:
		raise ShapeError(f"Representation width {values.shape[0]} does not match configured width {rep_width}")
	return np.concatenate([obs, values])


def critic_target(
		reward: torch.Tensor,
		done: torch.Tensor,
		next_q1: torch.Tensor,
		next_q2: torch.Tensor,
		next_log_prob: torch.Tensor,
		gamma: float,
		alpha: float,
) -> torch.Tensor:
	"""y = r + gamma * (1 - done) * (min(Q1', Q2') - alpha * log pi)."""
	soft_value = torch.minimum(next_q1, next_q2) - alpha * next_log_prob
	return reward + gamma * (1.0 - done) * soft_value


def polyak_update(online: nn.Module, target: nn.Module, tau: float) -> None:
	"""target <- tau * online + (1 - tau) * target, in place."""
	with torch.no_grad():
		for target_param, online_param in zip(target.parameters(), online.parameters()):
			target_param.mul_(1.0 - tau).add_(online_param, alpha=tau)


class SACAgent:
	"""
	Squashed-Gaussian actor, twin critics and their polyak-averaged targets.

	Entropy uses the fixed coefficient from the config; no temperature is learned.
	All sampling noise is drawn from generators keyed by (seed, update counter).
	"""

	def __init__(
			self,
			obs_width: int,
			config: SACConfig,
			seed: int = 0,
			*,
			action_width: int = ACTION_WIDTH,
			dtype: torch.dtype = torch.float32,
	):
		self.obs_width = int(obs_width)
		self.action_width = int(action_width)
		self.config = config
		self.seed = int(seed)
		self.dtype = dtype
		self.updates = 0

		hidden = tuple(config.hidden_sizes)
		with torch.random.fork_rng(devices=[]):
			torch.manual_seed(derive_seed(seed, "sac_init"))
			self.actor = Actor(self.obs_width, self.action_width, hidden).to(dtype)
			self.critic1 = Critic(self.obs_width, self.action_width, hidden).to(dtype)
			self.critic2 = Critic(self.obs_width, self.action_width, hidden).to(dtype)
		self.target1 = copy.deepcopy(self.critic1)
		self.target2 = copy.deepcopy(self.critic2)
		for module in (self.target1, self.target2):
			module.requires_grad_(False)

		self.actor_optimizer = torch.optim.Adam(self.actor.parameters(), lr=config.learning_rate)
		self.critic_optimizer = torch.optim.Adam(
			list(self.critic1.parameters()) + list(self.critic2.parameters()),
			lr=config.learning_rate,
		)

	@property
	def alpha(self) -> float:
		return float(self.config.ent_coef)

	def _tensor(self, array: np.ndarray) -> torch.Tensor:
		return torch.as_tensor(np.ascontiguousarray(array), dtype=self.dtype)

	def select_action(self, obs_aug: np.ndarray, deterministic: bool = False, rng_seed: int = 0) -> np.ndarray:
		obs_aug = np.asarray(obs_aug, dtype=np.float64)
		if obs_aug.shape != (self.obs_width,):
			raise ShapeError(f"Agent expects observations of width {self.obs_width}, got {obs_aug.shape}")
		with torch.no_grad():
			obs = self._tensor(obs_aug[None])
			if deterministic:
				action = self.actor.deterministic(obs)
			else:
				generator = torch.Generator().manual_seed(int(rng_seed))
				action, _ = self.actor.sample(obs, generator)
		return np.clip(action[0].cpu().numpy().astype(np.float64), -1.0, 1.0)

	def update(self, buffer: ReplayBuffer) -> Dict[str, float]:
		"""One gradient step on both critics and the actor, then a polyak target step."""
		if not buffer.ready(self.config.batch_size):
			raise NotReadyError(
				f"Update needs {self.config.batch_size} stored transitions and "
				f"{self.config.learning_starts} total steps"
			)
		batch = buffer.sample(self.config.batch_size, seed=derive_seed(self.seed, "batch", self.updates))
		generator = make_torch_generator(self.seed, "update", self.updates)
		obs = self._tensor(batch.observations)
		actions = self._tensor(batch.actions)
		rewards = self._tensor(batch.rewards).unsqueeze(-1)
		next_obs = self._tensor(batch.next_observations)
		dones = self._tensor(batch.dones).unsqueeze(-1)

		with torch.no_grad():
			next_actions, next_log_prob = self.actor.sample(next_obs, generator)
			target = critic_target(
				rewards,
				dones,
				self.target1(next_obs, next_actions),
				self.target2(next_obs, next_actions),
				next_log_prob,
				self.config.gamma,
				self.alpha,
			)
		critic_loss = F.mse_loss(self.critic1(obs, actions), target) + F.mse_loss(self.critic2(obs, actions), target)
		self.critic_optimizer.zero_grad(set_to_none=True)
		critic_loss.backward()
		self.critic_optimizer.step()

		sampled, log_prob = self.actor.sample(obs, generator)
		q_value = torch.minimum(self.critic1(obs, sampled), self.critic2(obs, sampled))
		actor_loss = (self.alpha * log_prob - q_value).mean()
		self.actor_optimizer.zero_grad(set_to_none=True)
		actor_loss.backward()
		self.actor_optimizer.step()

		polyak_update(self.critic1, self.target1, self.config.tau)
		polyak_update(self.critic2, self.target2, self.config.tau)
		self.updates += 1
		return {"critic": float(critic_loss.detach()), "actor": float(actor_loss.detach())}

	def state_dict(self) -> Dict[str, dict]:
		return {
			"actor": self.actor.state_dict(),
			"critic1": self.critic1.state_dict(),
			"critic2": self.critic2.state_dict(),
			"target1": self.target1.state_dict(),
			"target2": self.target2.state_dict(),
			"actor_optimizer": self.actor_optimizer.state_dict(),
			"critic_optimizer": self.critic_optimizer.state_dict(),
		}

	def load_state_dict(self, state: Dict[str, dict]) -> None:
		self.actor.load_state_dict(state["actor"])
		self.critic1.load_state_dict(state["critic1"])
		self.critic2.load_state_dict(state["critic2"])
		self.target1.load_state_dict(state["target1"])
		self.target2.load_state_dict(state["target2"])
		self.actor_optimizer.load_state_dict(state["actor_optimizer"])
		self.critic_optimizer.load_state_dict(state["critic_optimizer"])


class AgentPolicy:
	"""Adapts an agent and a fixed representation to the observation -> action policy interface."""

	def __init__(self, agent: SACAgent, rep: Optional[CausalRep], rep_width: int, *, deterministic: bool = True):
		self.agent = agent
		self.rep = rep
		self.rep_width = rep_width
		self.deterministic = deterministic

	def __call__(self, observation: np.ndarray, seed: int) -> np.ndarray:
		obs_aug = augment_observation(observation, self.rep, self.rep_width)
		return self.agent.select_action(obs_aug, deterministic=self.deterministic, rng_seed=seed)


def save_agent(agent: SACAgent, directory: str | Path, *, extra: Optional[dict] = None) -> Path:
	target = Path(directory)
	target.mkdir(parents=True, exist_ok=True)
	torch.save(agent.state_dict(), target / AGENT_ARCHIVE)
	manifest = {
		"obs_width": agent.obs_width,
		"action_width": agent.action_width,
		"seed": agent.seed,
		"updates": agent.updates,
		"sac": agent.config.model_dump(mode="json"),
		"format_version": 1,
	}
	manifest.update(extra or {})
	write_json(target / AGENT_MANIFEST, manifest)
	return target


def load_agent(directory: str | Path) -> SACAgent:
	source = Path(directory)
	manifest = read_json(source / AGENT_MANIFEST)
	config = SACConfig.model_validate(manifest["sac"])
	agent = SACAgent(int(manifest["obs_width"]), config, int(manifest["seed"]), action_width=int(manifest["action_width"]))
	agent.load_state_dict(torch.load(source / AGENT_ARCHIVE, map_location="cpu", weights_only=True))
	agent.updates = int(manifest["updates"])
	logger.info("Loaded agent (%d updates, obs width %d) from %s", agent.updates, agent.obs_width, source)
	return agent
