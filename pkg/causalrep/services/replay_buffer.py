from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)


class NotReadyError(RuntimeError):
	"""Raised when sampling or learning is requested before enough transitions exist."""


@dataclass(frozen=True)
class ReplayBatch:
	indices: np.ndarray
	observations: np.ndarray
	actions: np.ndarray
	rewards: np.ndarray
	next_observations: np.ndarray
	dones: np.ndarray
	rep_versions: np.ndarray


class ReplayBuffer:
	"""Fixed-capacity FIFO ring of transitions with uniform sampling."""

	def __init__(self, capacity: int, obs_width: int, action_width: int = 3, *, learning_starts: int = 0):
		if capacity <= 0:
			raise ValueError("Replay capacity must be positive")
		self.capacity = int(capacity)
		self.obs_width = int(obs_width)
		self.action_width = int(action_width)
		self.learning_starts = int(learning_starts)
		self.observations = np.zeros((self.capacity, self.obs_width), dtype=np.float64)
		self.actions = np.zeros((self.capacity, self.action_width), dtype=np.float64)
		self.rewards = np.zeros(self.capacity, dtype=np.float64)
		self.next_observations = np.zeros((self.capacity, self.obs_width), dtype=np.float64)
		self.dones = np.zeros(self.capacity, dtype=np.float64)
		self.rep_versions = np.full(self.capacity, -1, dtype=np.int64)
		self.position = 0
		self.size = 0
		self.total_pushed = 0

	def __len__(self) -> int:
		return self.size

	def push(self, obs, action, reward: float, next_obs, done: bool, rep_version: int = -1) -> None:
		slot = self.position
		self.observations[slot] = obs
		self.actions[slot] = action
		self.rewards[slot] = reward
		self.next_observations[slot] = next_obs
		self.dones[slot] = 1.0 if done else 0.0
		self.rep_versions[slot] = rep_version
		self.position = (slot + 1) % self.capacity
		self.size = min(self.size + 1, self.capacity)
		self.total_pushed += 1

	def ready(self, batch_size: int) -> bool:
		return self.size >= batch_size and self.total_pushed >= self.learning_starts

	def sample(self, batch_size: int, seed: int) -> ReplayBatch:
		if batch_size > self.size:
			raise NotReadyError(f"Requested {batch_size} transitions but buffer holds {self.size}")
		if self.total_pushed < self.learning_starts:
			raise NotReadyError(
				f"Sampling starts after {self.learning_starts} steps; only {self.total_pushed} seen"
			)
		indices = np.random.default_rng(seed).integers(0, self.size, size=batch_size)
		return ReplayBatch(
			indices=indices,
			observations=self.observations[indices],
			actions=self.actions[indices],
			rewards=self.rewards[indices],
			next_observations=self.next_observations[indices],
			dones=self.dones[indices],
			rep_versions=self.rep_versions[indices],
		)

	def stored_rep_versions(self) -> np.ndarray:
		"""Rep versions of the stored transitions, oldest first."""
		if self.size < self.capacity:
			return self.rep_versions[: self.size].copy()
		return np.concatenate([self.rep_versions[self.position:], self.rep_versions[: self.position]])

	def save(self, path: str | Path) -> Path:
		target = Path(path)
		target.parent.mkdir(parents=True, exist_ok=True)
		with target.open("wb") as handle:
			np.savez_compressed(
				handle,
				observations=self.observations[: self.size],
				actions=self.actions[: self.size],
				rewards=self.rewards[: self.size],
				next_observations=self.next_observations[: self.size],
				dones=self.dones[: self.size],
				rep_versions=self.rep_versions[: self.size],
				meta=np.array(
					[self.capacity, self.obs_width, self.action_width, self.learning_starts,
					 self.position, self.size, self.total_pushed],
					dtype=np.int64,
				),
			)
		return target

	@classmethod
	def load(cls, path: str | Path) -> "ReplayBuffer":
		with np.load(Path(path)) as archive:
			capacity, obs_width, action_width, learning_starts, position, size, total = (
				int(v) for v in archive["meta"]
			)
			buffer = cls(capacity, obs_width, action_width, learning_starts=learning_starts)
			for name in ("observations", "actions", "rewards", "next_observations", "dones", "rep_versions"):
				getattr(buffer, name)[:size] = archive[name]
		buffer.position = position
		buffer.size = size
		buffer.total_pushed = total
		logger.debug("Loaded replay buffer with %d transitions from %s", size, path)
		return buffer
