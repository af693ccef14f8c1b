"""Observation -> action policies used outside SAC: the scripted bootstrap and a uniform baseline."""
from __future__ import annotations

from typing import Protocol

import numpy as np

from causalrep.world.world import OBS_LAYOUT, position_to_action

APPROACH_CLEARANCE = 0.03
HOVER_HEIGHT = 0.08
ALIGN_TOLERANCE = 0.01


class Policy(Protocol):
	def __call__(self, observation: np.ndarray, seed: int) -> np.ndarray:
		...


def _fields(observation: np.ndarray):
	obs = np.asarray(observation, dtype=np.float64)
	return (
		obs[OBS_LAYOUT["effector_pos"]],
		obs[OBS_LAYOUT["block_pos"]],
		float(obs[OBS_LAYOUT["block_size"]][0]),
		obs[OBS_LAYOUT["goal_pos"]],
		float(obs[OBS_LAYOUT["grip"]][0]),
	)


class ScriptedPolicy:
	"""
	Reach-then-push (pushing) or reach-grip-carry (picking) heuristic with seeded Gaussian noise.

	Stands in for a pretrained agent when generating the first counterfactual dataset.
	"""

	def __init__(self, task_id: str = "pushing", noise: float = 0.0):
		self.task_id = task_id
		self.noise = float(noise)

	def __call__(self, observation: np.ndarray, seed: int) -> np.ndarray:
		if self.task_id == "picking":
			action = self._pick(observation)
		else:
			action = self._push(observation)
		if self.noise > 0.0:
			action = action + np.random.default_rng(seed).normal(0.0, self.noise, size=action.shape)
		return np.clip(action, -1.0, 1.0)

	def _push(self, observation: np.ndarray) -> np.ndarray:
		effector, block, size, goal, _ = _fields(observation)
		half = 0.5 * size
		direction = 1.0 if goal[0] >= block[0] else -1.0
		approach_x = block[0] - direction * (half + APPROACH_CLEARANCE)
		behind = (effector[0] - block[0]) * direction <= -half
		if not behind:
			return position_to_action(approach_x, block[1] + half + HOVER_HEIGHT)
		if abs(effector[1] - block[1]) > ALIGN_TOLERANCE:
			return position_to_action(approach_x, block[1])
		# Stop the effector where the block centre would reach the goal.
		return position_to_action(goal[0] - direction * half, block[1])

	def _pick(self, observation: np.ndarray) -> np.ndarray:
		effector, block, size, goal, grip = _fields(observation)
		half = 0.5 * size
		holding = grip > 0.75 and np.linalg.norm(effector - block) < 0.6 * half
		if holding:
			return position_to_action(goal[0], goal[1], 1.0)
		if abs(effector[0] - block[0]) <= ALIGN_TOLERANCE:
			return position_to_action(block[0], block[1], 1.0)
		return position_to_action(block[0], block[1] + half + HOVER_HEIGHT, -1.0)


class UniformPolicy:
	"""Uniform random actions in [-1, 1]^3, reproducible per seed."""

	def __call__(self, observation: np.ndarray, seed: int) -> np.ndarray:
		return np.random.default_rng(seed).uniform(-1.0, 1.0, size=3)
