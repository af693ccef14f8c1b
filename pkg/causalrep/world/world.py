"""MiniCausalWorld: deterministic 2D block manipulation with pushing and picking tasks."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
from gymnasium import spaces

from causalrep.schemas import PhysicsParams, TaskSpec
from causalrep.scm.variables import (
	WORKSPACE_X,
	WORKSPACE_Z,
	CausalVariables,
	InvalidVariablesError,
	validate_variables,
)
from causalrep.world.geometry import fractional_success

logger = logging.getLogger(__name__)

OBS_WIDTH = 11
ACTION_WIDTH = 3
OBS_LAYOUT: Dict[str, slice] = {
	"time_left": slice(0, 1),
	"effector_pos": slice(1, 3),
	"effector_vel": slice(3, 5),
	"grip": slice(5, 6),
	"block_pos": slice(6, 8),
	"block_size": slice(8, 9),
	"goal_pos": slice(9, 11),
}
HOME_POSITION: Tuple[float, float] = (0.0, 0.30)
GRIP_THRESHOLD = 0.5
STATIC_VELOCITY = 1e-6
FLOOR_TOLERANCE = 1e-9


class InvalidActionError(ValueError):
	"""Raised when an action has the wrong width, non-finite or out-of-range components."""


class EpisodeFinishedError(RuntimeError):
	"""Raised when stepping an environment whose episode already ended."""


class IncompatibleStateError(ValueError):
	"""Raised when restoring a snapshot taken from a different task."""


@dataclass
class WorldState:
	task_id: str
	variables: CausalVariables
	seed: int = 0
	time_step: int = 0
	effector_pos: np.ndarray = field(default_factory=lambda: np.array(HOME_POSITION, dtype=np.float64))
	effector_vel: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.float64))
	grip: float = 0.0
	block_pos: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.float64))
	block_vel: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=np.float64))
	attached: bool = False

	def copy(self) -> "WorldState":
		return WorldState(
			task_id=self.task_id,
			variables=self.variables,
			seed=self.seed,
			time_step=self.time_step,
			effector_pos=self.effector_pos.copy(),
			effector_vel=self.effector_vel.copy(),
			grip=self.grip,
			block_pos=self.block_pos.copy(),
			block_vel=self.block_vel.copy(),
			attached=self.attached,
		)

	def to_dict(self) -> Dict[str, Any]:
		return {
			"task_id": self.task_id,
			"variables": self.variables.as_dict(),
			"seed": self.seed,
			"time_step": self.time_step,
			"effector_pos": self.effector_pos.tolist(),
			"effector_vel": self.effector_vel.tolist(),
			"grip": self.grip,
			"block_pos": self.block_pos.tolist(),
			"block_vel": self.block_vel.tolist(),
			"attached": self.attached,
		}

	@classmethod
	def from_dict(cls, raw: Dict[str, Any]) -> "WorldState":
		return cls(
			task_id=raw["task_id"],
			variables=CausalVariables.from_dict(raw["variables"]),
			seed=int(raw["seed"]),
			time_step=int(raw["time_step"]),
			effector_pos=np.asarray(raw["effector_pos"], dtype=np.float64),
			effector_vel=np.asarray(raw["effector_vel"], dtype=np.float64),
			grip=float(raw["grip"]),
			block_pos=np.asarray(raw["block_pos"], dtype=np.float64),
			block_vel=np.asarray(raw["block_vel"], dtype=np.float64),
			attached=bool(raw["attached"]),
		)


def action_to_command(action: np.ndarray) -> Tuple[np.ndarray, float, float]:
	"""Scales a [-1, 1]^3 action into (target position, grip level, raw grip command)."""
	target = np.array([action[0] * WORKSPACE_X[1], (action[1] + 1.0) * 0.5 * WORKSPACE_Z[1]], dtype=np.float64)
	grip = 0.5 * (float(action[2]) + 1.0)
	return target, grip, float(action[2])


def position_to_action(x: float, z: float, grip_cmd: float = -1.0) -> np.ndarray:
	"""Inverse of the position part of action_to_command (clipped to the action box)."""
	action = np.array([x / WORKSPACE_X[1], 2.0 * z / WORKSPACE_Z[1] - 1.0, grip_cmd], dtype=np.float64)
	return np.clip(action, -1.0, 1.0)


class MiniCausalWorld:
	"""
	Single square block on a floor, manipulated by a position-controlled point effector.

	Block mass and floor friction only act through the dynamics and never appear in the observation.
	"""

	def __init__(self, task: Optional[TaskSpec] = None, physics: Optional[PhysicsParams] = None):
		self.task = task or TaskSpec()
		self.physics = physics or PhysicsParams()
		self.observation_space = spaces.Box(low=-np.inf, high=np.inf, shape=(OBS_WIDTH,), dtype=np.float64)
		self.action_space = spaces.Box(low=-1.0, high=1.0, shape=(ACTION_WIDTH,), dtype=np.float64)
		self._state: Optional[WorldState] = None

	# --- Episode contract ---

	@property
	def state(self) -> WorldState:
		if self._state is None:
			raise RuntimeError("Environment has not been reset")
		return self._state

	@property
	def variables(self) -> CausalVariables:
		return self.state.variables

	@property
	def done(self) -> bool:
		return self.state.time_step >= self.task.episode_length

	def reset(self, variables: CausalVariables, seed: int = 0) -> np.ndarray:
		validate_variables(variables)
		resting = self._resting_variables(variables)
		self._state = WorldState(
			task_id=self.task.task_id,
			variables=resting,
			seed=int(seed),
			block_pos=np.array(resting.block_pose, dtype=np.float64),
		)
		logger.debug("Reset %s world (seed=%d) with %s", self.task.task_id, seed, resting)
		return self.observation()

	def step(self, action) -> Tuple[np.ndarray, float, bool, Dict[str, Any]]:
		state = self.state
		if self.done:
			raise EpisodeFinishedError("Episode finished; call reset() before stepping again")
		command = self._validate_action(action)
		target, grip, grip_cmd = action_to_command(command)

		reach_before = self._reach_distance()
		goal_before = self._goal_distance()
		for _ in range(self.task.skipframe):
			self._physics_substep(target, grip, grip_cmd)
		state.time_step += 1

		success = self.fractional_success()
		reward = (
			self.task.w_reach * (reach_before - self._reach_distance())
			+ self.task.w_goal * (goal_before - self._goal_distance())
			+ self.task.w_fs * success
		)
		info = {
			"fractional_success": success,
			"time_step": state.time_step,
			"attached": state.attached,
		}
		return self.observation(), float(reward), self.done, info

	def observation(self) -> np.ndarray:
		state = self.state
		obs = np.empty(OBS_WIDTH, dtype=np.float64)
		obs[OBS_LAYOUT["time_left"]] = 1.0 - state.time_step / self.task.episode_length
		obs[OBS_LAYOUT["effector_pos"]] = state.effector_pos
		obs[OBS_LAYOUT["effector_vel"]] = state.effector_vel
		obs[OBS_LAYOUT["grip"]] = state.grip
		obs[OBS_LAYOUT["block_pos"]] = state.block_pos
		obs[OBS_LAYOUT["block_size"]] = state.variables.block_size
		obs[OBS_LAYOUT["goal_pos"]] = self.goal_pos
		return obs

	@property
	def goal_pos(self) -> np.ndarray:
		return np.array(self.state.variables.goal_pose, dtype=np.float64)

	def fractional_success(self) -> float:
		state = self.state
		size = state.variables.block_size
		return fractional_success(state.block_pos, size, self.goal_pos, size)

	# --- Snapshots for counterfactual replay ---

	def snapshot(self) -> WorldState:
		return self.state.copy()

	def restore(self, snapshot: WorldState, variables: Optional[CausalVariables] = None) -> np.ndarray:
		"""Restores a snapshot, optionally under intervened causal variables."""
		if snapshot.task_id != self.task.task_id:
			raise IncompatibleStateError(
				f"Snapshot from task '{snapshot.task_id}' cannot restore into '{self.task.task_id}'"
			)
		state = snapshot.copy()
		if variables is not None:
			validate_variables(variables)
			self._swap_variables(state, self._resting_variables(variables))
		self._state = state
		return self.observation()

	def _swap_variables(self, state: WorldState, new_vars: CausalVariables) -> None:
		old_vars = state.variables
		if new_vars.block_pose[0] != old_vars.block_pose[0]:
			state.block_pos = np.array(new_vars.block_pose, dtype=np.float64)
			state.block_vel = np.zeros(2, dtype=np.float64)
			state.attached = False
		half = 0.5 * new_vars.block_size
		state.block_pos[1] = max(state.block_pos[1], half)
		if state.attached and np.linalg.norm(state.effector_pos - state.block_pos) > half:
			state.attached = False
		state.variables = new_vars

	def _resting_variables(self, variables: CausalVariables) -> CausalVariables:
		half = 0.5 * variables.block_size
		goal_z = variables.goal_pose[1] if self.task.task_id == "picking" else half
		return variables.replace(
			block_pose=(float(variables.block_pose[0]), half),
			goal_pose=(float(variables.goal_pose[0]), float(goal_z)),
		)

	# --- Dynamics ---

	def _validate_action(self, action) -> np.ndarray:
		command = np.asarray(action, dtype=np.float64).reshape(-1)
		if command.shape != (ACTION_WIDTH,):
			raise InvalidActionError(f"Action must have width {ACTION_WIDTH}, got {command.shape}")
		if not np.all(np.isfinite(command)):
			raise InvalidActionError("Action contains non-finite values")
		if np.any(np.abs(command) > 1.0):
			raise InvalidActionError("Action components must lie in [-1, 1]")
		return command

	def _reach_distance(self) -> float:
		state = self.state
		return float(np.linalg.norm(state.effector_pos - state.block_pos))

	def _goal_distance(self) -> float:
		return float(np.linalg.norm(self.state.block_pos - self.goal_pos))

	def _physics_substep(self, target: np.ndarray, grip: float, grip_cmd: float) -> None:
		state = self.state
		dt = self.physics.dt
		half = 0.5 * state.variables.block_size

		delta = target - state.effector_pos
		distance = float(np.linalg.norm(delta))
		max_travel = self.physics.v_max * dt
		if distance > max_travel:
			delta = delta * (max_travel / distance)
		new_pos = state.effector_pos + delta
		new_pos[0] = min(max(new_pos[0], WORKSPACE_X[0]), WORKSPACE_X[1])
		new_pos[1] = min(max(new_pos[1], WORKSPACE_Z[0]), WORKSPACE_Z[1])
		state.effector_vel = (new_pos - state.effector_pos) / dt
		state.effector_pos = new_pos
		state.grip = grip

		if self.task.task_id == "picking":
			if grip_cmd <= GRIP_THRESHOLD:
				state.attached = False
			elif not state.attached and np.linalg.norm(state.effector_pos - state.block_pos) <= half:
				state.attached = True

		force = self._holding_force() if state.attached else self._contact_force()
		self._integrate_block(force)

		if state.attached and np.linalg.norm(state.effector_pos - state.block_pos) > half:
			state.attached = False

	def _contact_force(self) -> np.ndarray:
		"""Penalty force from the point effector inside the block, along the minimum-penetration axis."""
		state = self.state
		half = 0.5 * state.variables.block_size
		rel = state.effector_pos - state.block_pos
		pen_x = half - abs(rel[0])
		pen_z = half - abs(rel[1])
		if pen_x <= 0.0 or pen_z <= 0.0:
			return np.zeros(2, dtype=np.float64)
		if pen_x < pen_z:
			normal = np.array([-1.0 if rel[0] >= 0.0 else 1.0, 0.0])
			depth = pen_x
		else:
			normal = np.array([0.0, -1.0 if rel[1] >= 0.0 else 1.0])
			depth = pen_z
		separation_speed = float(np.dot(state.block_vel - state.effector_vel, normal))
		magnitude = self.physics.contact_stiffness * depth - self.physics.contact_damping * separation_speed
		if magnitude <= 0.0:
			return np.zeros(2, dtype=np.float64)
		return magnitude * normal

	def _holding_force(self) -> np.ndarray:
		"""Force that would land the block on the effector next sub-step, within the F_max budget."""
		state = self.state
		dt = self.physics.dt
		mass = state.variables.block_mass
		tracking = (state.effector_pos - state.block_pos - state.block_vel * dt) / (dt * dt)
		force = mass * (tracking + np.array([0.0, self.physics.gravity]))
		magnitude = float(np.linalg.norm(force))
		if magnitude > self.physics.f_max:
			force = force * (self.physics.f_max / magnitude)
		return force

	def _integrate_block(self, force: np.ndarray) -> None:
		state = self.state
		dt = self.physics.dt
		mass = state.variables.block_mass
		half = 0.5 * state.variables.block_size
		vx, vz = float(state.block_vel[0]), float(state.block_vel[1])
		fx, fz = float(force[0]), float(force[1])

		az = fz / mass - self.physics.gravity
		normal = 0.0
		if state.block_pos[1] <= half + FLOOR_TOLERANCE and az <= 0.0 and vz <= 0.0:
			normal = -mass * az
			az = 0.0
			vz = 0.0
		vz += az * dt

		friction = state.variables.floor_friction * normal
		if friction <= 0.0:
			vx += fx / mass * dt
		elif abs(vx) < STATIC_VELOCITY:
			if abs(fx) <= friction:
				vx = 0.0
			else:
				vx += (fx - math.copysign(friction, fx)) / mass * dt
		else:
			new_vx = vx + (fx - math.copysign(friction, vx)) / mass * dt
			# Kinetic friction stops the block; it never reverses it.
			vx = 0.0 if new_vx * vx < 0.0 else new_vx

		state.block_vel = np.array([vx, vz], dtype=np.float64)
		state.block_pos = state.block_pos + state.block_vel * dt
		if state.block_pos[1] < half:
			state.block_pos[1] = half
			state.block_vel[1] = max(state.block_vel[1], 0.0)


__all__ = [
	"ACTION_WIDTH",
	"HOME_POSITION",
	"OBS_LAYOUT",
	"OBS_WIDTH",
	"EpisodeFinishedError",
	"IncompatibleStateError",
	"InvalidActionError",
	"InvalidVariablesError",
	"MiniCausalWorld",
	"WorldState",
	"action_to_command",
	"position_to_action",
]
