from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Tuple

# Workspace bounds shared by the world and the SCM (meters).
WORKSPACE_X: Tuple[float, float] = (-0.25, 0.25)
WORKSPACE_Z: Tuple[float, float] = (0.0, 0.5)

VARIABLE_NAMES: Tuple[str, ...] = (
	"block_mass",
	"block_size",
	"block_pose",
	"goal_pose",
	"floor_friction",
)
SHORT_CODES: Dict[str, str] = {
	"bm": "block_mass",
	"bs": "block_size",
	"bp": "block_pose",
	"gp": "goal_pose",
	"ff": "floor_friction",
}
CODE_FOR_NAME: Dict[str, str] = {name: code for code, name in SHORT_CODES.items()}
POSE_VARIABLES = frozenset({"block_pose", "goal_pose"})

# Physical plausibility limits for scalar variables (inclusive).
SCALAR_BOUNDS: Dict[str, Tuple[float, float]] = {
	"block_mass": (1e-3, 10.0),
	"block_size": (0.01, 0.25),
	"floor_friction": (0.0, 2.0),
}

# Resting height of a default-size object; reset re-derives it from the actual size.
RESTING_Z = 0.05
DEFAULT_PICKING_GOAL_Z = 0.20


class UnknownVariableError(ValueError):
	"""Raised when a variable name is not one of the five causal variables."""


class InvalidVariablesError(ValueError):
	"""Raised when causal variables are non-physical or outside the workspace."""


@dataclass(frozen=True)
class CausalVariables:
	block_mass: float = 0.75
	block_size: float = 0.10
	block_pose: Tuple[float, float] = (-0.06, RESTING_Z)
	goal_pose: Tuple[float, float] = (0.06, RESTING_Z)
	floor_friction: float = 0.45

	def as_dict(self) -> Dict[str, Any]:
		return {
			"block_mass": self.block_mass,
			"block_size": self.block_size,
			"block_pose": list(self.block_pose),
			"goal_pose": list(self.goal_pose),
			"floor_friction": self.floor_friction,
		}

	@classmethod
	def from_dict(cls, raw: Mapping[str, Any]) -> "CausalVariables":
		return cls(
			block_mass=float(raw["block_mass"]),
			block_size=float(raw["block_size"]),
			block_pose=(float(raw["block_pose"][0]), float(raw["block_pose"][1])),
			goal_pose=(float(raw["goal_pose"][0]), float(raw["goal_pose"][1])),
			floor_friction=float(raw["floor_friction"]),
		)

	def replace(self, **changes: Any) -> "CausalVariables":
		return dataclasses.replace(self, **changes)


def default_variables(task_id: str = "pushing") -> CausalVariables:
	"""Default world: every scalar at its space-A midpoint, block and goal apart inside space A."""
	if task_id == "picking":
		return CausalVariables(goal_pose=(0.06, DEFAULT_PICKING_GOAL_Z))
	return CausalVariables()


def resolve_variable_name(name: str) -> str:
	"""Maps a short code (bp, bm, ...) or full name onto the canonical field name."""
	key = str(name).strip()
	if key in SHORT_CODES:
		return SHORT_CODES[key]
	if key in VARIABLE_NAMES:
		return key
	raise UnknownVariableError(f"Unknown causal variable '{name}'")


def pose_in_workspace(pose: Tuple[float, float]) -> bool:
	if len(pose) != 2 or not all(math.isfinite(float(v)) for v in pose):
		return False
	x, z = float(pose[0]), float(pose[1])
	return WORKSPACE_X[0] <= x <= WORKSPACE_X[1] and WORKSPACE_Z[0] <= z <= WORKSPACE_Z[1]


def scalar_in_bounds(name: str, value: float) -> bool:
	low, high = SCALAR_BOUNDS[name]
	return math.isfinite(value) and low <= value <= high


def validate_variables(variables: CausalVariables) -> None:
	for name in ("block_mass", "block_size", "floor_friction"):
		value = float(getattr(variables, name))
		if not scalar_in_bounds(name, value):
			raise InvalidVariablesError(f"{name}={value} outside physical bounds {SCALAR_BOUNDS[name]}")
	for name in POSE_VARIABLES:
		pose = getattr(variables, name)
		if not pose_in_workspace(pose):
			raise InvalidVariablesError(f"{name}={tuple(pose)} outside workspace")
