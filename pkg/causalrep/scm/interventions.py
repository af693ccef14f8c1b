from __future__ import annotations

import math
from typing import Any, Dict, Iterable, Mapping, Tuple

import numpy as np

from causalrep.scm.tables import get_scm_tables, pose_interval_keys
from causalrep.scm.variables import (
	POSE_VARIABLES,
	RESTING_Z,
	VARIABLE_NAMES,
	CausalVariables,
	pose_in_workspace,
	resolve_variable_name,
	scalar_in_bounds,
)

# Partial map variable-name -> value; poses are (x, z) pairs.
Intervention = Dict[str, Any]


class InvalidInterventionError(ValueError):
	"""Raised when an intervention value is non-finite or physically out of bounds."""


def _canonical_names(variables: Iterable[str]) -> list[str]:
	names = {resolve_variable_name(name) for name in variables}
	return [name for name in VARIABLE_NAMES if name in names]


def sample_space(
	space: str,
	variables: Iterable[str],
	rng_seed: int,
	*,
	task_id: str = "pushing",
) -> Intervention:
	"""Draws each named variable uniformly from its interval in the given space."""
	names = _canonical_names(variables)
	tables = get_scm_tables()
	rng = np.random.default_rng(rng_seed)
	intervention: Intervention = {}
	for name in names:
		if name in POSE_VARIABLES:
			keys = pose_interval_keys(name, task_id)
			x = tables.interval(keys[0], space).sample(rng)
			z = tables.interval(keys[1], space).sample(rng) if len(keys) > 1 else RESTING_Z
			intervention[name] = (x, z)
		else:
			intervention[name] = tables.interval(name, space).sample(rng)
	return intervention


def _coerce_value(name: str, value: Any) -> Any:
	if name in POSE_VARIABLES:
		try:
			pose = (float(value[0]), float(value[1]))
		except (TypeError, IndexError, ValueError) as exc:
			raise InvalidInterventionError(f"{name} expects an (x, z) pair, got {value!r}") from exc
		if len(value) != 2 or not pose_in_workspace(pose):
			raise InvalidInterventionError(f"{name}={value!r} outside workspace")
		return pose
	scalar = float(value)
	if not math.isfinite(scalar) or not scalar_in_bounds(name, scalar):
		raise InvalidInterventionError(f"{name}={value!r} outside physical bounds")
	return scalar


def normalize_intervention(intervention: Mapping[str, Any]) -> Intervention:
	"""Resolves short codes and validates values, preserving canonical variable order."""
	resolved = {resolve_variable_name(key): value for key, value in intervention.items()}
	return {name: _coerce_value(name, resolved[name]) for name in VARIABLE_NAMES if name in resolved}


def apply_intervention(variables: CausalVariables, intervention: Mapping[str, Any]) -> CausalVariables:
	"""do(.) on the causal variables: intervened fields replaced, the rest untouched."""
	changes = normalize_intervention(intervention)
	if not changes:
		return variables
	return variables.replace(**changes)


def _value_in_space(name: str, value: Any, space: str, task_id: str) -> bool:
	tables = get_scm_tables()
	if name in POSE_VARIABLES:
		keys = pose_interval_keys(name, task_id)
		coords: Tuple[float, ...] = (float(value[0]), float(value[1]))
		return all(tables.interval(key, space).contains(coords[i]) for i, key in enumerate(keys))
	return tables.interval(name, space).contains(float(value))


def in_space(variables: CausalVariables, space: str, *, task_id: str = "pushing") -> bool:
	"""True iff every variable lies in its interval for the space."""
	return all(
		_value_in_space(name, getattr(variables, name), space, task_id)
		for name in VARIABLE_NAMES
	)


def intervention_in_space(intervention: Mapping[str, Any], space: str, *, task_id: str = "pushing") -> bool:
	"""True iff every intervened value lies in its interval for the space."""
	resolved = {resolve_variable_name(key): value for key, value in intervention.items()}
	return all(_value_in_space(name, value, space, task_id) for name, value in resolved.items())


def describe_intervention(intervention: Mapping[str, Any]) -> str:
	parts = []
	for name, value in intervention.items():
		if isinstance(value, (tuple, list)):
			parts.append(f"{name}=({value[0]:.3f},{value[1]:.3f})")
		else:
			parts.append(f"{name}={float(value):.3f}")
	return ", ".join(parts) or "none"
