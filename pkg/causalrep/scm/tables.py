from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, FrozenSet, List, Tuple

import numpy as np

from causalrep.config import get_settings
from causalrep.scm.variables import SHORT_CODES

DEFAULT_TABLES_PATH = Path(__file__).resolve().parent / "scm_tables.json"
ALL_TOKEN = "all"


@dataclass(frozen=True)
class Interval:
	"""Closed interval [low, high], optionally open at low and mirrored around zero."""
	low: float
	high: float
	low_open: bool = False
	symmetric: bool = False

	def contains(self, value: float) -> bool:
		magnitude = abs(value) if self.symmetric else value
		above_low = magnitude > self.low if self.low_open else magnitude >= self.low
		return above_low and magnitude <= self.high

	def sample(self, rng: np.random.Generator) -> float:
		sign = 1.0
		if self.symmetric:
			sign = -1.0 if rng.random() < 0.5 else 1.0
		u = rng.random()
		fraction = (1.0 - u) if self.low_open else u
		value = min(self.low + (self.high - self.low) * fraction, self.high)
		if self.low_open and value <= self.low:
			value = float(np.nextafter(self.low, self.high))
		return sign * value

	def to_dict(self) -> dict:
		return {"low": self.low, "high": self.high, "low_open": self.low_open, "symmetric": self.symmetric}


@dataclass(frozen=True)
class Protocol:
	id: str
	space: str
	variables: FrozenSet[str] = field(default_factory=frozenset)

	@property
	def variable_codes(self) -> List[str]:
		order = list(SHORT_CODES.keys())
		return sorted(self.variables, key=order.index)


@dataclass(frozen=True)
class ScmTables:
	spaces: Dict[str, Dict[str, Interval]]
	protocols: Dict[str, Protocol]

	def interval(self, key: str, space: str) -> Interval:
		return self.spaces[key][space]


def _resolve_tables_path() -> Path:
	override = get_settings().SCM_CONFIG
	if override:
		return Path(override).expanduser().resolve()
	return DEFAULT_TABLES_PATH


def _load_raw_tables(path: Path) -> dict:
	if not path.exists():
		raise FileNotFoundError(f"SCM tables not found at {path}")
	with path.open("r", encoding="utf-8") as handle:
		return json.load(handle)


def _parse_tables(raw: dict) -> ScmTables:
	spaces: Dict[str, Dict[str, Interval]] = {}
	for key, per_space in raw.get("spaces", {}).items():
		spaces[key] = {
			space: Interval(
				low=float(entry["low"]),
				high=float(entry["high"]),
				low_open=bool(entry.get("low_open", False)),
				symmetric=bool(entry.get("symmetric", False)),
			)
			for space, entry in per_space.items()
		}
	protocols: Dict[str, Protocol] = {}
	for entry in raw.get("protocols", []):
		codes = entry.get("variables", [])
		if ALL_TOKEN in codes:
			codes = list(SHORT_CODES.keys())
		protocols[entry["id"]] = Protocol(id=entry["id"], space=entry["space"], variables=frozenset(codes))
	return ScmTables(spaces=spaces, protocols=protocols)


@lru_cache(maxsize=8)
def _get_tables_cached(path_str: str, version_token: float) -> ScmTables:
	return _parse_tables(_load_raw_tables(Path(path_str)))


def get_scm_tables() -> ScmTables:
	path = _resolve_tables_path()
	try:
		version_token = path.stat().st_mtime
	except FileNotFoundError:
		# Let _load_raw_tables raise the detailed error shortly after.
		version_token = 0.0
	return _get_tables_cached(str(path), version_token)


def tables_to_dict(tables: ScmTables) -> dict:
	"""Serializes the tables into the same layout they are loaded from (for run-config echo)."""
	return {
		"spaces": {
			key: {space: interval.to_dict() for space, interval in per_space.items()}
			for key, per_space in tables.spaces.items()
		},
		"protocols": [
			{"id": p.id, "space": p.space, "variables": p.variable_codes}
			for p in tables.protocols.values()
		],
	}


def pose_interval_keys(variable: str, task_id: str) -> Tuple[str, ...]:
	"""Interval keys that constrain a pose variable for the given task."""
	if variable == "block_pose":
		return ("block_x",)
	if task_id == "picking":
		return ("goal_x", "goal_z_picking")
	return ("goal_x",)
