"""Causal representation values and their rep_vK.json persistence."""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from causalrep.utils import read_json, write_json

logger = logging.getLogger(__name__)

REP_FILE_PATTERN = re.compile(r"^rep_v(?P<version>\d+)\.json$")


class ShapeError(ValueError):
	"""Raised when an array or representation does not have the expected shape."""


class InvalidRepresentationError(ValueError):
	"""Raised when a causal representation holds non-finite values."""


@dataclass(frozen=True, eq=False)
class CausalRep:
	values: np.ndarray
	version: int = 0

	def __post_init__(self) -> None:
		values = np.asarray(self.values, dtype=np.float64).reshape(-1)
		if not np.all(np.isfinite(values)):
			raise InvalidRepresentationError("Causal representation contains non-finite values")
		values.setflags(write=False)
		object.__setattr__(self, "values", values)

	@property
	def width(self) -> int:
		return int(self.values.shape[0])

	def to_dict(self) -> dict:
		return {"width": self.width, "version": self.version, "values": self.values.tolist()}


def zero_rep(width: int, version: int = 0) -> CausalRep:
	return CausalRep(np.zeros(width, dtype=np.float64), version)


def rep_filename(version: int) -> str:
	return f"rep_v{version}.json"


def save_rep(rep: CausalRep, run_dir: str | Path) -> Path:
	path = write_json(Path(run_dir) / rep_filename(rep.version), rep.to_dict())
	logger.info("Stored causal representation v%d (width=%d) at %s", rep.version, rep.width, path)
	return path


def load_rep(path: str | Path, *, expected_width: Optional[int] = None) -> CausalRep:
	payload = read_json(path)
	values = np.asarray(payload["values"], dtype=np.float64)
	if values.ndim != 1 or values.shape[0] != int(payload["width"]):
		raise ShapeError(f"Representation at {path} declares width {payload['width']} but holds {values.shape}")
	if expected_width is not None and values.shape[0] != expected_width:
		raise ShapeError(f"Representation at {path} has width {values.shape[0]}, expected {expected_width}")
	return CausalRep(values, int(payload["version"]))


def latest_rep_path(run_dir: str | Path) -> Optional[Path]:
	"""Highest-version rep_vK.json in a run directory, if any."""
	candidates = []
	for path in Path(run_dir).glob("rep_v*.json"):
		match = REP_FILE_PATTERN.match(path.name)
		if match:
			candidates.append((int(match.group("version")), path))
	if not candidates:
		return None
	return max(candidates)[1]
