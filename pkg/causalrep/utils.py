from __future__ import annotations

import json
import zlib
from pathlib import Path
from typing import Any

import numpy as np
import torch

from causalrep.config import get_settings

# =============================================================================
# Seed Derivation
# =============================================================================

def _key_to_int(key: Any) -> int:
	if isinstance(key, (int, np.integer)):
		return int(key) & 0xFFFFFFFF
	# Strings are hashed with crc32 so derived seeds stay stable across processes.
	return zlib.crc32(str(key).encode("utf-8"))


def derive_seed(master: int, *keys: Any) -> int:
	"""Derives a 32-bit seed from a master seed and a path of keys (ints or strings)."""
	entropy = [_key_to_int(master)] + [_key_to_int(key) for key in keys]
	return int(np.random.SeedSequence(entropy).generate_state(1)[0])


def make_rng(master: int, *keys: Any) -> np.random.Generator:
	return np.random.default_rng(derive_seed(master, *keys))


def make_torch_generator(master: int, *keys: Any) -> torch.Generator:
	generator = torch.Generator()
	generator.manual_seed(derive_seed(master, *keys))
	return generator


def configure_torch() -> None:
	"""Applies process-wide torch settings for reproducible single-threaded runs."""
	settings = get_settings()
	torch.set_num_threads(max(1, settings.TORCH_THREADS))
	torch.use_deterministic_algorithms(True)


# =============================================================================
# JSON Helpers
# =============================================================================

def write_json(path: str | Path, payload: Any) -> Path:
	target = Path(path)
	target.parent.mkdir(parents=True, exist_ok=True)
	with target.open("w", encoding="utf-8") as handle:
		json.dump(payload, handle, indent=2, sort_keys=True)
		handle.write("\n")
	return target


def read_json(path: str | Path) -> Any:
	source = Path(path)
	if not source.exists():
		raise FileNotFoundError(f"JSON file not found at {source}")
	with source.open("r", encoding="utf-8") as handle:
		return json.load(handle)
