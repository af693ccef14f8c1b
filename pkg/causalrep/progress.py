"""Progress bars for the agent, counterfactual and evaluation loops.

Bars are shown unless CAUSALREP_PROGRESS is set to a false-ish token. CLI results go
through `progress_write` so they never interleave with an active bar.
"""
import os
from contextlib import contextmanager
from typing import Any, Iterable, Iterator, Optional

from tqdm import tqdm

_FALSE_TOKENS = frozenset({"0", "false", "off", "no", "disable", "disabled"})
_enabled: Optional[bool] = None


def set_progress_enabled(enabled: bool) -> None:
	"""Override the environment toggle (tests switch bars off)."""
	global _enabled
	_enabled = bool(enabled)


def progress_enabled() -> bool:
	global _enabled
	if _enabled is None:
		raw = (os.getenv("CAUSALREP_PROGRESS") or "").strip().lower()
		_enabled = raw not in _FALSE_TOKENS
	return _enabled


def progress_bar(iterable: Optional[Iterable[Any]] = None, **kwargs: Any) -> tqdm:
	kwargs.setdefault("disable", not progress_enabled())
	kwargs.setdefault("leave", False)
	return tqdm(iterable, **kwargs)


@contextmanager
def step_progress(start: int, until: int, desc: str) -> Iterator[tqdm]:
	"""Env-step bar that starts at `start`, so resumed runs show absolute steps."""
	bar = progress_bar(total=max(until, start), initial=start, desc=desc, unit="step")
	try:
		yield bar
	finally:
		bar.close()


def progress_write(message: str, *, file: Any = None) -> None:
	tqdm.write(message, file=file)


__all__ = [
	"progress_bar",
	"progress_enabled",
	"progress_write",
	"set_progress_enabled",
	"step_progress",
]
