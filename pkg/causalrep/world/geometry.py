from __future__ import annotations

import math
from typing import Sequence


class InvalidGeometryError(ValueError):
	"""Raised when a square has a non-positive or non-finite size."""


def _interval_overlap(center_a: float, half_a: float, center_b: float, half_b: float) -> float:
	low = max(center_a - half_a, center_b - half_b)
	high = min(center_a + half_a, center_b + half_b)
	return max(0.0, high - low)


def _covers(outer: Sequence[float], half_outer: float, inner: Sequence[float], half_inner: float) -> bool:
	return all(
		float(outer[axis]) - half_outer <= float(inner[axis]) - half_inner
		and float(inner[axis]) + half_inner <= float(outer[axis]) + half_outer
		for axis in (0, 1)
	)


def fractional_success(
	block_pos: Sequence[float],
	block_size: float,
	goal_pos: Sequence[float],
	goal_size: float,
) -> float:
	"""Overlap area of the block and goal squares divided by the goal area."""
	if not (math.isfinite(block_size) and math.isfinite(goal_size)) or block_size <= 0 or goal_size <= 0:
		raise InvalidGeometryError(f"Square sizes must be positive (block={block_size}, goal={goal_size})")
	half_block = 0.5 * block_size
	half_goal = 0.5 * goal_size
	if _covers(block_pos, half_block, goal_pos, half_goal):
		return 1.0
	overlap_x = _interval_overlap(float(block_pos[0]), half_block, float(goal_pos[0]), half_goal)
	overlap_z = _interval_overlap(float(block_pos[1]), half_block, float(goal_pos[1]), half_goal)
	ratio = (overlap_x * overlap_z) / (goal_size * goal_size)
	# Full coverage was handled above, so rounding must not report a perfect score.
	return min(math.nextafter(1.0, 0.0), max(0.0, ratio))
