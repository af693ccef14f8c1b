import numpy as np
import pytest

from causalrep.world.geometry import InvalidGeometryError, fractional_success


def _grid_overlap(block_pos, block_size, goal_pos, goal_size, resolution=1e-3):
	"""Counts goal-grid cell midpoints inside the block, axis by axis."""
	fractions = []
	for axis in (0, 1):
		cells = max(1, int(round(goal_size / resolution)))
		step = goal_size / cells
		mids = goal_pos[axis] - 0.5 * goal_size + step * (np.arange(cells) + 0.5)
		inside = np.abs(mids - block_pos[axis]) <= 0.5 * block_size
		fractions.append(inside.mean())
	return fractions[0] * fractions[1]


@pytest.mark.parametrize(
	"block, goal, expected",
	[
		((0.0, 0.05), (0.0, 0.05), 1.0),
		((0.3, 0.05), (0.0, 0.05), 0.0),
		((0.05, 0.05), (0.0, 0.05), 0.5),
	],
)
def test_fractional_success_reference_configurations(block, goal, expected):
	assert fractional_success(block, 0.1, goal, 0.1) == pytest.approx(expected, abs=1e-12)


def test_fractional_success_matches_grid_oracle():
	rng = np.random.default_rng(7)
	for _ in range(1000):
		goal_size = rng.uniform(0.2, 0.25)
		block_size = rng.uniform(0.05, 0.25)
		goal = rng.uniform(-0.2, 0.2, size=2)
		block = goal + rng.uniform(-0.25, 0.25, size=2)
		value = fractional_success(block, block_size, goal, goal_size)
		assert 0.0 <= value <= 1.0
		assert abs(value - _grid_overlap(block, block_size, goal, goal_size)) <= 1e-2


def test_fractional_success_is_one_only_when_goal_is_covered():
	assert fractional_success((0.0, 0.1), 0.2, (0.0, 0.1), 0.1) == 1.0
	assert fractional_success((1e-9, 0.05), 0.1, (0.0, 0.05), 0.1) < 1.0


def test_fractional_success_monotone_in_overlap():
	offsets = np.linspace(0.0, 0.12, 40)
	values = [fractional_success((offset, 0.05), 0.1, (0.0, 0.05), 0.1) for offset in offsets]
	assert all(later <= earlier for earlier, later in zip(values, values[1:]))
	assert values[-1] == 0.0


@pytest.mark.parametrize("block_size, goal_size", [(0.0, 0.1), (0.1, -0.1), (float("nan"), 0.1)])
def test_fractional_success_rejects_bad_sizes(block_size, goal_size):
	with pytest.raises(InvalidGeometryError):
		fractional_success((0.0, 0.05), block_size, (0.0, 0.05), goal_size)
