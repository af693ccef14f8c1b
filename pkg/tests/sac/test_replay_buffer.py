import numpy as np
import pytest

from causalrep.services.replay_buffer import NotReadyError, ReplayBuffer


def _push(buffer, index, rep_version=-1):
	buffer.push(
		np.full(buffer.obs_width, float(index)),
		np.zeros(3),
		float(index),
		np.full(buffer.obs_width, float(index + 1)),
		False,
		rep_version=rep_version,
	)


def test_fifo_eviction_keeps_capacity():
	buffer = ReplayBuffer(5, 4)
	for index in range(6):
		_push(buffer, index)
	assert len(buffer) == 5
	assert buffer.total_pushed == 6
	assert sorted(buffer.rewards.tolist()) == [1.0, 2.0, 3.0, 4.0, 5.0]


def test_sampling_is_seed_deterministic():
	buffer = ReplayBuffer(50, 4)
	for index in range(50):
		_push(buffer, index)
	first = buffer.sample(16, seed=3)
	second = buffer.sample(16, seed=3)
	np.testing.assert_array_equal(np.sort(first.indices), np.sort(second.indices))
	np.testing.assert_array_equal(first.rewards, buffer.rewards[first.indices])


def test_sampling_more_than_stored_raises():
	buffer = ReplayBuffer(10, 4)
	_push(buffer, 0)
	with pytest.raises(NotReadyError):
		buffer.sample(2, seed=0)


def test_sampling_waits_for_learning_starts():
	buffer = ReplayBuffer(2000, 4, learning_starts=1000)
	for index in range(999):
		_push(buffer, index)
	assert not buffer.ready(256)
	with pytest.raises(NotReadyError):
		buffer.sample(256, seed=0)
	_push(buffer, 999)
	assert buffer.ready(256)
	assert buffer.sample(256, seed=0).observations.shape == (256, 4)


def test_stored_rep_versions_are_oldest_first():
	buffer = ReplayBuffer(3, 2)
	for index, version in enumerate([0, 0, 1, 2]):
		_push(buffer, index, rep_version=version)
	np.testing.assert_array_equal(buffer.stored_rep_versions(), [0, 1, 2])


def test_buffer_round_trips_through_npz(tmp_path):
	buffer = ReplayBuffer(8, 3, learning_starts=4)
	for index in range(11):
		_push(buffer, index, rep_version=index // 4)
	buffer.save(tmp_path / "buffer.npz")
	restored = ReplayBuffer.load(tmp_path / "buffer.npz")
	assert (restored.capacity, restored.size, restored.position, restored.total_pushed) == (8, 8, 3, 11)
	np.testing.assert_array_equal(restored.stored_rep_versions(), buffer.stored_rep_versions())
	first, second = buffer.sample(5, seed=1), restored.sample(5, seed=1)
	np.testing.assert_array_equal(first.observations, second.observations)
	np.testing.assert_array_equal(first.next_observations, second.next_observations)
