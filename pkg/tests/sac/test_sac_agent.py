import copy

import numpy as np
import pytest
import torch
import torch.nn as nn

from causalrep.schemas import SACConfig
from causalrep.services.replay_buffer import NotReadyError, ReplayBuffer
from causalrep.services.rep_store import CausalRep, InvalidRepresentationError, ShapeError, zero_rep
from causalrep.services.sac_agent import (
	AgentPolicy,
	SACAgent,
	augment_observation,
	critic_target,
	load_agent,
	polyak_update,
	save_agent,
)

SMALL = SACConfig(hidden_sizes=(16, 16), batch_size=16, learning_starts=0, buffer_size=500)


def _filled_buffer(obs_width, count=64, seed=0):
	rng = np.random.default_rng(seed)
	buffer = ReplayBuffer(500, obs_width)
	for index in range(count):
		buffer.push(
			rng.normal(size=obs_width),
			rng.uniform(-1.0, 1.0, size=3),
			float(rng.normal()),
			rng.normal(size=obs_width),
			index % 10 == 9,
		)
	return buffer


def test_augment_observation_appends_rep():
	obs = np.arange(11, dtype=np.float64)
	rep = CausalRep(np.linspace(0.0, 1.0, 32))
	augmented = augment_observation(obs, rep, 32)
	assert augmented.shape == (43,)
	np.testing.assert_array_equal(augmented[:11], obs)
	np.testing.assert_array_equal(augmented[11:], rep.values)


def test_augment_with_zero_rep_has_zero_suffix():
	augmented = augment_observation(np.ones(11), zero_rep(32), 32)
	np.testing.assert_array_equal(augmented[11:], np.zeros(32))


def test_augment_rejects_wrong_width_and_non_finite():
	with pytest.raises(ShapeError):
		augment_observation(np.ones(11), zero_rep(16), 32)
	with pytest.raises(InvalidRepresentationError):
		augment_observation(np.ones(11), np.array([np.nan] * 32), 32)
	with pytest.raises(ShapeError):
		augment_observation(np.ones(11), None, 32)
	np.testing.assert_array_equal(augment_observation(np.ones(11), None, 0), np.ones(11))


def test_deterministic_action_is_reproducible_and_bounded():
	agent = SACAgent(43, SMALL, seed=1)
	obs = np.random.default_rng(0).normal(size=43) * 10.0
	first = agent.select_action(obs, deterministic=True)
	second = agent.select_action(obs, deterministic=True)
	np.testing.assert_array_equal(first, second)
	assert np.all(np.abs(first) <= 1.0)


def test_stochastic_actions_vary_within_bounds():
	agent = SACAgent(11, SMALL, seed=2)
	obs = np.zeros(11)
	actions = np.array([agent.select_action(obs, rng_seed=seed) for seed in range(1000)])
	assert np.all(np.abs(actions) <= 1.0)
	assert np.all(actions.var(axis=0) > 0.0)
	np.testing.assert_array_equal(agent.select_action(obs, rng_seed=5), agent.select_action(obs, rng_seed=5))


def test_select_action_rejects_wrong_width():
	with pytest.raises(ShapeError):
		SACAgent(43, SMALL).select_action(np.zeros(11))


def test_targets_start_equal_to_critics():
	agent = SACAgent(11, SMALL, seed=3)
	for online, target in ((agent.critic1, agent.target1), (agent.critic2, agent.target2)):
		for a, b in zip(online.parameters(), target.parameters()):
			assert torch.equal(a, b)
			assert not b.requires_grad


def test_critic_target_ignores_next_values_for_terminal_transitions():
	y = critic_target(
		torch.tensor([[1.0]]),
		torch.tensor([[1.0]]),
		torch.tensor([[123.0]]),
		torch.tensor([[-50.0]]),
		torch.tensor([[7.0]]),
		gamma=0.95,
		alpha=1e-3,
	)
	assert float(y) == 1.0


def test_critic_target_bootstraps_from_min_critic():
	y = critic_target(
		torch.tensor([[0.0]]),
		torch.tensor([[0.0]]),
		torch.tensor([[1.0]]),
		torch.tensor([[2.0]]),
		torch.tensor([[0.0]]),
		gamma=0.95,
		alpha=1e-3,
	)
	assert float(y) == pytest.approx(0.95)


def test_polyak_step_from_zero_target():
	online = nn.Linear(1, 1, bias=False).double()
	target = nn.Linear(1, 1, bias=False).double()
	with torch.no_grad():
		online.weight.fill_(1.0)
		target.weight.fill_(0.0)
	polyak_update(online, target, 1e-3)
	assert float(target.weight) == pytest.approx(0.001, abs=1e-15)


def test_polyak_gap_shrinks_by_one_minus_tau():
	torch.manual_seed(0)
	online = nn.Linear(5, 4).double()
	target = copy.deepcopy(online)
	with torch.no_grad():
		for parameter in target.parameters():
			parameter.add_(torch.randn_like(parameter))
	gap_before = max(float((t - o).abs().max()) for t, o in zip(target.parameters(), online.parameters()))
	polyak_update(online, target, 1e-3)
	gap_after = max(float((t - o).abs().max()) for t, o in zip(target.parameters(), online.parameters()))
	assert gap_after == pytest.approx((1 - 1e-3) * gap_before, rel=1e-12)


def test_update_before_ready_raises():
	agent = SACAgent(11, SMALL)
	buffer = _filled_buffer(11, count=8)
	with pytest.raises(NotReadyError):
		agent.update(buffer)


def test_update_keeps_everything_finite():
	agent = SACAgent(11, SMALL, seed=4)
	buffer = _filled_buffer(11)
	for _ in range(20):
		losses = agent.update(buffer)
		assert np.isfinite(losses["critic"]) and np.isfinite(losses["actor"])
	assert agent.updates == 20
	for module in (agent.actor, agent.critic1, agent.critic2, agent.target1, agent.target2):
		for parameter in module.parameters():
			assert torch.all(torch.isfinite(parameter))


def test_seeded_updates_are_reproducible():
	buffer = _filled_buffer(11, count=200, seed=9)
	first, second = SACAgent(11, SMALL, seed=5), SACAgent(11, SMALL, seed=5)
	losses_first = [first.update(buffer) for _ in range(1000)]
	losses_second = [second.update(buffer) for _ in range(1000)]
	assert losses_first == losses_second


def test_agent_round_trips_through_archive(tmp_path):
	agent = SACAgent(11, SMALL, seed=6)
	buffer = _filled_buffer(11)
	agent.update(buffer)
	save_agent(agent, tmp_path, extra={"step": 10})
	restored = load_agent(tmp_path)
	assert restored.updates == 1
	obs = np.linspace(-1.0, 1.0, 11)
	np.testing.assert_array_equal(restored.select_action(obs, rng_seed=3), agent.select_action(obs, rng_seed=3))
	assert restored.update(buffer) == agent.update(buffer)


def test_agent_policy_uses_the_rep():
	agent = SACAgent(43, SMALL, seed=7)
	policy = AgentPolicy(agent, zero_rep(32), 32)
	action = policy(np.zeros(11), seed=0)
	assert action.shape == (3,)
	np.testing.assert_array_equal(action, agent.select_action(np.zeros(43), deterministic=True))
