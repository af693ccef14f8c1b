import math

import numpy as np
import pytest

from causalrep.schemas import TaskSpec
from causalrep.scm.variables import CausalVariables, InvalidVariablesError, default_variables
from causalrep.world.world import (
	OBS_LAYOUT,
	OBS_WIDTH,
	EpisodeFinishedError,
	IncompatibleStateError,
	InvalidActionError,
	MiniCausalWorld,
	action_to_command,
	position_to_action,
)


def _drive(env, x, z, steps, grip_cmd=-1.0):
	action = position_to_action(x, z, grip_cmd)
	observations = []
	for _ in range(steps):
		obs, _, done, _ = env.step(action)
		observations.append(obs)
		if done:
			break
	return observations


def _scripted_push(env, push_steps=50, settle_steps=40):
	"""Approach the block from the left at resting height, then push right."""
	block_x, block_z = env.state.block_pos
	_drive(env, block_x - 0.12, 0.30, 20)
	_drive(env, block_x - 0.12, block_z, 25)
	trace = _drive(env, 0.10, block_z, push_steps)
	trace += _drive(env, 0.10, block_z, settle_steps)
	return trace


def _block_x(observations):
	return np.array([obs[OBS_LAYOUT["block_pos"]][0] for obs in observations])


def test_reset_returns_initial_observation():
	env = MiniCausalWorld(TaskSpec(task_id="pushing"))
	obs = env.reset(default_variables(), seed=0)
	assert obs.shape == (OBS_WIDTH,)
	assert obs[OBS_LAYOUT["time_left"]][0] == 1.0
	assert obs[OBS_LAYOUT["grip"]][0] == 0.0
	assert obs[OBS_LAYOUT["block_pos"]][1] == pytest.approx(0.05)
	assert env.observation_space.shape == (OBS_WIDTH,)
	assert env.action_space.shape == (3,)


def test_reset_is_deterministic():
	first = MiniCausalWorld().reset(default_variables(), seed=3)
	second = MiniCausalWorld().reset(default_variables(), seed=3)
	np.testing.assert_array_equal(first, second)


def test_reset_rejects_out_of_workspace_variables():
	env = MiniCausalWorld()
	with pytest.raises(InvalidVariablesError):
		env.reset(CausalVariables(block_pose=(0.5, 0.05)))


@pytest.mark.parametrize(
	"action",
	[
		np.zeros(2),
		np.array([0.0, np.nan, 0.0]),
		np.array([0.0, 1.5, 0.0]),
	],
)
def test_step_rejects_invalid_actions(action):
	env = MiniCausalWorld()
	env.reset(default_variables())
	with pytest.raises(InvalidActionError):
		env.step(action)


def test_episode_terminates_at_episode_length():
	env = MiniCausalWorld(TaskSpec(episode_length=5))
	env.reset(default_variables())
	action = np.zeros(3)
	dones = [env.step(action)[2] for _ in range(5)]
	assert dones == [False, False, False, False, True]
	with pytest.raises(EpisodeFinishedError):
		env.step(action)


def test_static_friction_holds_resting_block():
	env = MiniCausalWorld()
	start = env.reset(default_variables())
	trace = _drive(env, 0.0, 0.30, 30)
	np.testing.assert_array_equal(trace[-1][OBS_LAYOUT["block_pos"]], start[OBS_LAYOUT["block_pos"]])


def _reference_push(effector, target, block_x, half, mass, friction, physics, steps, skipframe):
	"""
	Semi-implicit Euler for a floor-resting block hit side-on by a kinematic point effector.

	Returns the block x after every step and whether contact pushed during that step.
	"""
	effector = np.array(effector, dtype=np.float64)
	block_z = half
	vx = 0.0
	limit = friction * (mass * physics.gravity)
	xs, pushed = [], []
	for _ in range(steps):
		touched = False
		for _ in range(skipframe):
			delta = target - effector
			distance = float(np.linalg.norm(delta))
			if distance > physics.v_max * physics.dt:
				delta = delta * (physics.v_max * physics.dt / distance)
			moved = effector + delta
			effector_vx = (moved[0] - effector[0]) / physics.dt
			effector = moved

			force = 0.0
			gap = effector[0] - block_x
			depth = half - abs(gap)
			if 0.0 < depth < half - abs(effector[1] - block_z):
				direction = -1.0 if gap >= 0.0 else 1.0
				magnitude = physics.contact_stiffness * depth - physics.contact_damping * (vx - effector_vx) * direction
				if magnitude > 0.0:
					force = magnitude * direction
					touched = True

			if abs(vx) < 1e-6:
				vx = 0.0 if abs(force) <= limit else vx + (force - math.copysign(limit, force)) / mass * physics.dt
			else:
				slowed = vx + (force - math.copysign(limit, vx)) / mass * physics.dt
				vx = 0.0 if slowed * vx < 0.0 else slowed
			block_x += vx * physics.dt
		xs.append(block_x)
		pushed.append(touched)
	return np.array(xs), np.array(pushed)


def _side_push_setup(mass):
	"""Effector parked 3 cm left of the block at its centre height, commanded 15 cm past it."""
	env = MiniCausalWorld(TaskSpec(episode_length=250))
	env.reset(default_variables().replace(floor_friction=0.3, block_mass=mass))
	block_x, block_z = env.state.block_pos
	half = 0.5 * env.variables.block_size
	env.state.effector_pos = np.array([block_x - half - 0.03, block_z])
	return env, position_to_action(block_x + 0.15, block_z)


def _reference_for(env, action, steps):
	target, _, _ = action_to_command(action)
	return _reference_push(
		env.state.effector_pos,
		target,
		float(env.state.block_pos[0]),
		0.5 * env.variables.block_size,
		env.variables.block_mass,
		env.variables.floor_friction,
		env.physics,
		steps,
		env.task.skipframe,
	)


def test_side_push_matches_single_contact_reference():
	env, action = _side_push_setup(0.5)
	start_x = float(env.state.block_pos[0])
	expected, pushed = _reference_for(env, action, 50)
	world_x = _block_x([env.step(action)[0] for _ in range(50)])

	np.testing.assert_allclose(world_x, expected, rtol=0.0, atol=1e-9)
	assert pushed.any()
	assert not pushed[0]
	before = np.concatenate([[start_x], world_x[:-1]])
	assert np.all(world_x[pushed] > before[pushed])
	assert world_x[-1] > start_x


def test_doubling_friction_never_increases_displacement():
	displacements = []
	for friction in (0.3, 0.6):
		env = MiniCausalWorld(TaskSpec(episode_length=250))
		env.reset(default_variables().replace(floor_friction=friction))
		start_x = env.state.block_pos[0]
		trace = _block_x(_scripted_push(env))
		displacements.append(trace[-1] - start_x)
	assert displacements[1] <= displacements[0]


def test_block_never_penetrates_floor():
	env = MiniCausalWorld(TaskSpec(task_id="picking", episode_length=200))
	env.reset(default_variables("picking"))
	rng = np.random.default_rng(11)
	half = 0.5 * env.variables.block_size
	for _ in range(200):
		obs, _, done, info = env.step(rng.uniform(-1.0, 1.0, size=3))
		assert obs[OBS_LAYOUT["block_pos"]][1] >= half - 1e-9
		assert 0.0 <= info["fractional_success"] <= 1.0
		state = env.state
		if state.attached:
			assert np.linalg.norm(state.effector_pos - state.block_pos) <= half
		if done:
			break


def test_heavy_block_cannot_be_lifted():
	env = MiniCausalWorld(TaskSpec(task_id="picking", episode_length=200))
	variables = default_variables("picking").replace(block_mass=5.0)
	env.reset(variables)
	block_x, block_z = env.state.block_pos
	_drive(env, block_x, 0.30, 15)
	heights = [obs[OBS_LAYOUT["block_pos"]][1] for obs in _drive(env, block_x, block_z, 30, grip_cmd=1.0)]
	heights += [obs[OBS_LAYOUT["block_pos"]][1] for obs in _drive(env, block_x, 0.40, 40, grip_cmd=1.0)]
	assert max(heights) <= block_z + 1e-12


def test_observation_hides_mass_and_friction():
	rng = np.random.default_rng(5)
	for _ in range(20):
		base = default_variables().replace(
			block_mass=float(rng.uniform(0.5, 2.0)),
			floor_friction=float(rng.uniform(0.3, 1.0)),
		)
		other = base.replace(block_mass=base.block_mass * 1.5, floor_friction=base.floor_friction * 0.5)
		np.testing.assert_array_equal(MiniCausalWorld().reset(base), MiniCausalWorld().reset(other))


def test_snapshot_restore_reproduces_trajectory():
	env = MiniCausalWorld()
	env.reset(default_variables())
	snapshot = env.snapshot()
	rng = np.random.default_rng(2)
	actions = rng.uniform(-1.0, 1.0, size=(100, 3))
	first = [env.step(a)[0] for a in actions]
	env.restore(snapshot)
	second = [env.step(a)[0] for a in actions]
	np.testing.assert_array_equal(np.array(first), np.array(second))


def test_restore_rejects_other_task():
	picking = MiniCausalWorld(TaskSpec(task_id="picking"))
	picking.reset(default_variables("picking"))
	pushing = MiniCausalWorld(TaskSpec(task_id="pushing"))
	with pytest.raises(IncompatibleStateError):
		pushing.restore(picking.snapshot())


def test_restore_with_mass_intervention_diverges_after_contact():
	env, action = _side_push_setup(0.5)
	snapshot = env.snapshot()
	expected, pushed = _reference_for(env, action, 50)
	factual = _block_x([env.step(action)[0] for _ in range(50)])

	env.restore(snapshot, env.variables.replace(block_mass=1.5))
	expected_heavy, pushed_heavy = _reference_for(env, action, 50)
	counterfactual = _block_x([env.step(action)[0] for _ in range(50)])

	np.testing.assert_allclose(factual, expected, rtol=0.0, atol=1e-9)
	np.testing.assert_allclose(counterfactual, expected_heavy, rtol=0.0, atol=1e-9)
	first = int(np.argmax(pushed))
	assert first == int(np.argmax(pushed_heavy)) > 0
	np.testing.assert_array_equal(factual[:first], counterfactual[:first])
	assert factual[first] > counterfactual[first]


def test_reward_combines_reach_goal_and_success():
	task = TaskSpec(w_reach=750.0, w_goal=0.0, w_fs=0.0)
	env = MiniCausalWorld(task)
	env.reset(default_variables())
	block_x, block_z = env.state.block_pos
	_, reward, _, _ = env.step(position_to_action(block_x, block_z))
	assert reward > 0.0
