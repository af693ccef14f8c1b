"""Protocol evaluation: per-episode integrated fractional success under sampled interventions."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from causalrep.config import get_settings
from causalrep.progress import progress_bar
from causalrep.schemas import EvalReport, PhysicsParams, ProtocolScore, RunMetadata, TaskSpec
from causalrep.scm.graph import affected_observation_fields
from causalrep.scm.interventions import apply_intervention, describe_intervention, intervention_in_space, sample_space
from causalrep.scm.protocols import PROTOCOL_IDS, protocol_spec
from causalrep.scm.variables import CausalVariables, default_variables
from causalrep.services.policies import Policy
from causalrep.utils import derive_seed
from causalrep.world.world import MiniCausalWorld

logger = logging.getLogger(__name__)

DEFAULT_EPISODES_PER_PROTOCOL = 20


class EmptyEpisodeError(ValueError):
	"""Raised when an episode produced no per-step scores."""


def integrated_fractional_success(episode_fs: Sequence[float]) -> float:
	"""Time-mean of the per-step fractional success."""
	values = [float(value) for value in episode_fs]
	if not values:
		raise EmptyEpisodeError("Cannot integrate an empty episode")
	return math.fsum(values) / len(values)


def run_episode(
		policy: Policy,
		variables: CausalVariables,
		seed: int,
		*,
		task: Optional[TaskSpec] = None,
		physics: Optional[PhysicsParams] = None,
) -> float:
	"""Runs one full episode on a fresh environment and returns its integrated score."""
	env = MiniCausalWorld(task, physics)
	obs = env.reset(variables, seed=seed)
	scores: List[float] = []
	done = False
	while not done:
		action = policy(obs, derive_seed(seed, "step", env.state.time_step))
		obs, _, done, info = env.step(action)
		scores.append(info["fractional_success"])
	return integrated_fractional_success(scores)


def run_protocol(
		policy: Policy,
		protocol_id: str,
		n_episodes: int,
		seed: int,
		*,
		task: Optional[TaskSpec] = None,
		physics: Optional[PhysicsParams] = None,
		base_variables: Optional[CausalVariables] = None,
		workers: Optional[int] = None,
) -> List[float]:
	"""
	Scores `n_episodes` episodes of one protocol, in episode-index order.

	Each episode draws its intervention from the protocol's space with a seed derived from
	(seed, protocol id, episode index), so results do not depend on worker count.
	"""
	protocol = protocol_spec(protocol_id)
	task = task or TaskSpec()
	base = base_variables or default_variables(task.task_id)
	codes = protocol.variable_codes

	def _score(index: int) -> float:
		episode_seed = derive_seed(seed, protocol_id, index)
		intervention = sample_space(protocol.space, codes, episode_seed, task_id=task.task_id)
		if not intervention_in_space(intervention, protocol.space, task_id=task.task_id):
			raise AssertionError(f"{protocol_id} drew {describe_intervention(intervention)} outside space {protocol.space}")
		logger.debug(
			"%s episode %d: %s (affects %s)",
			protocol_id,
			index,
			describe_intervention(intervention),
			",".join(affected_observation_fields(intervention)) or "nothing observed",
		)
		return run_episode(policy, apply_intervention(base, intervention), episode_seed, task=task, physics=physics)

	workers = workers if workers is not None else get_settings().EVAL_WORKERS
	indices = range(n_episodes)
	if workers > 1:
		with ThreadPoolExecutor(max_workers=workers) as executor:
			return list(executor.map(_score, indices))
	return [_score(index) for index in indices]


def _population_std(values: Sequence[float], mean: float) -> float:
	return math.sqrt(math.fsum((value - mean) ** 2 for value in values) / len(values))


def score_protocol(protocol_id: str, scores: Sequence[float]) -> ProtocolScore:
	protocol = protocol_spec(protocol_id)
	mean = math.fsum(scores) / len(scores)
	return ProtocolScore(
		id=protocol_id,
		space=protocol.space,
		variables=protocol.variable_codes,
		n=len(scores),
		mean=mean,
		std=_population_std(scores, mean),
	)


def run_pipeline(
		policy: Policy,
		n_episodes_per_protocol: int = DEFAULT_EPISODES_PER_PROTOCOL,
		seed: int = 0,
		*,
		protocols: Sequence[str] = PROTOCOL_IDS,
		task: Optional[TaskSpec] = None,
		physics: Optional[PhysicsParams] = None,
		base_variables: Optional[CausalVariables] = None,
		metadata: Optional[RunMetadata] = None,
		workers: Optional[int] = None,
) -> EvalReport:
	"""Runs every selected protocol and aggregates mean and population std per protocol."""
	task = task or TaskSpec()
	results: List[ProtocolScore] = []
	for protocol_id in progress_bar(list(protocols), desc="protocols", unit="protocol"):
		scores = run_protocol(
			policy,
			protocol_id,
			n_episodes_per_protocol,
			seed,
			task=task,
			physics=physics,
			base_variables=base_variables,
			workers=workers,
		)
		score = score_protocol(protocol_id, scores)
		logger.info("%s (space %s): mean=%.4f std=%.4f over %d episodes", score.id, score.space, score.mean, score.std, score.n)
		results.append(score)
	run = metadata or RunMetadata(task=task.task_id, seed=seed)
	return EvalReport(run=run, protocols=results)
