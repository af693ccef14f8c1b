"""Counterfactual phase: epochs x iterations of generate-one-sample, train-one-step."""
from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, List, Optional

from causalrep.progress import progress_bar
from causalrep.schemas import RunConfig
from causalrep.scm.interventions import Intervention, apply_intervention, sample_space
from causalrep.scm.variables import CausalVariables, default_variables
from causalrep.services.counterfactual import CFSample, CounterfactualLearner, generate_cf_batch
from causalrep.services.policies import Policy
from causalrep.services.rep_store import CausalRep
from causalrep.utils import derive_seed
from causalrep.world.world import MiniCausalWorld

logger = logging.getLogger(__name__)

# Hidden confounders the factual worlds vary over; the agent never observes them.
FACTUAL_VARIABLES = ("bm", "ff")


@dataclass
class CounterfactualPhaseResult:
	learner: CounterfactualLearner
	rep: CausalRep
	losses: List[float] = field(default_factory=list)
	final_epoch_batches: List[List[CFSample]] = field(default_factory=list)


def epoch_intervention(epoch: int, seed: int, task_id: str) -> Intervention:
	"""Goal plus mass on even epochs, goal plus friction on odd ones, sampled in space A."""
	variables = ("gp", "bm") if epoch % 2 == 0 else ("gp", "ff")
	return sample_space("A", variables, seed, task_id=task_id)


def factual_variables(seed: int, task_id: str) -> CausalVariables:
	return apply_intervention(default_variables(task_id), sample_space("A", FACTUAL_VARIABLES, seed, task_id=task_id))


def train_counterfactual_phase(
		config: RunConfig,
		policy: Policy,
		*,
		learner: Optional[CounterfactualLearner] = None,
		previous_rep: Optional[CausalRep] = None,
		round_index: int = 0,
) -> CounterfactualPhaseResult:
	"""
	Trains the counterfactual model and extracts the representation from the final epoch.

	`round_index` keys every random draw, so each refresh sees fresh data.
	"""
	cf = config.cf
	task_id = config.task.task_id
	env = MiniCausalWorld(config.task, config.physics)
	learner = learner or CounterfactualLearner.create(cf, config.seed)
	pool: Deque[CFSample] = deque(maxlen=cf.replay_pool)
	result_losses: List[float] = []
	final_batches: List[List[CFSample]] = []

	for epoch in progress_bar(range(cf.epochs), desc=f"cf round {round_index}", unit="epoch"):
		intervention = epoch_intervention(epoch, derive_seed(config.seed, "cf", round_index, "epoch", epoch), task_id)
		epoch_losses = []
		for iteration in range(cf.iterations):
			sample = generate_cf_batch(
				env,
				policy,
				lambda _seed: intervention,
				cf.horizon,
				1,
				derive_seed(config.seed, "cf", round_index, epoch, iteration),
				variables_sampler=lambda seed: factual_variables(seed, task_id),
				warmup=cf.warmup_steps,
			)[0]
			batch = [sample, *pool]
			epoch_losses.append(learner.training_step(batch))
			pool.appendleft(sample)
			if epoch == cf.epochs - 1:
				final_batches.append(batch)
		result_losses.extend(epoch_losses)
		logger.info(
			"Counterfactual round %d epoch %d/%d: mean loss %.6f",
			round_index,
			epoch + 1,
			cf.epochs,
			math.fsum(epoch_losses) / len(epoch_losses),
		)

	rep = learner.extract_causal_rep(final_batches, previous_rep)
	logger.info("Extracted causal representation v%d (width=%d)", rep.version, rep.width)
	return CounterfactualPhaseResult(learner=learner, rep=rep, losses=result_losses, final_epoch_batches=final_batches)
