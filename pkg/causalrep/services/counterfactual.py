"""Counterfactual data generation, training and representation extraction."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Mapping, Optional, Sequence

import numpy as np
import torch

from causalrep.models.cf_model import FEATURE_WIDTH, INTERVENTION_WIDTH, NUM_OBJECTS, STATE_WIDTH, CounterfactualModel
from causalrep.schemas import CFTrainingConfig
from causalrep.scm.interventions import Intervention, apply_intervention, normalize_intervention
from causalrep.scm.variables import VARIABLE_NAMES, CausalVariables, default_variables
from causalrep.services.policies import Policy
from causalrep.services.rep_store import CausalRep, InvalidRepresentationError, ShapeError
from causalrep.utils import derive_seed, read_json, write_json
from causalrep.world.world import OBS_LAYOUT, OBS_WIDTH, MiniCausalWorld

logger = logging.getLogger(__name__)

# Observation -> object tensor layout: (object row, feature column, observation slice name, offset).
_OBJECT_CELLS = (
	(0, 0, "effector_pos", 0), (0, 1, "effector_pos", 1),
	(0, 2, "effector_vel", 0), (0, 3, "effector_vel", 1),
	(0, 4, "grip", 0), (0, 5, "time_left", 0),
	(1, 0, "block_pos", 0), (1, 1, "block_pos", 1),
	(1, 4, "block_size", 0),
	(2, 0, "goal_pos", 0), (2, 1, "goal_pos", 1),
)
_ONE_HOT_OFFSET = 6

# Effector-to-block gap that ends the pre-snapshot warm-up.
NEAR_BLOCK_MARGIN = 0.035

# Scales mapping intervened values into roughly unit range.
_INTERVENTION_SCALES = {"block_mass": 2.0, "block_size": 0.2, "floor_friction": 1.0}
InterventionSampler = Callable[[int], Intervention]
VariablesSampler = Callable[[int], CausalVariables]


class EmptyBatchError(ValueError):
	"""Raised when a training or extraction call receives no samples."""


# =============================================================================
# Trajectories and Object Tensors
# =============================================================================

@dataclass(frozen=True, eq=False)
class Trajectory:
	"""Pre-action observations, the actions taken and the observation after the last action."""
	observations: np.ndarray
	actions: np.ndarray
	final_observation: np.ndarray

	def __post_init__(self) -> None:
		if self.observations.ndim != 2 or self.observations.shape[1] != OBS_WIDTH:
			raise ShapeError(f"Observations must be (T, {OBS_WIDTH}), got {self.observations.shape}")
		if self.actions.shape != (self.observations.shape[0], 3):
			raise ShapeError(f"Actions must be (T, 3) matching observations, got {self.actions.shape}")
		if self.final_observation.shape != (OBS_WIDTH,):
			raise ShapeError(f"Final observation must have width {OBS_WIDTH}")
		if not (np.all(np.isfinite(self.observations)) and np.all(np.isfinite(self.actions))):
			raise ShapeError("Trajectory contains non-finite entries")

	@property
	def length(self) -> int:
		return int(self.observations.shape[0])

	def next_observations(self) -> np.ndarray:
		return np.vstack([self.observations[1:], self.final_observation[None, :]])

	def tensor(self) -> np.ndarray:
		return convert_input_shape(self.observations)

	def next_tensor(self) -> np.ndarray:
		return convert_input_shape(self.next_observations())


@dataclass(frozen=True, eq=False)
class CFSample:
	observed: Trajectory
	intervention: Intervention
	counterfactual: Trajectory

	def __post_init__(self) -> None:
		if self.observed.length != self.counterfactual.length:
			raise ShapeError("Observed and counterfactual trajectories differ in length")
		if not np.array_equal(self.observed.actions, self.counterfactual.actions):
			raise ValueError("Counterfactual branch must replay the observed actions")


def convert_input_shape(observations: np.ndarray) -> np.ndarray:
	"""Re-lays (T, 11) observations as (T, 3, 9) object rows for effector, block and goal."""
	observations = np.asarray(observations, dtype=np.float64)
	if observations.ndim == 1:
		observations = observations[None, :]
	if observations.ndim != 2 or observations.shape[1] != OBS_WIDTH:
		raise ShapeError(f"Observations must have width {OBS_WIDTH}, got shape {observations.shape}")
	tensor = np.zeros((observations.shape[0], NUM_OBJECTS, FEATURE_WIDTH), dtype=np.float64)
	for row, column, name, offset in _OBJECT_CELLS:
		tensor[:, row, column] = observations[:, OBS_LAYOUT[name].start + offset]
	for row in range(NUM_OBJECTS):
		tensor[:, row, _ONE_HOT_OFFSET + row] = 1.0
	return tensor


def restore_observations(tensor: np.ndarray) -> np.ndarray:
	"""Inverse of convert_input_shape on the observation cells."""
	tensor = np.asarray(tensor, dtype=np.float64)
	if tensor.ndim != 3 or tensor.shape[1:] != (NUM_OBJECTS, FEATURE_WIDTH):
		raise ShapeError(f"Object tensor must be (T, {NUM_OBJECTS}, {FEATURE_WIDTH}), got {tensor.shape}")
	observations = np.zeros((tensor.shape[0], OBS_WIDTH), dtype=np.float64)
	for row, column, name, offset in _OBJECT_CELLS:
		observations[:, OBS_LAYOUT[name].start + offset] = tensor[:, row, column]
	return observations


def encode_intervention(intervention: Mapping[str, object]) -> np.ndarray:
	"""Presence flags for the five variables followed by seven scaled values."""
	resolved = normalize_intervention(intervention)
	encoding = np.zeros(INTERVENTION_WIDTH, dtype=np.float64)
	values: List[float] = []
	for index, name in enumerate(VARIABLE_NAMES):
		present = name in resolved
		encoding[index] = 1.0 if present else 0.0
		if name in ("block_pose", "goal_pose"):
			pose = resolved.get(name, (0.0, 0.0))
			values.extend([float(pose[0]), float(pose[1])])
		else:
			value = float(resolved.get(name, 0.0))
			values.append(value / _INTERVENTION_SCALES[name])
	encoding[len(VARIABLE_NAMES):] = values
	return encoding


# =============================================================================
# Data Generation
# =============================================================================

def _rollout(
		env: MiniCausalWorld,
		first_obs: np.ndarray,
		horizon: int,
		choose: Callable[[int, np.ndarray], np.ndarray],
) -> Trajectory:
	observations = [first_obs]
	taken = []
	for step in range(horizon):
		action = np.asarray(choose(step, observations[-1]), dtype=np.float64)
		obs, _, _, _ = env.step(action)
		taken.append(action)
		observations.append(obs)
	return Trajectory(np.array(observations[:-1]), np.array(taken), observations[-1])


def _gap_to_block(obs: np.ndarray) -> float:
	"""Distance from the effector to the nearest face of the block square (0 inside it)."""
	offset = np.abs(obs[OBS_LAYOUT["effector_pos"]] - obs[OBS_LAYOUT["block_pos"]])
	outside = np.maximum(offset - 0.5 * float(obs[OBS_LAYOUT["block_size"]][0]), 0.0)
	return float(np.hypot(outside[0], outside[1]))


def _warm_up(env: MiniCausalWorld, obs: np.ndarray, policy: Policy, max_steps: int, seed: int) -> np.ndarray:
	"""Steps the policy until the effector is next to the block or `max_steps` run out."""
	for step in range(max_steps):
		if _gap_to_block(obs) <= NEAR_BLOCK_MARGIN:
			break
		obs, _, _, _ = env.step(np.clip(policy(obs, derive_seed(seed, "warmup", step)), -1.0, 1.0))
	return obs


def generate_cf_batch(
		env: MiniCausalWorld,
		policy: Policy,
		intervention_sampler: InterventionSampler,
		horizon: int,
		count: int,
		seed: int,
		*,
		variables_sampler: Optional[VariablesSampler] = None,
		warmup: int = 0,
) -> List[CFSample]:
	"""
	Rolls the policy for `horizon` steps, then replays the same actions from the same snapshot
	under the sampled intervention.

	With `warmup` > 0 the policy first runs (at most that many steps, never past the point where
	`horizon` steps would no longer fit in the episode) until the effector reaches the block, so
	the observed window covers contact instead of the approach from home.
	"""
	samples: List[CFSample] = []
	for index in range(count):
		sample_seed = derive_seed(seed, "cf_sample", index)
		if variables_sampler is not None:
			variables = variables_sampler(derive_seed(sample_seed, "variables"))
		else:
			variables = default_variables(env.task.task_id)
		first_obs = env.reset(variables, seed=sample_seed)
		if warmup > 0:
			budget = min(warmup, max(0, env.task.episode_length - horizon))
			first_obs = _warm_up(env, first_obs, policy, budget, sample_seed)
		snapshot = env.snapshot()

		observed = _rollout(
			env,
			first_obs,
			horizon,
			lambda step, obs: np.clip(policy(obs, derive_seed(sample_seed, "action", step)), -1.0, 1.0),
		)

		intervention = normalize_intervention(intervention_sampler(derive_seed(sample_seed, "intervention")))
		cf_obs = env.restore(snapshot, apply_intervention(snapshot.variables, intervention))
		counterfactual = _rollout(env, cf_obs, horizon, lambda step, _obs: observed.actions[step])
		samples.append(CFSample(observed, intervention, counterfactual))
	logger.debug("Generated %d counterfactual samples (horizon=%d)", count, horizon)
	return samples


# =============================================================================
# Learner
# =============================================================================

@dataclass
class _Batch:
	observed: torch.Tensor
	actions: torch.Tensor
	initial: torch.Tensor
	targets: torch.Tensor
	interventions: torch.Tensor


def _as_tensor(array: np.ndarray, dtype: torch.dtype) -> torch.Tensor:
	return torch.as_tensor(np.ascontiguousarray(array), dtype=dtype)


@dataclass
class CounterfactualLearner:
	"""Owns the counterfactual model, its optimizer and the training-step counter."""
	model: CounterfactualModel
	optimizer: torch.optim.Optimizer
	training_steps: int = 0
	dtype: torch.dtype = field(default=torch.float32)

	@classmethod
	def create(cls, config: CFTrainingConfig, seed: int, *, dtype: torch.dtype = torch.float32) -> "CounterfactualLearner":
		with torch.random.fork_rng(devices=[]):
			torch.manual_seed(derive_seed(seed, "cf_model"))
			model = CounterfactualModel(rep_width=config.rep_width, hidden_size=config.hidden_size)
		model = model.to(dtype)
		optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
		logger.info("Initialized counterfactual model (rep_width=%d, hidden=%d)", config.rep_width, config.hidden_size)
		return cls(model=model, optimizer=optimizer, dtype=dtype)

	@property
	def rep_width(self) -> int:
		return self.model.rep_width

	def collate(self, samples: Sequence[CFSample]) -> _Batch:
		if not samples:
			raise EmptyBatchError("Counterfactual batch is empty")
		lengths = {sample.observed.length for sample in samples}
		if len(lengths) != 1:
			raise ShapeError(f"Counterfactual batch mixes trajectory lengths {sorted(lengths)}")
		dtype = self.dtype
		return _Batch(
			observed=_as_tensor(np.stack([s.observed.tensor() for s in samples]), dtype),
			actions=_as_tensor(np.stack([s.observed.actions for s in samples]), dtype),
			initial=_as_tensor(np.stack([s.counterfactual.tensor()[0] for s in samples]), dtype),
			targets=_as_tensor(np.stack([s.counterfactual.next_tensor() for s in samples]), dtype),
			interventions=_as_tensor(np.stack([encode_intervention(s.intervention) for s in samples]), dtype),
		)

	def batch_loss(self, batch: _Batch, *, zero_rep: bool = False) -> torch.Tensor:
		confounders = self.model.estimate_confounders(batch.observed, batch.actions)
		if zero_rep:
			confounders = torch.zeros_like(confounders)
		predicted = self.model.predict_counterfactual(confounders, batch.initial, batch.actions, batch.interventions)
		return torch.mean((predicted[..., :STATE_WIDTH] - batch.targets[..., :STATE_WIDTH]) ** 2)

	def training_step(self, samples: Sequence[CFSample]) -> float:
		"""One Adam update on the mean squared counterfactual state error."""
		batch = self.collate(samples)
		self.model.train()
		self.optimizer.zero_grad(set_to_none=True)
		loss = self.batch_loss(batch)
		loss.backward()
		self.optimizer.step()
		self.training_steps += 1
		return float(loss.detach())

	def estimate_confounders(self, objects: np.ndarray, actions: np.ndarray) -> np.ndarray:
		"""U for one (T, K, F) tensor or a (B, T, K, F) stack."""
		objects = np.asarray(objects)
		single = objects.ndim == 3
		if single:
			objects, actions = objects[None], np.asarray(actions)[None]
		if objects.shape[-2:] != (NUM_OBJECTS, FEATURE_WIDTH) or np.asarray(actions).shape[:2] != objects.shape[:2]:
			raise ShapeError(f"Inconsistent object tensor {objects.shape} and actions {np.asarray(actions).shape}")
		self.model.eval()
		with torch.no_grad():
			values = self.model.estimate_confounders(_as_tensor(objects, self.dtype), _as_tensor(actions, self.dtype))
		values = values.cpu().numpy().astype(np.float64)
		return values[0] if single else values

	def predict_counterfactual(
			self,
			confounders: np.ndarray,
			initial_state: np.ndarray,
			actions: np.ndarray,
			intervention: Mapping[str, object],
	) -> np.ndarray:
		"""Autoregressive (T, K, F) prediction for one intervened initial state."""
		confounders = np.asarray(confounders, dtype=np.float64)
		if not np.all(np.isfinite(confounders)):
			raise InvalidRepresentationError("Confounder vector contains non-finite values")
		if confounders.shape != (self.rep_width,):
			raise ShapeError(f"Confounder vector must have width {self.rep_width}, got {confounders.shape}")
		actions = np.asarray(actions, dtype=np.float64)
		if actions.ndim != 2 or actions.shape[0] < 1:
			raise ShapeError("Counterfactual rollout needs at least one action")
		self.model.eval()
		with torch.no_grad():
			predicted = self.model.predict_counterfactual(
				_as_tensor(confounders[None], self.dtype),
				_as_tensor(np.asarray(initial_state)[None], self.dtype),
				_as_tensor(actions[None], self.dtype),
				_as_tensor(encode_intervention(intervention)[None], self.dtype),
			)
		return predicted[0].cpu().numpy().astype(np.float64)

	def extract_causal_rep(self, batches: Sequence[Sequence[CFSample]], previous: Optional[CausalRep] = None) -> CausalRep:
		"""Mean U over every sample of the given batches; version follows the previous rep."""
		samples = [sample for batch in batches for sample in batch]
		if not samples:
			raise EmptyBatchError("No samples to extract a causal representation from")
		estimates = [self.estimate_confounders(s.observed.tensor(), s.observed.actions) for s in samples]
		version = 0 if previous is None else previous.version + 1
		return CausalRep(np.mean(np.stack(estimates), axis=0), version)

	def counterfactual_mse(self, samples: Sequence[CFSample], *, zero_rep: bool = False) -> float:
		"""Held-out counterfactual state error, optionally with U zeroed."""
		batch = self.collate(samples)
		self.model.eval()
		with torch.no_grad():
			return float(self.batch_loss(batch, zero_rep=zero_rep))


# =============================================================================
# Persistence
# =============================================================================

MODEL_ARCHIVE = "cf_model.pt"
MODEL_MANIFEST = "cf_model.json"


def save_cf_model(learner: CounterfactualLearner, directory: str | Path) -> Path:
	target = Path(directory)
	target.mkdir(parents=True, exist_ok=True)
	torch.save(
		{"model": learner.model.state_dict(), "optimizer": learner.optimizer.state_dict()},
		target / MODEL_ARCHIVE,
	)
	manifest = dict(learner.model.manifest())
	manifest.update({"training_steps": learner.training_steps, "format_version": 1})
	write_json(target / MODEL_MANIFEST, manifest)
	return target


def load_cf_model(directory: str | Path, config: CFTrainingConfig) -> CounterfactualLearner:
	source = Path(directory)
	manifest = read_json(source / MODEL_MANIFEST)
	if int(manifest["rep_width"]) != config.rep_width:
		raise ShapeError(f"Stored model has rep width {manifest['rep_width']}, config expects {config.rep_width}")
	model = CounterfactualModel(rep_width=int(manifest["rep_width"]), hidden_size=int(manifest["hidden_size"]))
	optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
	archive = torch.load(source / MODEL_ARCHIVE, map_location="cpu", weights_only=True)
	model.load_state_dict(archive["model"])
	optimizer.load_state_dict(archive["optimizer"])
	return CounterfactualLearner(model=model, optimizer=optimizer, training_steps=int(manifest["training_steps"]))
