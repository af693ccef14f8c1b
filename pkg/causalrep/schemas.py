# causalrep/schemas.py
from typing import List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

TaskId = Literal["pushing", "picking"]
Variant = Literal[
	"no_intervene",
	"intervene",
	"counterfactual_intervene",
	"causalcf_iter",
	"transfer_rep_intervene",
]
SpaceId = Literal["A", "B"]

# Variants whose agent consumes a causal representation.
REP_VARIANTS = {"counterfactual_intervene", "causalcf_iter", "transfer_rep_intervene"}


class FrozenModel(BaseModel):
	model_config = ConfigDict(frozen=True, extra="forbid")


class TaskSpec(FrozenModel):
	task_id: TaskId = "pushing"
	w_reach: float = Field(default=750.0, ge=0.0)
	w_goal: float = Field(default=250.0, ge=0.0)
	w_fs: float = Field(default=100.0, ge=0.0)
	episode_length: int = Field(default=250, gt=0)
	skipframe: int = Field(default=3, ge=1)

	@model_validator(mode="after")
	def _reach_weight_is_largest(self) -> "TaskSpec":
		if self.w_reach < max(self.w_goal, self.w_fs):
			raise ValueError("w_reach must be the largest reward weight")
		return self


class PhysicsParams(FrozenModel):
	dt: float = Field(default=0.004, gt=0.0)
	v_max: float = Field(default=1.0, gt=0.0)
	contact_stiffness: float = Field(default=1000.0, gt=0.0)
	contact_damping: float = Field(default=10.0, ge=0.0)
	f_max: float = Field(default=30.0, gt=0.0)
	gravity: float = Field(default=9.81, gt=0.0)


class SACConfig(FrozenModel):
	gamma: float = Field(default=0.95, gt=0.0, lt=1.0)
	tau: float = Field(default=1e-3, gt=0.0, le=1.0)
	ent_coef: float = Field(default=1e-3, ge=0.0)
	# Kept for config parity; the fixed ent_coef makes it inert.
	target_entropy: str = "auto"
	learning_rate: float = Field(default=1e-4, gt=0.0)
	buffer_size: int = Field(default=1_000_000, gt=0)
	learning_starts: int = Field(default=1000, ge=0)
	batch_size: int = Field(default=256, gt=0)
	hidden_sizes: Tuple[int, ...] = (64, 64)


class CFTrainingConfig(FrozenModel):
	epochs: int = Field(default=15, gt=0)
	iterations: int = Field(default=40, gt=0)
	horizon: int = Field(default=30, gt=0)
	rep_width: int = Field(default=32, gt=0)
	hidden_size: int = Field(default=64, gt=0)
	learning_rate: float = Field(default=1e-4, gt=0.0)
	replay_pool: int = Field(default=8, ge=0)
	rollout_noise: float = Field(default=0.1, ge=0.0)
	warmup_steps: int = Field(default=60, ge=0)


class RunConfig(FrozenModel):
	task: TaskSpec = TaskSpec()
	variant: Variant = "intervene"
	total_steps: int = Field(default=140_000, gt=0)
	iter_start: int = Field(default=30_000, ge=0)
	iter_every: int = Field(default=10_000, gt=0)
	checkpoint_every: int = Field(default=10_000, gt=0)
	cf: CFTrainingConfig = CFTrainingConfig()
	sac: SACConfig = SACConfig(buffer_size=200_000)
	physics: PhysicsParams = PhysicsParams()
	cf_bootstrap: Literal["scripted", "initialized"] = "scripted"
	seed: int = 0
	output_dir: Optional[str] = None
	space: Literal["A"] = "A"
	eval_episodes: int = Field(default=20, gt=0)

	@property
	def uses_rep(self) -> bool:
		return self.variant in REP_VARIANTS


class ProtocolScore(BaseModel):
	id: str
	space: SpaceId
	variables: List[str]
	n: int = Field(ge=1)
	mean: float = Field(ge=0.0, le=1.0)
	std: float = Field(ge=0.0)


class RunMetadata(BaseModel):
	variant: Optional[str] = None
	task: Optional[TaskId] = None
	seed: Optional[int] = None
	checkpoint_step: Optional[int] = None


class EvalReport(BaseModel):
	run: RunMetadata
	protocols: List[ProtocolScore]

	def scores_by_id(self) -> dict:
		return {score.id: score for score in self.protocols}


class TrainingCurve(BaseModel):
	"""Per-episode fractional success plus non-overlapping window means."""
	window: int = 100
	per_episode: List[float]
	env_steps: List[int]
	smoothed: List[float]
	smoothed_steps: List[int]
	partial: Optional[float] = None
