from causalrep.pipelines.run_config import ConfigurationError, load_run_config
from causalrep.pipelines.runs import (
	RunResult,
	TransferError,
	resume_run,
	run_iteration_training,
	train_run,
	transfer_rep,
)
