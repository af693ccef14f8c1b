from causalrep.world.geometry import InvalidGeometryError, fractional_success
from causalrep.world.world import (
	ACTION_WIDTH,
	HOME_POSITION,
	OBS_LAYOUT,
	OBS_WIDTH,
	EpisodeFinishedError,
	IncompatibleStateError,
	InvalidActionError,
	InvalidVariablesError,
	MiniCausalWorld,
	WorldState,
	action_to_command,
	position_to_action,
)
