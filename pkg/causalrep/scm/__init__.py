from causalrep.scm.graph import affected_observation_fields, causal_graph, hidden_variables
from causalrep.scm.interventions import (
	Intervention,
	InvalidInterventionError,
	apply_intervention,
	describe_intervention,
	in_space,
	intervention_in_space,
	normalize_intervention,
	sample_space,
)
from causalrep.scm.protocols import (
	PROTOCOL_IDS,
	UnknownProtocolError,
	list_protocols,
	parse_protocol_selection,
	protocol_spec,
)
from causalrep.scm.tables import Interval, Protocol, get_scm_tables, tables_to_dict
from causalrep.scm.variables import (
	SHORT_CODES,
	VARIABLE_NAMES,
	WORKSPACE_X,
	WORKSPACE_Z,
	CausalVariables,
	InvalidVariablesError,
	UnknownVariableError,
	default_variables,
	resolve_variable_name,
	validate_variables,
)
