"""Explicit causal graph over the world's variables, its motion mechanism and observation fields."""
from __future__ import annotations

from functools import lru_cache
from typing import Iterable, List, Mapping

import networkx as nx

from causalrep.scm.variables import VARIABLE_NAMES, resolve_variable_name

BLOCK_MOTION = "block_motion"
OBSERVATION_PREFIX = "obs."

_EDGES = (
	("block_mass", BLOCK_MOTION),
	("floor_friction", BLOCK_MOTION),
	("block_size", BLOCK_MOTION),
	("block_size", "obs.block_size"),
	("block_pose", "obs.block_pos"),
	("goal_pose", "obs.goal_pos"),
	("obs.effector_pos", BLOCK_MOTION),
	(BLOCK_MOTION, "obs.block_pos"),
)


@lru_cache(maxsize=1)
def causal_graph() -> nx.DiGraph:
	graph = nx.DiGraph()
	graph.add_nodes_from(VARIABLE_NAMES, kind="variable")
	graph.add_edges_from(_EDGES)
	for node in graph.nodes:
		if str(node).startswith(OBSERVATION_PREFIX):
			graph.nodes[node]["kind"] = "observation"
		elif node == BLOCK_MOTION:
			graph.nodes[node]["kind"] = "mechanism"
	if not nx.is_directed_acyclic_graph(graph):
		raise ValueError("Causal graph must be acyclic")
	return graph


def _is_observation(node: str) -> bool:
	return str(node).startswith(OBSERVATION_PREFIX)


def hidden_variables() -> List[str]:
	"""Variables that reach the observation only through a mechanism (the confounders)."""
	graph = causal_graph()
	return [
		name for name in VARIABLE_NAMES
		if not any(_is_observation(child) for child in graph.successors(name))
	]


def affected_observation_fields(intervention: Mapping[str, object] | Iterable[str]) -> List[str]:
	"""Observation fields downstream of the intervened variables."""
	graph = causal_graph()
	fields = set()
	for key in intervention:
		name = resolve_variable_name(key)
		fields.update(node for node in nx.descendants(graph, name) if _is_observation(node))
	return sorted(field[len(OBSERVATION_PREFIX):] for field in fields)
