from __future__ import annotations

from typing import List

from causalrep.scm.tables import Protocol, get_scm_tables

PROTOCOL_IDS = tuple(f"P{i}" for i in range(12))


class UnknownProtocolError(ValueError):
	"""Raised when a protocol id is not one of P0..P11."""


def protocol_spec(protocol_id: str) -> Protocol:
	"""Returns the (space, variables) row of the evaluation protocol table."""
	protocols = get_scm_tables().protocols
	if protocol_id not in protocols:
		raise UnknownProtocolError(f"Unknown protocol '{protocol_id}'")
	return protocols[protocol_id]


def list_protocols() -> List[Protocol]:
	return [protocol_spec(protocol_id) for protocol_id in PROTOCOL_IDS]


def parse_protocol_selection(raw: str) -> List[str]:
	"""Parses a CLI selection such as 'all', 'P3' or 'P0,P4,P9'."""
	if raw.strip().lower() == "all":
		return list(PROTOCOL_IDS)
	selected = [token.strip() for token in raw.split(",") if token.strip()]
	for protocol_id in selected:
		protocol_spec(protocol_id)
	return selected
