import pytest

from causalrep.scm.protocols import (
	PROTOCOL_IDS,
	UnknownProtocolError,
	list_protocols,
	parse_protocol_selection,
	protocol_spec,
)
from causalrep.scm.tables import tables_to_dict, get_scm_tables

ALL = {"bp", "bm", "bs", "gp", "ff"}

GOLDEN_TABLE = {
	"P0": ("A", set()),
	"P1": ("A", {"bm"}),
	"P2": ("B", {"bm"}),
	"P3": ("A", {"bs"}),
	"P4": ("A", {"bp"}),
	"P5": ("A", {"gp"}),
	"P6": ("B", {"bp", "gp"}),
	"P7": ("A", {"bp", "gp", "bm"}),
	"P8": ("B", {"bp", "gp", "bm"}),
	"P9": ("B", {"bp", "gp", "bm", "ff"}),
	"P10": ("A", ALL),
	"P11": ("B", ALL),
}


@pytest.mark.parametrize("protocol_id", sorted(GOLDEN_TABLE))
def test_protocol_table_matches_golden_rows(protocol_id):
	protocol = protocol_spec(protocol_id)
	space, variables = GOLDEN_TABLE[protocol_id]
	assert protocol.space == space
	assert set(protocol.variables) == variables


def test_protocol_ids_cover_all_twelve_rows():
	assert list(PROTOCOL_IDS) == [f"P{i}" for i in range(12)]
	assert [protocol.id for protocol in list_protocols()] == list(PROTOCOL_IDS)


@pytest.mark.parametrize("protocol_id", ["P12", "P13", "p1", ""])
def test_unknown_protocol_raises(protocol_id):
	with pytest.raises(UnknownProtocolError):
		protocol_spec(protocol_id)


def test_parse_protocol_selection():
	assert parse_protocol_selection("all") == list(PROTOCOL_IDS)
	assert parse_protocol_selection("P0, P4,P9") == ["P0", "P4", "P9"]
	with pytest.raises(UnknownProtocolError):
		parse_protocol_selection("P0,P42")


def test_tables_serialise_with_every_protocol():
	payload = tables_to_dict(get_scm_tables())
	rows = {row["id"]: (row["space"], set(row["variables"])) for row in payload["protocols"]}
	assert rows == GOLDEN_TABLE
	assert payload["spaces"]["block_mass"]["B"]["low_open"] is True
