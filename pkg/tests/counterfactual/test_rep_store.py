import json

import numpy as np
import pytest

from causalrep.services.rep_store import (
	CausalRep,
	InvalidRepresentationError,
	ShapeError,
	latest_rep_path,
	load_rep,
	save_rep,
	zero_rep,
)


def test_rep_round_trips_through_json(tmp_path):
	rep = CausalRep(np.linspace(-1.0, 1.0, 32), version=3)
	path = save_rep(rep, tmp_path)
	assert path.name == "rep_v3.json"
	payload = json.loads(path.read_text())
	assert payload["width"] == 32
	assert payload["version"] == 3
	loaded = load_rep(path, expected_width=32)
	np.testing.assert_array_equal(loaded.values, rep.values)
	assert loaded.version == 3


def test_load_rep_checks_expected_width(tmp_path):
	path = save_rep(zero_rep(16), tmp_path)
	with pytest.raises(ShapeError):
		load_rep(path, expected_width=32)


def test_load_rep_rejects_inconsistent_width(tmp_path):
	path = tmp_path / "rep_v0.json"
	path.write_text(json.dumps({"width": 4, "version": 0, "values": [0.0, 1.0]}))
	with pytest.raises(ShapeError):
		load_rep(path)


def test_rep_rejects_non_finite_values():
	with pytest.raises(InvalidRepresentationError):
		CausalRep(np.array([0.0, np.nan]))


def test_rep_values_are_read_only():
	rep = zero_rep(4)
	with pytest.raises(ValueError):
		rep.values[0] = 1.0


def test_latest_rep_path_orders_versions_numerically(tmp_path):
	assert latest_rep_path(tmp_path) is None
	for version in (0, 2, 9, 10):
		save_rep(zero_rep(4, version), tmp_path)
	(tmp_path / "rep_vx.json").write_text("{}")
	assert latest_rep_path(tmp_path).name == "rep_v10.json"
