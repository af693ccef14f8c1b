import pytest

from causalrep.schemas import EvalReport, ProtocolScore, RunMetadata
from causalrep.services.curves import EpisodeRecord, smooth_curve
from causalrep.services.report import (
	VariantGroup,
	average_reports,
	compare_reports,
	emit_plots,
	emit_report,
	group_reports,
	load_report,
	space_means,
	trend_checks,
)


def _report(means, variant):
	spaces = ["A", "B", "A"]
	return EvalReport(
		run=RunMetadata(variant=variant, task="pushing", seed=0, checkpoint_step=600),
		protocols=[
			ProtocolScore(id=f"P{index}", space=spaces[index], variables=[], n=2, mean=mean, std=0.1)
			for index, mean in enumerate(means)
		],
	)


def test_report_round_trips_through_json(tmp_path):
	report = _report([0.2, 0.4, 0.6], "causalcf_iter")
	path = emit_report(report, tmp_path / "report.json")
	assert load_report(path) == report


def test_compare_counts_protocols_at_least_as_good():
	better = _report([0.5, 0.4, 0.1], "causalcf_iter")
	baseline = _report([0.3, 0.4, 0.2], "intervene")
	comparison = compare_reports(better, baseline)
	assert comparison["protocols"] == 3
	assert comparison["a_at_least_b"] == 2
	assert comparison["protocols_a_at_least_b"] == ["P0", "P1"]
	assert comparison["space_means_a"] == pytest.approx({"A": 0.3, "B": 0.4})


def test_space_means_group_by_space():
	means = space_means(_report([0.2, 0.9, 0.4], "intervene"))
	assert list(means) == ["A", "B"]
	assert means["A"] == pytest.approx(0.3)
	assert means["B"] == 0.9


def test_plots_are_written(tmp_path):
	records = [EpisodeRecord(i, (i + 1) * 50, 0.5, 0.0, -1) for i in range(120)]
	written = emit_plots(
		{"intervene": smooth_curve(records)},
		{"intervene": _report([0.2, 0.4, 0.6], "intervene"), "iter": _report([0.3, 0.1, 0.6], "causalcf_iter")},
		tmp_path / "plots",
	)
	assert written["curves"].exists()
	assert written["scores"].exists()
	assert written["curves"].name == "training_curves.png"


def test_plots_skip_missing_inputs(tmp_path):
	written = emit_plots({}, {}, tmp_path)
	assert written == {"curves": None, "scores": None}


def test_average_reports_takes_seed_means_and_spread():
	averaged = average_reports([_report([0.2, 0.4, 0.6], "intervene"), _report([0.4, 0.4, 0.2], "intervene")])
	scores = averaged.scores_by_id()
	assert scores["P0"].mean == pytest.approx(0.3)
	assert scores["P0"].std == pytest.approx(0.1)
	assert scores["P1"].std == 0.0
	assert scores["P2"].n == 4
	assert averaged.run.variant == "intervene"
	assert averaged.run.seed is None


def test_average_reports_rejects_empty_input():
	with pytest.raises(ValueError):
		average_reports([])


def test_group_reports_keys_by_task_and_variant():
	reports = {
		"iter_s0": _report([0.6, 0.6, 0.6], "causalcf_iter"),
		"iter_s1": _report([0.2, 0.2, 0.2], "causalcf_iter"),
		"base_s0": _report([0.3, 0.3, 0.3], "intervene"),
	}
	metadata = {
		"iter_s0": RunMetadata(variant="causalcf_iter", task="pushing", seed=0),
		"iter_s1": RunMetadata(variant="causalcf_iter", task="pushing", seed=1),
		"base_s0": RunMetadata(variant="intervene", task="pushing", seed=0),
	}
	groups = group_reports(reports, metadata)
	assert list(groups) == ["pushing/causalcf_iter", "pushing/intervene"]
	iteration = groups["pushing/causalcf_iter"]
	assert iteration.runs == ["iter_s0", "iter_s1"]
	assert iteration.seeds == [0, 1]
	assert iteration.mean == pytest.approx(0.4)
	assert iteration.to_dict()["space_means"] == pytest.approx({"A": 0.4, "B": 0.4})


def _group(task, variant, mean):
	return VariantGroup(task, variant, [variant], [0], average_reports([_report([mean] * 3, variant)]))


def test_trend_checks_compare_seed_averages():
	groups = {
		group.key: group
		for group in (
			_group("pushing", "causalcf_iter", 0.5),
			_group("pushing", "intervene", 0.5),
			_group("picking", "transfer_rep_intervene", 0.2),
			_group("picking", "intervene", 0.3),
		)
	}
	checks = trend_checks(groups, {"pushing/no_intervene": 0.9, "pushing/intervene": 0.8})
	assert checks == {
		"no_intervene_trains_above_intervene": True,
		"causalcf_iter_scores_at_least_intervene": True,
		"transfer_scores_at_least_intervene": False,
	}


def test_trend_checks_are_undecided_without_both_sides():
	checks = trend_checks({"pushing/intervene": _group("pushing", "intervene", 0.5)}, {})
	assert set(checks.values()) == {None}
