"""report.json emission, report comparison, seed aggregation and the two summary plots."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from causalrep.schemas import EvalReport, ProtocolScore, RunMetadata, TrainingCurve  # noqa: E402
from causalrep.utils import read_json, write_json  # noqa: E402

logger = logging.getLogger(__name__)

CURVES_PLOT = "training_curves.png"
SCORES_PLOT = "protocol_scores.png"


def emit_report(report: EvalReport, path: str | Path) -> Path:
	target = write_json(path, report.model_dump(mode="json"))
	logger.info("Wrote evaluation report with %d protocols to %s", len(report.protocols), target)
	return target


def load_report(path: str | Path) -> EvalReport:
	return EvalReport.model_validate(read_json(path))


def space_means(report: EvalReport) -> Dict[str, float]:
	grouped: Dict[str, list] = {}
	for score in report.protocols:
		grouped.setdefault(score.space, []).append(score.mean)
	return {space: math.fsum(values) / len(values) for space, values in sorted(grouped.items())}


def compare_reports(a: EvalReport, b: EvalReport) -> dict:
	"""Counts shared protocols where `a` scores at least as well as `b`."""
	a_scores, b_scores = a.scores_by_id(), b.scores_by_id()
	shared = [pid for pid in a_scores if pid in b_scores]
	wins = [pid for pid in shared if a_scores[pid].mean >= b_scores[pid].mean]
	return {
		"protocols": len(shared),
		"a_at_least_b": len(wins),
		"protocols_a_at_least_b": wins,
		"mean_a": math.fsum(a_scores[pid].mean for pid in shared) / len(shared) if shared else None,
		"mean_b": math.fsum(b_scores[pid].mean for pid in shared) / len(shared) if shared else None,
		"space_means_a": space_means(a),
		"space_means_b": space_means(b),
	}


def emit_plots(
		curves: Mapping[str, TrainingCurve],
		reports: Mapping[str, EvalReport],
		out_dir: str | Path,
) -> Dict[str, Optional[Path]]:
	"""Overlay of smoothed training curves and grouped per-protocol bars, one series per run."""
	target = Path(out_dir)
	target.mkdir(parents=True, exist_ok=True)
	written: Dict[str, Optional[Path]] = {"curves": None, "scores": None}

	if curves:
		fig, ax = plt.subplots(figsize=(8, 4.5))
		for label, curve in curves.items():
			if curve.smoothed:
				ax.plot(curve.smoothed_steps, curve.smoothed, marker="o", label=label)
			else:
				ax.plot(curve.env_steps, curve.per_episode, alpha=0.6, label=f"{label} (per episode)")
		ax.set_xlabel("environment steps")
		ax.set_ylabel(f"fractional success (mean per {next(iter(curves.values())).window} episodes)")
		ax.set_ylim(0.0, 1.0)
		ax.legend()
		fig.savefig(target / CURVES_PLOT, dpi=150, bbox_inches="tight")
		plt.close(fig)
		written["curves"] = target / CURVES_PLOT

	if reports:
		protocol_ids = list(next(iter(reports.values())).scores_by_id().keys())
		positions = np.arange(len(protocol_ids))
		width = 0.8 / len(reports)
		fig, ax = plt.subplots(figsize=(10, 4.5))
		for offset, (label, report) in enumerate(reports.items()):
			scores = report.scores_by_id()
			means = [scores[pid].mean if pid in scores else 0.0 for pid in protocol_ids]
			stds = [scores[pid].std if pid in scores else 0.0 for pid in protocol_ids]
			ax.bar(positions + offset * width, means, width, yerr=stds, capsize=2, label=label)
		ax.set_xticks(positions + 0.4 - width / 2)
		ax.set_xticklabels(protocol_ids)
		ax.set_ylabel("integrated fractional success")
		ax.set_ylim(0.0, 1.0)
		ax.legend()
		fig.savefig(target / SCORES_PLOT, dpi=150, bbox_inches="tight")
		plt.close(fig)
		written["scores"] = target / SCORES_PLOT

	logger.info("Wrote plots to %s", target)
	return written


# =============================================================================
# Seed Aggregation
# =============================================================================

@dataclass(frozen=True)
class VariantGroup:
	"""Runs sharing a task and variant; `report` holds the seed-averaged protocol scores."""
	task: Optional[str]
	variant: Optional[str]
	runs: List[str]
	seeds: List[Optional[int]]
	report: EvalReport

	@property
	def key(self) -> str:
		return group_key(self.task, self.variant)

	@property
	def mean(self) -> Optional[float]:
		scores = self.report.protocols
		return math.fsum(score.mean for score in scores) / len(scores) if scores else None

	def to_dict(self) -> dict:
		return {
			"task": self.task,
			"variant": self.variant,
			"runs": self.runs,
			"seeds": self.seeds,
			"mean": self.mean,
			"space_means": space_means(self.report),
			"protocols": [score.model_dump(mode="json") for score in self.report.protocols],
		}


def group_key(task: Optional[str], variant: Optional[str]) -> str:
	return f"{task}/{variant}"


def average_reports(reports: Sequence[EvalReport]) -> EvalReport:
	"""Per-protocol mean over runs, the std of the run means and the pooled episode count."""
	if not reports:
		raise ValueError("No reports to average")
	tables = [report.scores_by_id() for report in reports]
	shared = [pid for pid in tables[0] if all(pid in table for table in tables[1:])]
	rows = []
	for pid in shared:
		scores = [table[pid] for table in tables]
		means = np.array([score.mean for score in scores])
		rows.append(
			ProtocolScore(
				id=pid,
				space=scores[0].space,
				variables=scores[0].variables,
				n=sum(score.n for score in scores),
				mean=min(math.fsum(means) / len(means), 1.0),
				std=float(means.std()),
			)
		)
	first = reports[0].run
	return EvalReport(run=RunMetadata(variant=first.variant, task=first.task), protocols=rows)


def group_reports(reports: Mapping[str, EvalReport], metadata: Mapping[str, RunMetadata]) -> Dict[str, VariantGroup]:
	"""Groups labelled reports by the task and variant in `metadata` (one entry per label)."""
	members: Dict[str, List[str]] = {}
	for label in reports:
		run = metadata[label]
		members.setdefault(group_key(run.task, run.variant), []).append(label)
	groups = {}
	for key, labels in sorted(members.items()):
		run = metadata[labels[0]]
		groups[key] = VariantGroup(
			task=run.task,
			variant=run.variant,
			runs=labels,
			seeds=[metadata[label].seed for label in labels],
			report=average_reports([reports[label] for label in labels]),
		)
	logger.info("Grouped %d runs into %d variants", len(reports), len(groups))
	return groups


# (check name, group, baseline group, what is compared)
TREND_CHECKS = (
	("no_intervene_trains_above_intervene", "pushing/no_intervene", "pushing/intervene", "training"),
	("causalcf_iter_scores_at_least_intervene", "pushing/causalcf_iter", "pushing/intervene", "protocols"),
	("transfer_scores_at_least_intervene", "picking/transfer_rep_intervene", "picking/intervene", "protocols"),
)


def trend_checks(groups: Mapping[str, VariantGroup], final_success: Mapping[str, float]) -> Dict[str, Optional[bool]]:
	"""
	Variant orderings over seed averages. `final_success` maps a group key to its mean final smoothed
	training success. A check is None when either side is missing.
	"""
	results: Dict[str, Optional[bool]] = {}
	for name, key, baseline, measure in TREND_CHECKS:
		if measure == "training":
			a, b = final_success.get(key), final_success.get(baseline)
			results[name] = None if a is None or b is None else a > b
		else:
			a = groups[key].mean if key in groups else None
			b = groups[baseline].mean if baseline in groups else None
			results[name] = None if a is None or b is None else a >= b
	return results
