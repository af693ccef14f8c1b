import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from causalrep.config import get_settings
from causalrep.pipelines.agent_training import LOG_FILENAME, rep_width_for
from causalrep.pipelines.run_config import load_run_config, validate_run_config
from causalrep.pipelines.runs import RunResult, resume_run, train_run, transfer_rep
from causalrep.progress import progress_write
from causalrep.schemas import EvalReport, RunConfig, RunMetadata
from causalrep.scm.protocols import parse_protocol_selection
from causalrep.services.checkpoints import load_checkpoint, run_dir_of
from causalrep.services.curves import read_training_log, smooth_curve
from causalrep.services.evaluation import run_pipeline
from causalrep.services.report import compare_reports, emit_plots, emit_report, group_reports, load_report, trend_checks
from causalrep.services.sac_agent import AgentPolicy
from causalrep.utils import configure_torch, write_json

logger = logging.getLogger(__name__)

REPORT_FILENAME = "report.json"
SUMMARY_FILENAME = "summary.json"
CONFIG_FILENAME = "config.json"


def _with_overrides(config: RunConfig, *, task: Optional[str] = None, variant: Optional[str] = None, seed: Optional[int] = None) -> RunConfig:
	raw = config.model_dump()
	if task:
		raw["task"]["task_id"] = task
	if variant:
		raw["variant"] = variant
	if seed is not None:
		raw["seed"] = seed
	# Overrides go through the same validation as the config file.
	return validate_run_config(RunConfig.model_validate(raw))


def _print_result(result: RunResult) -> None:
	progress_write(
		f"run_dir={result.run_dir} final_step={result.final_step} "
		f"rep_version={None if result.rep is None else result.rep.version} "
		f"refreshes={len(result.refresh_steps)} checkpoints={len(result.checkpoint_steps)}"
	)


def _cmd_train(args: argparse.Namespace) -> int:
	config = _with_overrides(load_run_config(args.config), task=args.task, variant=args.variant, seed=args.seed)
	result = train_run(config, Path(args.out) if args.out else None)
	_print_result(result)
	return 0


def _cmd_eval(args: argparse.Namespace) -> int:
	protocols = parse_protocol_selection(args.protocols)
	bundle = load_checkpoint(args.checkpoint)
	config = bundle.config
	policy = AgentPolicy(bundle.agent, bundle.rep, rep_width_for(config), deterministic=True)
	report = run_pipeline(
		policy,
		args.episodes or config.eval_episodes,
		args.seed,
		protocols=protocols,
		task=config.task,
		physics=config.physics,
		metadata=RunMetadata(variant=config.variant, task=config.task.task_id, seed=config.seed, checkpoint_step=bundle.step),
		workers=args.workers,
	)
	target = Path(args.report) if args.report else run_dir_of(args.checkpoint) / REPORT_FILENAME
	emit_report(report, target)
	for score in report.protocols:
		progress_write(f"{score.id} space={score.space} mean={score.mean:.4f} std={score.std:.4f}")
	progress_write(f"report={target}")
	return 0


def _cmd_transfer(args: argparse.Namespace) -> int:
	config = _with_overrides(load_run_config(args.config), task=args.task, seed=args.seed)
	result = transfer_rep(args.rep, config, Path(args.out) if args.out else None)
	_print_result(result)
	return 0


def _cmd_resume(args: argparse.Namespace) -> int:
	result = resume_run(args.checkpoint, args.out)
	_print_result(result)
	return 0


def _run_metadata(run_dir: Path, report: EvalReport) -> RunMetadata:
	"""Task, variant and seed from the run's echoed config, falling back to the report header."""
	if (run_dir / CONFIG_FILENAME).exists():
		config = load_run_config(run_dir / CONFIG_FILENAME)
		return RunMetadata(variant=config.variant, task=config.task.task_id, seed=config.seed)
	return report.run


def _cmd_report(args: argparse.Namespace) -> int:
	curves, reports, metadata = {}, {}, {}
	for raw in args.runs:
		run_dir = Path(raw)
		label = run_dir.name
		if (run_dir / LOG_FILENAME).exists():
			curves[label] = smooth_curve(read_training_log(run_dir / LOG_FILENAME))
		if (run_dir / REPORT_FILENAME).exists():
			reports[label] = load_report(run_dir / REPORT_FILENAME)
			metadata[label] = _run_metadata(run_dir, reports[label])
		else:
			logger.warning("No %s in %s; run `eval` first to include protocol scores", REPORT_FILENAME, run_dir)

	labels = list(reports)
	groups = group_reports(reports, metadata)
	final_success = {}
	for key, group in groups.items():
		finals = [curves[label].smoothed[-1] for label in group.runs if label in curves and curves[label].smoothed]
		if finals:
			final_success[key] = sum(finals) / len(finals)
	keys = list(groups)
	summary = {
		"runs": {label: report.model_dump(mode="json") for label, report in reports.items()},
		"comparisons": [
			{"a": a, "b": b, **compare_reports(reports[a], reports[b])}
			for i, a in enumerate(labels)
			for b in labels[i + 1:]
		],
		"variants": {key: {**group.to_dict(), "final_success": final_success.get(key)} for key, group in groups.items()},
		"variant_comparisons": [
			{"a": a, "b": b, **compare_reports(groups[a].report, groups[b].report)}
			for i, a in enumerate(keys)
			for b in keys[i + 1:]
		],
		"trend_checks": trend_checks(groups, final_success),
		"curves": {label: {"smoothed": curve.smoothed, "smoothed_steps": curve.smoothed_steps, "partial": curve.partial} for label, curve in curves.items()},
	}
	out_dir = Path(args.out)
	write_json(out_dir / SUMMARY_FILENAME, summary)
	written = emit_plots(curves, reports, out_dir)
	for key, group in groups.items():
		mean = "none" if group.mean is None else f"{group.mean:.4f}"
		progress_write(f"variant={key} runs={len(group.runs)} mean={mean}")
	progress_write(f"summary={out_dir / SUMMARY_FILENAME} plots={','.join(str(p) for p in written.values() if p)}")
	return 0


def build_parser() -> argparse.ArgumentParser:
	parser = argparse.ArgumentParser(description="Causal representation training and evaluation commands.")
	subparsers = parser.add_subparsers(dest="command")

	train = subparsers.add_parser("train", help="Train one variant.")
	train.add_argument("--task", choices=["pushing", "picking"])
	train.add_argument("--variant", choices=["no_intervene", "intervene", "counterfactual_intervene", "causalcf_iter"])
	train.add_argument("--config", default="desk", help="Preset name (desk, full, smoke) or JSON path.")
	train.add_argument("--seed", type=int)
	train.add_argument("--out", help="Run directory (defaults under RUNS_ROOT).")
	train.set_defaults(handler=_cmd_train)

	evaluate = subparsers.add_parser("eval", help="Evaluate a checkpoint on the protocol suite.")
	evaluate.add_argument("--checkpoint", required=True)
	evaluate.add_argument("--protocols", default="all", help="'all' or a comma-separated list such as P0,P4.")
	evaluate.add_argument("--episodes", type=int, help="Episodes per protocol (defaults to the run's eval_episodes).")
	evaluate.add_argument("--seed", type=int, default=0)
	evaluate.add_argument("--report", help="Output path (defaults to <run_dir>/report.json).")
	evaluate.add_argument("--workers", type=int)
	evaluate.set_defaults(handler=_cmd_eval)

	transfer = subparsers.add_parser("transfer", help="Train a fresh agent with a representation from another run.")
	transfer.add_argument("--rep", required=True, help="Source run directory or rep_vK.json file.")
	transfer.add_argument("--task", default="picking", choices=["pushing", "picking"])
	transfer.add_argument("--config", default="desk")
	transfer.add_argument("--seed", type=int)
	transfer.add_argument("--out")
	transfer.set_defaults(handler=_cmd_transfer)

	resume = subparsers.add_parser("resume", help="Continue training from a checkpoint.")
	resume.add_argument("--checkpoint", required=True)
	resume.add_argument("--out", help="Run directory for the continuation (defaults to the source run).")
	resume.set_defaults(handler=_cmd_resume)

	report = subparsers.add_parser("report", help="Summarise runs into summary.json and plots.")
	report.add_argument("--runs", nargs="+", required=True)
	report.add_argument("--out", required=True)
	report.set_defaults(handler=_cmd_report)
	return parser


def main(argv: Optional[List[str]] = None) -> int:
	parser = build_parser()
	args = parser.parse_args(argv)
	if not args.command:
		parser.print_help()
		return 1

	settings = get_settings()
	logging.basicConfig(
		level=getattr(logging, settings.LOG_LEVEL.upper(), logging.INFO),
		format="%(asctime)s - %(levelname)s - %(name)s - %(message)s",
	)
	configure_torch()

	try:
		return args.handler(args)
	except (ValueError, RuntimeError, OSError) as exc:
		logger.debug("Command %s failed", args.command, exc_info=True)
		print(f"error={exc.__class__.__name__} message={json.dumps(str(exc))}", file=sys.stderr)
		return 1


if __name__ == "__main__":
	raise SystemExit(main())
