"""CLI bootstrap and experiment command.

`bootstrap()` registers the built-in solver adapters into the shared
`registry`; keeping it out of module import keeps tests deterministic.

    ebrpca --preset rank-sweep-desk --out-dir out/rank-sweep --workers 4
    ebrpca --config my.json --experiment sweep --solvers EB,PCP --no-timing

Exit codes: 0 completed sweep, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

from ebrpca.domain.exceptions import ErrorCode, ExceptionNode, raise_rpca_error
from ebrpca.domain.experiments import ExperimentSpec, get_preset, load_presets, parse_solver_list
from ebrpca.domain.i18n import MessageCatalog
from ebrpca.shared.logging_facade import configure_i18n, configure_logging, print_message, print_translated_error
from ebrpca.shared.registry import registry

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


def bootstrap(reg: Optional[object] = None) -> None:
	"""Register built-in adapters (idempotent).

	Parameters:
		reg: Optional registry object; if omitted the shared `registry` is used.
	"""
	reg = reg or registry

	if reg.get("solver", "EB") is None:
		from ebrpca.infrastructure.solvers import register as _reg_s

		_reg_s(reg)


class _ArgumentParser(argparse.ArgumentParser):
	"""Reports bad flags as configuration errors instead of exiting with 2."""

	def error(self, message: str):
		raise_rpca_error(ErrorCode.CONFIG_ERROR, message=message, location="command line")


def build_parser() -> argparse.ArgumentParser:
	p = _ArgumentParser(prog="ebrpca", description="Run robust PCA benchmark sweeps (EB, MAP, PCP).")
	src = p.add_argument_group("experiment selection")
	src.add_argument("--config", help="JSON file with named experiment entries")
	src.add_argument("--experiment", help="entry to run from --config (or from the bundled presets)")
	src.add_argument("--preset", help="bundled preset, e.g. smoke, rank-sweep-desk, square-desk")
	src.add_argument("--list", action="store_true", help="list the available experiments and exit")
	ovr = p.add_argument_group("overrides")
	ovr.add_argument("--out-dir", help="directory for trials.csv, summary.csv, summary.json, figure.csv")
	ovr.add_argument("--seed", type=int, help="seed base")
	ovr.add_argument("--trials", type=int, help="trials per grid point")
	ovr.add_argument("--solvers", help="comma separated subset of EB,MAP,PCP")
	ovr.add_argument("--max-iters", type=int, help="iteration cap of the EB and MAP solvers")
	ovr.add_argument("--lambda", dest="lam", type=float, help="noise variance lambda")
	ovr.add_argument("--workers", type=int, help="parallel trials (capped by RPCA_THREADS)")
	ovr.add_argument("--no-timing", action="store_true", help="write seconds as 0 for byte-identical reruns")
	p.add_argument("--verbose", "-v", action="store_true", help="debug logging")
	p.add_argument("--lang", default="en", help="language of error messages (en, de)")
	return p


def resolve_spec(args: argparse.Namespace) -> ExperimentSpec:
	"""Load the selected experiment and apply the CLI overrides."""
	if args.preset and args.experiment:
		raise_rpca_error(ErrorCode.CONFIG_ERROR, message="use either --preset or --experiment",
						 location="command line")
	name = args.preset or args.experiment
	if not name:
		raise_rpca_error(ErrorCode.CONFIG_ERROR, message="no experiment selected (--preset or --experiment)",
						 location="command line")
	spec = get_preset(name, None if args.preset else args.config)

	solver_options = spec.solver_options
	if args.max_iters is not None:
		try:
			solver_options = replace(solver_options, max_iterations=args.max_iters)
		except ExceptionNode as exc:
			raise_rpca_error(ErrorCode.CONFIG_ERROR, message=exc.message, value=args.max_iters,
							 location="--max-iters")
	output = spec.output
	if args.out_dir:
		output = replace(output, out_dir=args.out_dir)
	if args.no_timing:
		output = replace(output, record_timing=False)
	return spec.with_overrides(
		seed_base=args.seed,
		trials=args.trials,
		solvers=parse_solver_list(args.solvers) if args.solvers is not None else None,
		lam=args.lam,
		workers=args.workers,
		solver_options=solver_options,
		output=output,
	)


def run(argv: Optional[Sequence[str]] = None) -> List[str]:
	"""Parse arguments, run the sweep and write the result files."""
	from ebrpca.application.experiment_runner import ExperimentRunner, aggregate
	from ebrpca.infrastructure.result_writer import emit

	args = build_parser().parse_args(argv)
	configure_logging(console=True, level=logging.DEBUG if args.verbose else logging.INFO)
	catalog = MessageCatalog()
	if args.lang not in catalog.languages():
		raise_rpca_error(ErrorCode.CONFIG_ERROR, message=f"unknown language, expected one of {catalog.languages()}",
			value=args.lang, location="--lang")
	configure_i18n(catalog, default_lang=args.lang)
	if args.list:
		for name in sorted(load_presets(None if args.preset else args.config)):
			print(name)
		return []
	bootstrap()
	spec = resolve_spec(args)
	runner = ExperimentRunner(spec)
	results = runner.run()
	written = emit(results, aggregate(results, spec.kind), spec.output, spec.kind)
	print_message(f"{spec.name}: {len(results)} rows, {len(runner.errors)} failed trial(s)")
	return written


def main(argv: Optional[Sequence[str]] = None) -> int:
	configure_logging(console=True)
	try:
		run(argv)
	except ExceptionNode as exc:
		print_translated_error(exc)
		return EXIT_IO if exc.code == ErrorCode.IO_ERROR else EXIT_CONFIG
	return EXIT_OK


if __name__ == "__main__":
	sys.exit(main())
