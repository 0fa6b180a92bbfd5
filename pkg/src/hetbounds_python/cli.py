"""Command line: ``hetbounds {estimate,simulate,coverage,power}``.

Every subcommand reads an optional TOML file (or a previous manifest.json),
applies flag overrides, runs, and writes its tables plus ``manifest.json``
into the output directory. Package errors are reported as one line
``error[<module>]: <message>`` with exit status 2.
"""

import argparse
import dataclasses
import logging
import sys
import warnings

import numpy as np

from .config import GridSpec, RunConfig, application_preset, load_run_config
from .coverage_study import run_coverage_study
from .errors import ConfigurationError, HetBoundsError, HetBoundsWarning
from .load_csv import load_csv, write_csv
from .observation_table import HeterogeneitySpec
from .oracle_bounds import oracle_bounds
from .pipeline import estimate_bounds, resolve_grid
from .power_study import run_power_study
from .scores import scores_frame
from .simulate import simulate
from .true_nuisance import true_nuisance
from .write_outputs import write_outputs

logger = logging.getLogger(__name__)

# CONSTANTS ___________________________________________________________________
EXIT_ERROR = 2
ORACLE_GRID = GridSpec(lo=0.0, hi=1.0, points=50)


def _heterogeneity(config, table):
    columns = config.heterogeneity.columns
    kinds = config.heterogeneity.kinds
    if not columns:
        columns, kinds = table.columns[:1], ("continuous",)
        logger.info("no heterogeneity columns configured; using %s", columns[0])
    return HeterogeneitySpec.from_names(table, columns, kinds)


def cmd_estimate(config):
    """Bound curves, pointwise intervals and optional bands for a CSV sample."""
    if config.data_path is None or config.data is None:
        raise ConfigurationError("estimate needs data_path and a [data] section", module="cli")
    table = load_csv(config.data_path, config.data)
    spec = _heterogeneity(config, table)
    z_values = spec.z_values(table)
    z_values = z_values[:, 0] if z_values.shape[1] == 1 else z_values
    settings = config.settings()
    z_grid = resolve_grid(config.grid or GridSpec(), z_values, spec.kinds)
    nuisance = None
    if settings.nuisance == "oracle":
        nuisance = true_nuisance(table, config.simulation, grid=settings.learners.grid, clip=settings.learners.clip)
    estimate = estimate_bounds(table, z_values, spec.kinds, settings, z_grid, nuisance)
    bootstrap = None if estimate.bootstrap is None else estimate.bootstrap.describe(settings.alpha)
    return write_outputs(
        config.output_dir,
        config,
        frames={
            "curves": estimate.curves_frame(),
            "intervals": estimate.intervals_frame(),
            "bands": estimate.bands_frame(),
            "summary": estimate.summary,
            "scores": scores_frame(estimate.fit.scores),
        },
        documents={
            "diagnostics": {**estimate.diagnostics, "levels": spec.levels(table)},
            "bootstrap": bootstrap or {"reps": 0},
        },
    )


def cmd_simulate(config):
    """A Roy sample as data.csv plus its oracle truth on a grid."""
    design = config.simulation
    table = simulate(design)
    z_grid = (config.grid or ORACLE_GRID).resolve(np.array([0.0, 1.0]))
    truth = oracle_bounds(z_grid, design, draws=config.study.oracle_draws, seed=config.seed, n_jobs=config.n_jobs)
    paths = write_outputs(config.output_dir, config, frames={"oracle": truth.frame()})
    paths.append(write_csv(table, f"{config.output_dir}/data.csv"))
    return paths


def _study_grid(config):
    if config.grid is not None:
        return config.grid.resolve(np.array([0.0, 1.0]))
    return np.asarray(config.study.z_grid, dtype=float)


def cmd_coverage(config):
    """Pointwise coverage table of the Roy design."""
    table = run_coverage_study(
        config.simulation, config.settings(), config.study.reps, _study_grid(config),
        nuisance=config.study.nuisance, n_jobs=config.n_jobs,
    )
    return write_outputs(config.output_dir, config, frames={"coverage": table})


def cmd_power(config):
    """Power curves of the two-stratum design."""
    table = run_power_study(
        config.simulation, config.settings(), config.study.reps, config.study.deviations,
        nuisance=config.study.nuisance, n_jobs=config.n_jobs,
    )
    return write_outputs(config.output_dir, config, frames={"power": table})


COMMANDS = {"estimate": cmd_estimate, "simulate": cmd_simulate, "coverage": cmd_coverage, "power": cmd_power}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run file or a previous manifest.json")
    common.add_argument("--alpha", type=float, help="significance level")
    common.add_argument("--folds", type=int, help="cross-fitting folds")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--threads", type=int, help="worker threads, 0 for all cores")
    common.add_argument("--grid", help="evaluation grid lo,hi,points")
    common.add_argument("--bootstrap-reps", type=int, dest="bootstrap_reps", help="multiplier bootstrap replications")
    common.add_argument("--reps", type=int, help="simulation replications")
    common.add_argument("--data", help="input CSV")
    common.add_argument("--out", help="output directory")
    common.add_argument("--preset", choices=["application"], help="reporting preset")
    common.add_argument("--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(prog="hetbounds", description="Heterogeneous bounds under sample selection")
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name, command in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=command.__doc__)
    return parser


def resolve_config(args):
    """Configuration file first, then the preset, then flags."""
    config = load_run_config(args.config) if args.config else RunConfig()
    config = dataclasses.replace(config, subcommand=args.subcommand)
    if args.preset == "application":
        config = application_preset(config)
    overrides = {
        name: getattr(args, name)
        for name in ("alpha", "folds", "seed", "threads", "bootstrap_reps")
        if getattr(args, name) is not None
    }
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.data is not None:
        overrides["data_path"] = args.data
    if args.grid is not None:
        overrides["grid"] = GridSpec.parse(args.grid)
    if args.seed is not None:
        overrides["simulation"] = dataclasses.replace(config.simulation, seed=args.seed)
    if args.reps is not None:
        overrides["study"] = dataclasses.replace(config.study, reps=args.reps)
    return dataclasses.replace(config, **overrides)


def main(argv=None):
    """Entry point of the ``hetbounds`` script; returns the exit status."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    warnings.simplefilter("ignore", HetBoundsWarning)
    try:
        config = resolve_config(args)
        paths = COMMANDS[config.subcommand](config)
    except HetBoundsError as exc:
        print(f"error[{exc.module}]: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for path in paths:
        logger.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
