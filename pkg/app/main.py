"""Command-line entry point for mmwave-planner."""

import argparse
import json
import logging
import sys
from typing import List, Optional

from app.config import get_instance_defaults, get_solver_config
from app.driver import METHOD_PROPOSED, METHOD_SINGLE_TABU, RUNNERS
from app.errors import ConfigError, InstanceValidationError, OracleSizeError, PlannerError, ReportError
from app.experiment import (
    DEFAULT_AREA_M,
    DEFAULT_BAN_COUNT,
    DEFAULT_NB_VALUES,
    DEFAULT_SC_COUNTS,
    DEFAULT_SEED_COUNT,
    ExperimentPlan,
    run_experiment,
)
from app.instance import generate_instance, instance_schema, instance_sha256, load_instance, save_instance
from app.model import prepare
from app.oracle import DEFAULT_SIZE_GUARD, enumerate_frontier
from app.pareto import hypervolume
from app.report import read_manifest, tool_version, write_plot_data, write_report, write_solver_report
from models import AreaSpec, RunManifest, SolverConfig
from models.run_manifest import utcnow

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    """Bad command-line usage detected after parsing."""


class PlannerArgumentParser(argparse.ArgumentParser):
    """ArgumentParser exiting with the usage code instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def non_negative_int(value: str) -> int:
    number = int(value)
    if number < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {value}")
    return number


def area_size(value: str):
    try:
        width, height = (float(part) for part in value.lower().split("x"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got {value}") from e
    return width, height


def build_parser() -> argparse.ArgumentParser:
    parser = PlannerArgumentParser(
        prog="mmwave-planner",
        description="Pareto-optimal mmWave small-cell and wireless backhaul deployment",
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--config", default=None, help="YAML configuration file")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=PlannerArgumentParser)

    gen = commands.add_parser("gen", help="generate a random instance")
    gen.add_argument("--area", type=area_size, required=True, help="WIDTHxHEIGHT in meters")
    gen.add_argument("--side", type=float, default=10.0, help="subarea side in meters")
    gen.add_argument("--sc", type=non_negative_int, required=True, help="SCBS candidate count")
    gen.add_argument("--ban", type=non_negative_int, required=True, help="BAN candidate count")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--nb-max", type=int, default=None, help="SCBSs one BAN can backhaul")
    gen.add_argument("-o", "--output", required=True)

    solve_cmd = commands.add_parser("solve", help="compute the Pareto frontier of an instance")
    solve_cmd.add_argument("instance", nargs="?", help="instance file (omit with --replay)")
    solve_cmd.add_argument("-o", "--output", required=True, help="report directory")
    solve_cmd.add_argument("--seed", type=int, default=None)
    solve_cmd.add_argument("--baseline", choices=[METHOD_PROPOSED, METHOD_SINGLE_TABU], default=METHOD_PROPOSED)
    solve_cmd.add_argument("--oracle-check", action="store_true", help="compare the frontier with enumeration")
    solve_cmd.add_argument(
        "--threads", type=int, default=None,
        help="threads for candidate evaluation; results match one thread, no speedup is expected",
    )
    solve_cmd.add_argument("--replay", default=None, help="report directory whose run to repeat")

    plot = commands.add_parser("plotdata", help="merge report frontiers into plot-ready CSV")
    plot.add_argument("reports", nargs="*")
    plot.add_argument("--label", action="append", default=None, help="series label per report")
    plot.add_argument("-o", "--output", required=True)

    oracle = commands.add_parser("oracle", help="write the exact frontier of a small instance")
    oracle.add_argument("instance")
    oracle.add_argument("-o", "--output", required=True)
    oracle.add_argument("--size-guard", type=int, default=DEFAULT_SIZE_GUARD)

    experiment = commands.add_parser("experiment", help="sweep generated instances and compare both methods")
    experiment.add_argument("--sc-counts", type=non_negative_int, nargs="+", default=list(DEFAULT_SC_COUNTS))
    experiment.add_argument("--nb", type=int, nargs="+", default=list(DEFAULT_NB_VALUES), help="N_b values")
    experiment.add_argument("--seeds", type=non_negative_int, default=DEFAULT_SEED_COUNT, help="seeds per case")
    experiment.add_argument(
        "--area", type=area_size, default=(DEFAULT_AREA_M, DEFAULT_AREA_M), help="WIDTHxHEIGHT in meters"
    )
    experiment.add_argument("--ban", type=non_negative_int, default=DEFAULT_BAN_COUNT, help="BAN candidate count")
    experiment.add_argument("-o", "--output", required=True, help="experiment directory")

    commands.add_parser("schema", help="print the instance JSON schema")
    return parser


def cmd_gen(args) -> int:
    defaults = get_instance_defaults(args.config)
    if args.nb_max is not None:
        if args.nb_max < 1:
            raise UsageError(f"--nb-max must be at least 1, got {args.nb_max}")
        defaults = defaults.model_copy(update={"nb_max": args.nb_max})
    width, height = args.area
    try:
        area = AreaSpec(width=width, height=height, subarea_side=args.side)
    except ValueError as e:
        raise InstanceValidationError(f"Invalid area: {e}") from e
    instance = generate_instance(area, args.sc, args.ban, args.seed, defaults)
    save_instance(instance, args.output)

    problem = prepare(instance)
    budgets = [link.n_ki for link in problem.links.links]
    print(f"Wrote {args.output}")
    print(f"  subareas (S): {problem.subarea_count}")
    print(f"  SCBS candidates: {problem.n_sc}, BAN candidates: {problem.n_ban}")
    print(f"  access radius: {problem.thresholds.d_max_access_m:.1f} m")
    print(f"  backhaul radius: {problem.thresholds.d_max_backhaul_m:.1f} m")
    if budgets:
        print(
            f"  N_ki over {len(budgets)} links: min {min(budgets)}, "
            f"mean {sum(budgets) / len(budgets):.1f}, max {max(budgets)}"
        )
    else:
        print("  no backhaul links")
    return EXIT_OK


def _frontier_key(vectors):
    return sorted((round(v.cost, 6), v.uncovered) for v in vectors)


def run_solve(
    instance_path: str,
    config: SolverConfig,
    method: str,
    output: str,
    command: List[str],
    oracle_check: bool = False,
) -> int:
    instance = load_instance(instance_path)
    problem = prepare(instance)
    started = utcnow()
    report = RUNNERS[method](problem, config)
    manifest = write_solver_report(
        output, report, instance, command, instance_path=str(instance_path), started_at=started
    )
    print(f"Frontier: {len(report.frontier)} points, hypervolume {manifest.hypervolume:.3f}, report in {output}")

    if oracle_check:
        exact = enumerate_frontier(problem)
        if _frontier_key(exact.frontier.vectors()) != _frontier_key(report.frontier.vectors()):
            logger.error(
                f"Frontier differs from enumeration: solver {_frontier_key(report.frontier.vectors())}, "
                f"exact {_frontier_key(exact.frontier.vectors())}"
            )
            return EXIT_VALIDATION
        print("Oracle check passed")
    return EXIT_OK


def cmd_solve(args, argv: List[str]) -> int:
    if args.replay:
        manifest = read_manifest(args.replay)
        if not manifest.instance_path:
            raise ReportError(f"Manifest in {args.replay} records no instance path")
        if manifest.method not in RUNNERS:
            raise ReportError(f"Manifest in {args.replay} records method {manifest.method}, which cannot be replayed")
        try:
            config = SolverConfig.model_validate(manifest.config)
        except ValueError as e:
            raise ConfigError(f"Manifest config in {args.replay} is invalid: {e}") from e
        logger.info(f"Replaying {args.replay} with seed {config.seed}")
        return run_solve(manifest.instance_path, config, manifest.method, args.output, argv, args.oracle_check)

    if not args.instance:
        raise UsageError("solve needs an instance file or --replay")
    overrides = {"seed": args.seed, "workers": args.threads}
    config = get_solver_config(args.config, overrides)
    return run_solve(args.instance, config, args.baseline, args.output, argv, args.oracle_check)


def cmd_plotdata(args) -> int:
    if not args.reports:
        raise UsageError("plotdata needs at least one report directory")
    frame = write_plot_data(args.reports, args.output, args.label)
    print(f"Wrote {len(frame)} rows to {args.output}")
    return EXIT_OK


def cmd_oracle(args, argv: List[str]) -> int:
    instance = load_instance(args.instance)
    problem = prepare(instance)
    result = enumerate_frontier(problem, args.size_guard)
    reference = (problem.total_cost(), problem.subarea_count)
    manifest = RunManifest(
        command=argv,
        instance_path=str(args.instance),
        instance_sha256=instance_sha256(instance),
        seed=0,
        method="oracle",
        oracle=True,
        tool_version=tool_version(),
        finished_at=utcnow(),
        frontier_size=len(result.frontier),
        hypervolume=hypervolume(result.frontier.vectors(), reference),
        reference_point=list(reference),
    )
    write_report(args.output, result.frontier, problem, manifest)
    print(f"Exact frontier: {len(result.frontier)} points from {result.examined} combinations")
    return EXIT_OK


def cmd_experiment(args, argv: List[str]) -> int:
    width, height = args.area
    try:
        area = AreaSpec(width=width, height=height)
    except ValueError as e:
        raise InstanceValidationError(f"Invalid area: {e}") from e
    plan = ExperimentPlan(
        area=area,
        sc_counts=tuple(args.sc_counts),
        nb_values=tuple(args.nb),
        seeds=tuple(range(args.seeds)),
        n_ban=args.ban,
    )
    config = get_solver_config(args.config)
    result = run_experiment(plan, args.output, config, get_instance_defaults(args.config), argv)
    print(f"Wrote {len(result.runs)} runs over {len(plan.cases())} cases to {args.output}")
    for row in result.hypervolume.itertuples(index=False):
        print(
            f"  {row.n_sc} SCBS, N_b={row.nb_max}: hypervolume {row.proposed:.1f} vs {row.single_tabu:.1f}, "
            f"proposed not worse on {row.proposed_wins}/{row.instances}"
        )
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one command and return its exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "solve":
            return cmd_solve(args, argv)
        if args.command == "plotdata":
            return cmd_plotdata(args)
        if args.command == "oracle":
            return cmd_oracle(args, argv)
        if args.command == "experiment":
            return cmd_experiment(args, argv)
        print(json.dumps(instance_schema(), indent=2))
        return EXIT_OK
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"mmwave-planner: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceValidationError, ConfigError, ReportError, OracleSizeError) as e:
        logger.error(f"{e}")
        return EXIT_VALIDATION
    except PlannerError as e:
        logger.error(f"Error: {e}", exc_info=True)
        return EXIT_INTERNAL
    except Exception as e:
        logger.error(f"Error: {e}", exc_info=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
