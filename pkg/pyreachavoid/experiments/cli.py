import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from ..core.errors import ConfigError, Error
from ..core.types import Subroutine
from ..ilq.client import ILQSolver, SolveResult
from ..ilq.options import SolverConfig, SolverOptions
from ..logger import Logger
from ..performance.profile import ComplexityProfile
from ..scenarios.builders import BUILDERS, load_scenario
from ..scenarios.scenario import Scenario, make_rng
from ..storage import TrajectoryClient
from ..verification.oracles import margin_derivative_errors, subsystem_jacobian_errors
from ..verification.probes import (
    DEFAULT_DELTA_GAMMA,
    DEFAULT_DELTA_X,
    nash_probe,
    time_consistency_probe,
)
from .batch import BatchRecord, BatchStatistics, run_batch
from .directory import OutputDirectory
from .plot import emit_plot
from .sweep import reaction_sweep

logger = logging.getLogger(__name__)

FD_TOLERANCE = 1e-5


def solver_config(args: argparse.Namespace, scenario: Scenario, subroutine: str) -> SolverConfig:
    return SolverOptions(
        scenario.solver_overrides,
        subroutine=subroutine,
        max_iterations=args.max_iters,
        early_stop=True if args.early_stop else None,
    ).factory()


def _start_state(scenario: Scenario, seed: Optional[int]) -> Scenario:
    if seed is None or scenario.initial_region is None:
        return scenario
    return scenario.with_initial_state(scenario.sample_initial_states(1, seed)[0])


def _run_dir(args: argparse.Namespace, *parts: str) -> Path:
    return OutputDirectory.root(args.out_dir).joinpath(*parts)


def _save_result(client: TrajectoryClient, result: SolveResult, stem: str) -> None:
    client.dump_trajectory(result.trajectory, f"{stem}.json")
    client.dump_trajectory(result.trajectory, f"{stem}.csv")
    client.dump_log([record.to_dict() for record in result.log], f"{stem}_iterations.jsonl")
    client.dump_json({
        "status": str(result.status),
        "iterations": result.iterations,
        "J0": result.costs,
        "message": result.message,
    }, f"{stem}_result.json")


def run_single(args: argparse.Namespace) -> int:
    scenario = _start_state(load_scenario(args.scenario, t_react=args.t_react), args.seed)
    config = solver_config(args, scenario, args.solver)
    out = _run_dir(args, f"{scenario.name}_{config.subroutine}")
    client = TrajectoryClient(out)
    result = ILQSolver(scenario, config).solve()
    stem = str(OutputDirectory.TRAJECTORIES.file("solution"))
    _save_result(client, result, stem)
    if not args.no_plot:
        within = scenario.metadata.get("clearance", scenario.metadata.get("car_clearance"))
        emit_plot([result.trajectory], scenario, out / OutputDirectory.PLOTS.file("solution.svg"),
                  annotate_within=None if within is None else 2 * within)
    print(f"{scenario.name} [{config.subroutine}]: {result.status} after {result.iterations} iterations, "
          f"J0={[round(c, 4) for c in result.costs]} -> {out}")
    if result.failed:
        print(f"error: solve failed: {result.message}", file=sys.stderr)
        return 1
    return 0


def run_batch_command(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario, t_react=args.t_react)
    solvers = [Subroutine.PINCH_POINT, Subroutine.TIME_CONSISTENT] if args.solver == "both" else [args.solver]
    out = _run_dir(args, f"{scenario.name}_batch")
    client = TrajectoryClient(out)
    rows, lines = [], []
    for subroutine in solvers:
        config = solver_config(args, scenario, subroutine)
        records = run_batch(args.scenario, config, args.num_starts, args.seed, args.workers, args.t_react)
        client.dump_json([record.to_dict() for record in records],
                         OutputDirectory.REPORTS.file(f"records_{config.subroutine}.json"))
        stats = BatchStatistics.from_records(records)
        rows.append({"solver": str(config.subroutine), **stats.to_dict()})
        lines.append(stats.to_text(str(config.subroutine)))
    client.dump_table(rows, OutputDirectory.REPORTS.file("statistics.csv"))
    client.dump_text("\n".join(lines) + "\n", OutputDirectory.REPORTS.file("statistics.txt"))
    print("\n".join(lines))
    return 0


def run_sweep(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario)
    if "clearance" not in scenario.metadata:
        raise ConfigError(f"Scenario {scenario.name} has no reaction time to sweep")
    config = solver_config(args, scenario, args.solver)
    records = reaction_sweep(args.scenario, args.values, config, args.workers)
    client = TrajectoryClient(_run_dir(args, f"{scenario.name}_sweep"))
    client.dump_json([record.to_dict() for record in records],
                     OutputDirectory.REPORTS.file(f"reaction_sweep_{config.subroutine}.json"))
    client.dump_table([record.to_dict() for record in records],
                      OutputDirectory.REPORTS.file(f"reaction_sweep_{config.subroutine}.csv"))
    for record in records:
        outcome = record.error or ("collision" if record.collided else "avoided")
        print(f"t_react={record.t_react}: {outcome}, min distance {record.min_distance:.3f} ({record.status})")
    return 1 if any(record.error is not None for record in records) else 0


def recompute_statistics(client: TrajectoryClient, name: str) -> BatchStatistics:
    """Statistics from a saved records file."""
    return BatchStatistics.from_records([BatchRecord.from_dict(data) for data in client.load_json(name)])


def run_plot(args: argparse.Namespace) -> int:
    scenario = load_scenario(args.scenario, t_react=args.t_react)
    client = TrajectoryClient(".")
    trajectories = [client.load_trajectory(path) for path in args.trajectory]
    emit_plot(trajectories, scenario, args.output, annotate_within=args.annotate_within)
    print(f"Wrote {args.output}")
    return 0


def _fd_report(scenario: Scenario, samples: int, seed: int) -> dict:
    rng = make_rng(seed)
    points = [scenario.initial_state + rng.standard_normal(scenario.system.state_dim) for _ in range(samples)]
    report = {"margins": {}, "subsystems": {}}
    for player, margins in enumerate(zip(scenario.targets, scenario.failures)):
        for margin in margins:
            gradient_error, hessian_error = margin_derivative_errors(margin, points, scenario.t0)
            report["margins"][f"{player}:{margin.name}"] = {"gradient": gradient_error, "hessian": hessian_error}
    system = scenario.system
    for agent, (subsystem, slc) in enumerate(zip(system.subsystems, system.state_slices)):
        pairs = [(x[slc], 0.1 * rng.standard_normal(subsystem.input_dim)) for x in points]
        state_error, input_error = subsystem_jacobian_errors(subsystem, pairs)
        report["subsystems"][system.names[agent]] = {"state": state_error, "input": input_error}
    errors = [v for group in report.values() for entry in group.values() for v in entry.values()]
    report["max_error"] = max(errors)
    return report


def run_verify(args: argparse.Namespace) -> int:
    scenario = _start_state(load_scenario(args.scenario, t_react=args.t_react), args.seed)
    out = _run_dir(args, f"{scenario.name}_verify")
    client = TrajectoryClient(out)
    seed = args.seed or 0

    if args.check == "fd":
        report = _fd_report(scenario, args.samples, seed)
        client.dump_json(report, OutputDirectory.REPORTS.file("finite_differences.json"))
        print(f"max relative derivative error {report['max_error']:.3e}")
        return 0 if report["max_error"] <= FD_TOLERANCE else 1

    if args.check == "complexity":
        profile = ComplexityProfile()
        profile.measure_horizons(scenario)
        profile.measure_players()
        client.dump_json(profile.to_dict(), OutputDirectory.REPORTS.file("complexity.json"))
        print(f"horizon slope {profile.get_horizon_slope():.2f}, player slope {profile.get_player_slope():.2f}")
        return 0

    config = solver_config(args, scenario, args.solver)
    result = ILQSolver(scenario, config).solve()
    if result.failed:
        print(f"error: solve failed: {result.message}", file=sys.stderr)
        return 1
    if args.check == "tc":
        step = args.step if args.step is not None else scenario.horizon // 2
        reports = [
            time_consistency_probe(result.strategy, scenario, step, args.delta_x, args.samples, config, seed, player)
            for player in range(scenario.num_players)
        ]
        name = f"time_consistency_{config.subroutine}.json"
    else:
        reports = [
            nash_probe(result.strategy, scenario, player, args.delta_gamma, args.samples, seed,
                       config.eta if args.regularized else 0.0)
            for player in range(scenario.num_players)
        ]
        name = f"nash_{config.subroutine}.json"
    client.dump_json([report.to_dict() for report in reports], OutputDirectory.REPORTS.file(name))
    for player, report in enumerate(reports):
        print(f"{scenario.player_names[player]}: {report.to_dict()['excess_stats']} failures {report.failures}")
    return 0


def _scenario_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", default="one_player",
                        help=f"scenario id ({', '.join(BUILDERS)}) or config file path")
    parser.add_argument("--t-react", type=int, default=None, help="reaction step of the defensive driving game")
    parser.add_argument("--out-dir", default=None, help="output root, default $PYREACHAVOID_OUT_DIR or ./runs")


def _solver_arguments(parser: argparse.ArgumentParser, choices: Sequence[str] = ("pp", "tc")) -> None:
    parser.add_argument("--solver", choices=choices, default="tc")
    parser.add_argument("--max-iters", type=int, default=None)
    parser.add_argument("--early-stop", action="store_true", help="stop once every player reaches its target")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pyreachavoid", description="Iterative LQ solvers for reach-avoid games")
    parser.add_argument("-v", "--verbose", action="store_true")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="solve one scenario")
    _scenario_argument(solve)
    _solver_arguments(solve)
    solve.add_argument("--seed", type=int, default=None, help="sample the initial state with this seed")
    solve.add_argument("--no-plot", action="store_true")
    solve.set_defaults(handler=run_single)

    batch = commands.add_parser("batch", help="solve from seeded random initial states")
    _scenario_argument(batch)
    _solver_arguments(batch, ("pp", "tc", "both"))
    batch.add_argument("--num-starts", type=int, default=100)
    batch.add_argument("--seed", type=int, default=0)
    batch.add_argument("--workers", type=int, default=None)
    batch.set_defaults(handler=run_batch_command)

    sweep = commands.add_parser("sweep", help="solve the defensive driving game over reaction steps")
    sweep.add_argument("--scenario", default="defensive_driving", help="defensive driving builder id or config path")
    sweep.add_argument("--out-dir", default=None, help="output root, default $PYREACHAVOID_OUT_DIR or ./runs")
    _solver_arguments(sweep)
    sweep.add_argument("--values", type=int, nargs="+", default=[5, 10, 15, 20, 25])
    sweep.add_argument("--workers", type=int, default=None)
    sweep.set_defaults(handler=run_sweep)

    plot = commands.add_parser("plot", help="plot trajectory files over the scenario geometry")
    _scenario_argument(plot)
    plot.add_argument("--trajectory", nargs="*", default=[])
    plot.add_argument("--output", required=True)
    plot.add_argument("--annotate-within", type=float, default=None)
    plot.set_defaults(handler=run_plot)

    verify = commands.add_parser("verify", help="run a verification check")
    _scenario_argument(verify)
    _solver_arguments(verify)
    verify.add_argument("--check", choices=("tc", "nash", "fd", "complexity"), required=True)
    verify.add_argument("--seed", type=int, default=None)
    verify.add_argument("--samples", type=int, default=20)
    verify.add_argument("--step", type=int, default=None, help="truncation step of the time-consistency probe")
    verify.add_argument("--delta-x", type=float, default=DEFAULT_DELTA_X)
    verify.add_argument("--delta-gamma", type=float, default=DEFAULT_DELTA_GAMMA)
    verify.add_argument("--regularized", action="store_true",
                        help="score Nash deviations with the solver's regularized objective instead of J_0")
    verify.set_defaults(handler=run_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    out_root = OutputDirectory.root(args.out_dir)
    run_logger = Logger("pyreachavoid", log_file=out_root / "run.log",
                        level=logging.DEBUG if args.verbose else logging.INFO)
    try:
        return args.handler(args)
    except ConfigError as err:
        run_logger.error(err.text)
        print(f"error: {err.text}", file=sys.stderr)
        return 1
    except Error as err:
        run_logger.critical(err.text)
        print(f"error: {args.scenario}: {err.text}", file=sys.stderr)
        return 1
    finally:
        run_logger.close()


if __name__ == "__main__":
    sys.exit(main())
