"""Command-line front end.

Examples:
  risk-corners solve prob --lambda 1 --H 2 --L 0 --alpha 1 --pbar 0.8
  risk-corners solve reward --lambda 0.005 --B 150 --p 0.5 --affine 0,3 --cmax 150 --curve --plot
  risk-corners sweep prob --crra 1 --H 5.5 --L 0.6875 --alpha 3 --pbar 0.8 \
      --vary B --range 1,2.4 --steps 100
  risk-corners threshold lambda --H 2 --L 0 --alpha 1 --pbar 0.8
  risk-corners threshold wealth --crra 1 --H 5.5 --L 0.6875 --alpha 3 --pbar 0.8
  risk-corners calibrate --plot
  risk-corners simulate --game all --n 10000 --lambda-log-uniform 1e-4,5e-2 --seed 7
"""

import argparse
import json
import logging
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError
from rich.console import Console
from rich.table import Table

from risk_corners import calibrate, credit, expsim, models, solver
from risk_corners.config import (
    CALIBRATION_GROUPS,
    CALIBRATION_H,
    CALIBRATION_L,
    CALIBRATION_P_BAR,
    CALIBRATION_SIGMAS,
    CREDIT_LAMBDA_K,
    DIAGNOSTIC_GRID_SIZE,
    FIXTURE_PATH,
    POPULATION_SEED,
    POPULATION_SIZE,
    SEARCH_GRID_SIZE,
    SUCCESS_LIKERT,
    RunConfig,
)
from risk_corners.errors import (
    ArgumentError,
    DomainError,
    EmptyInputError,
    RangeError,
    RecordError,
    RiskCornersError,
)
from risk_corners.logs import setup_logging
from risk_corners.plotting import write_plot_script
from risk_corners.utility import CARA, CRRA, Linear, Preference

logger = logging.getLogger(__name__)

# Bad input exits with 2, a failed computation with 1.
VALIDATION_ERRORS = (
    ValidationError,
    ArgumentError,
    RangeError,
    DomainError,
    RecordError,
    EmptyInputError,
)
SWEEP_PARAMETERS = {"lambda": "lam", "sigma": "sigma", "B": "B", "alpha": "alpha", "H": "H"}


class CliParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors on one line."""

    def error(self, message: str):
        sys.stderr.write(f"error: ArgumentError: {message}\n")
        sys.exit(2)


def parse_floats(text: str | None, flag: str, count: int | None = None) -> tuple[float, ...]:
    """Parse a comma-separated list of numbers given to ``flag``."""
    if text is None:
        raise ArgumentError(f"{flag} is required here")
    try:
        values = tuple(float(part) for part in text.split(","))
    except ValueError:
        raise ArgumentError(f"{flag} expects comma-separated numbers, got {text!r}")
    if count is not None and len(values) != count:
        raise ArgumentError(f"{flag} expects {count} comma-separated numbers, got {text!r}")
    return values


# Building values from flags


def preference_from(args: argparse.Namespace) -> Preference:
    """Preference chosen by --linear, --lambda or --crra."""
    if args.linear:
        return Linear()
    if args.lam is not None:
        return CARA(lam=args.lam)
    if args.sigma is not None:
        return CRRA(sigma=args.sigma)
    raise ArgumentError("choose a preference with --lambda, --crra or --linear")


def reward_function_from(args: argparse.Namespace) -> models.RewardFunction:
    if args.power is not None:
        h0, m, theta = parse_floats(args.power, "--power", 3)
        return models.RewardFunction(kind="power", h0=h0, m=m, theta=theta, c_max=args.cmax)
    if args.affine is not None:
        h0, m = parse_floats(args.affine, "--affine", 2)
        return models.RewardFunction(kind="affine", h0=h0, m=m, c_max=args.cmax)
    raise ArgumentError("the reward model needs --affine h0,m or --power h0,m,theta")


def model_from(kind: str, args: argparse.Namespace) -> BaseModel:
    """Build the ``prob``, ``reward`` or ``credit`` model from the flags."""
    match kind:
        case "prob":
            return models.ProbabilityModel(
                B=args.B, H=args.H, L=args.L, alpha=args.alpha, p_bar=args.pbar
            )
        case "reward":
            reward = reward_function_from(args)
            return models.RewardModel(B=args.B, L=args.L, p=args.p, reward=reward)
        case "credit":
            return credit.CreditModel(
                B=args.B, H=args.H, L=args.L, alpha=args.alpha, p_bar=args.pbar
            )
    raise ArgumentError(f"unknown model {kind!r}")


def solve_model(
    kind: str, model: BaseModel, pref: Preference, grid_size: int
) -> solver.SolveReport:
    match kind:
        case "prob":
            return solver.solve_probability(model, pref, grid_size)
        case "reward":
            return solver.solve_reward(model, pref)
        case _:
            return credit.solve_credit(model, pref, grid_size)


def curve_of(kind: str, model: BaseModel, pref: Preference, upper: float) -> pd.DataFrame:
    """Expected utility on a diagnostic grid over [0, upper]."""
    grid = np.linspace(0.0, upper, DIAGNOSTIC_GRID_SIZE)
    match kind:
        case "prob":
            return pd.DataFrame({"p": grid, "eu": models.prob_eu(model, pref, grid)})
        case "reward":
            return pd.DataFrame({"c": grid, "eu": models.reward_eu(model, pref, grid)})
        case _:
            return pd.DataFrame({"p": grid, "eu": credit.credit_eu(model, pref, grid)})


# Output


def run_config(args: argparse.Namespace, subcommand: str | None = None) -> RunConfig:
    """Everything that shaped a run, minus the output-only flags."""
    parameters = {
        key: value
        for key, value in sorted(vars(args).items())
        if key not in {"handler", "command", "out", "format", "grid", "tol", "seed", "verbose"}
    }
    return RunConfig(
        command=args.command,
        subcommand=subcommand,
        parameters=parameters,
        grid_size=getattr(args, "grid", SEARCH_GRID_SIZE),
        tolerance=getattr(args, "tol", None),
        out_dir=args.out,
        fmt=getattr(args, "format", "json"),
        seed=getattr(args, "seed", None),
    )


def report_name(run: RunConfig) -> str:
    """File stem shared by the outputs of one run."""
    return f"{run.command}-{run.subcommand}" if run.subcommand else run.command


def write_rows_csv(rows: list[dict[str, Any]], path: Path) -> Path:
    pd.json_normalize(rows).to_csv(path, index=False, lineterminator="\n")
    return path


def write_report(run: RunConfig, result: Any) -> Path:
    """Write ``{"command", "config", "result"}`` as JSON, or the flattened result as CSV."""
    payload = result.model_dump(mode="json") if isinstance(result, BaseModel) else result
    run.out_dir.mkdir(parents=True, exist_ok=True)
    path = run.out_dir / f"{report_name(run)}.{run.fmt}"
    if run.fmt == "csv":
        write_rows_csv(payload if isinstance(payload, list) else [payload], path)
    else:
        document = {
            "command": " ".join(filter(None, [run.command, run.subcommand])),
            "config": run.model_dump(mode="json"),
            "result": payload,
        }
        path.write_text(json.dumps(document, indent=2) + "\n")
    logger.info("wrote %s", path)
    return path


def print_table(console: Console, title: str, rows: list[dict[str, Any]]):
    table = Table(title=title)
    if not rows:
        console.print(table)
        return
    flat = pd.json_normalize(rows)
    for column in flat.columns:
        table.add_column(str(column))
    for record in flat.itertuples(index=False):
        table.add_row(*(f"{v:.6g}" if isinstance(v, float) else str(v) for v in record))
    console.print(table)


# Commands


def cmd_solve(args: argparse.Namespace, console: Console) -> int:
    run = run_config(args, args.model)
    pref = preference_from(args)
    model = model_from(args.model, args)
    report = solve_model(args.model, model, pref, run.grid_size)
    write_report(run, report)
    print_table(console, f"{args.model} model, {pref.label()}", [report.model_dump(mode="json")])
    if args.curve or args.plot:
        curve_path = run.out_dir / f"{report_name(run)}-curve.csv"
        curve = curve_of(args.model, model, pref, report.diagnostics.feasible_upper)
        curve.to_csv(curve_path, index=False, lineterminator="\n")
        if args.plot:
            x = curve.columns[0]
            write_plot_script(curve_path, x, "eu", f"Expected utility, {pref.label()}")
    return 0


def cmd_sweep(args: argparse.Namespace, console: Console) -> int:
    run = run_config(args, args.model)
    lo, hi = parse_floats(args.range, "--range", 2)
    if args.steps < 2:
        raise ArgumentError(f"--steps must be at least 2, got {args.steps}")
    values = np.geomspace(lo, hi, args.steps) if args.log else np.linspace(lo, hi, args.steps)
    key = SWEEP_PARAMETERS[args.vary]

    def evaluate(value: float) -> dict[str, Any]:
        overrides = {key: value}
        if key in {"lam", "sigma"}:
            overrides = {"lam": None, "sigma": None, "linear": False, **overrides}
        varied = argparse.Namespace(**{**vars(args), **overrides})
        pref = preference_from(varied)
        report = solve_model(args.model, model_from(args.model, varied), pref, run.grid_size)
        return {"argmax": report.argmax, "max_eu": report.max_eu, "shape": report.shape.value}

    rows = solver.sweep(evaluate, values, name=args.vary)
    path = write_report(run, rows)
    print_table(console, f"sweep over {args.vary}", rows)
    if args.plot:
        csv_path = path if run.fmt == "csv" else write_rows_csv(rows, path.with_suffix(".csv"))
        write_plot_script(csv_path, args.vary, "argmax", f"Optimal investment vs {args.vary}")
    return 0


def cmd_threshold(args: argparse.Namespace, console: Console) -> int:
    run = run_config(args, args.kind)
    bracket = parse_floats(args.wealth, "--wealth", 2) if args.wealth else (0.0, None)
    match args.kind:
        case "lambda":
            model = model_from("prob", args)
            report = solver.lambda_threshold(model, **_tolerance(args, "rtol"))
        case "wealth":
            model = model_from("prob", args)
            report = solver.wealth_threshold(
                model,
                preference_from(args),
                b_lo=bracket[0],
                b_hi=bracket[1],
                grid_size=run.grid_size,
                **_tolerance(args, "atol"),
            )
        case "credit-lambda":
            report = credit.lambda_threshold_credit(
                model_from("credit", args), **_tolerance(args, "rtol")
            )
        case _:
            report = credit.wealth_threshold_credit(
                model_from("credit", args),
                k=args.k,
                b_lo=bracket[0],
                b_hi=bracket[1],
                **_tolerance(args, "atol"),
            )
    write_report(run, report)
    print_table(console, f"{args.kind} threshold", [report.model_dump(mode="json")])
    return 0


def _tolerance(args: argparse.Namespace, name: str) -> dict[str, float]:
    return {name: args.tol} if args.tol is not None else {}


def cmd_calibrate(args: argparse.Namespace, console: Console) -> int:
    run = run_config(args)
    sigmas = parse_floats(args.sigmas, "--sigmas")
    records = calibrate.load_records(args.input)
    groups = calibrate.bin_groups(records, args.groups, args.success_likert)
    core = calibrate.fit_gamma(groups, args.pbar)
    result = calibrate.predict_curves(core, sigmas, args.H, args.L, run.grid_size)

    run.out_dir.mkdir(parents=True, exist_ok=True)
    calibrate.write_groups_csv(result.groups, run.out_dir / "groups.csv")
    curves_path = calibrate.write_curves_csv(result, run.out_dir / "curves.csv")
    summary = {"gamma": result.gamma, "alpha": core.alpha, "mu_max": core.mu_max}
    write_report(run, {**summary, "H": result.H, "L": result.L, "p_bar": result.p_bar})
    if args.plot:
        write_plot_script(
            curves_path, "mean_B", "optimal_p", "Optimal success probability", group="sigma"
        )

    rows = []
    for sigma in sigmas:
        curve = result.curve(sigma)
        idle = [point for point in curve if point.optimal_p == 0.0]
        rows.append(
            {
                "sigma": sigma,
                "groups_not_investing": len(idle),
                "richest_idle_B": max((p.mean_B for p in idle), default=0.0),
            }
        )
    print_table(console, f"calibration, gamma={result.gamma:.6g}", rows)
    return 0


def population_config_from(args: argparse.Namespace) -> expsim.PopulationConfig:
    if args.population is not None:
        return expsim.load_population_config(args.population)
    fields: dict[str, Any] = {"n": args.n, "seed": args.seed}
    if args.wealth:
        fields["wealth_range"] = parse_floats(args.wealth, "--wealth", 2)
    if args.crra_grid:
        fields["family"] = "crra"
        fields["sigma_grid"] = parse_floats(args.crra_grid, "--crra-grid")
    elif args.lambda_log_uniform:
        fields["lambda_range"] = parse_floats(args.lambda_log_uniform, "--lambda-log-uniform", 2)
    return expsim.PopulationConfig(**fields)


def cmd_simulate(args: argparse.Namespace, console: Console) -> int:
    run = run_config(args)
    config = population_config_from(args)
    population = config.draw()
    names = expsim.GAME_NAMES if args.game == "all" else (args.game,)
    results = {name: expsim.simulate(expsim.make_game(name), population) for name in names}

    dispersion = None
    if "probability" in results and "reward" in results:
        dispersion = expsim.dispersion_compare(
            results["probability"].records, results["reward"].records
        )
    run.out_dir.mkdir(parents=True, exist_ok=True)
    records = [record for result in results.values() for record in result.records]
    expsim.write_choices_csv(records, run.out_dir / "choices.csv")
    summaries = [result.summary for result in results.values()]
    expsim.write_summary_json(
        summaries,
        run.out_dir / "summary.json",
        dispersion,
        config,
        run=run.model_dump(mode="json"),
    )

    rows = [
        {
            "game": s.game,
            "mean": s.mean_invested,
            "variance": s.variance,
            "corner_mass": s.corner_mass,
        }
        for s in summaries
    ]
    print_table(console, f"{config.n} {config.family.upper()} agents, seed {config.seed}", rows)
    if dispersion is not None:
        console.print(f"Levene W = {dispersion.levene_w:.4g} (p = {dispersion.levene_p:.3g})")
        console.print(f"{dispersion.risk_averse_agents} of {config.n} agents are risk averse")
    return 0


# Parser


def add_preference_flags(parser: argparse.ArgumentParser):
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--lambda", dest="lam", type=float, help="CARA coefficient")
    group.add_argument("--crra", dest="sigma", type=float, help="CRRA coefficient")
    group.add_argument("--linear", action="store_true", help="Risk-neutral agent")


def add_model_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--B", type=float, default=0.0, help="Initial wealth (default: 0)")
    parser.add_argument("--H", type=float, help="Return on success")
    parser.add_argument("--L", type=float, default=0.0, help="Return on failure (default: 0)")
    parser.add_argument("--alpha", type=float, help="Cost per unit of success probability")
    parser.add_argument("--pbar", type=float, help="Largest attainable success probability")
    parser.add_argument("--p", type=float, help="Success probability of the reward model")
    parser.add_argument("--affine", help="Affine reward H(c) = h0 + m c, given as h0,m")
    parser.add_argument("--power", help="Power reward H(c) = h0 + m c^theta, given as h0,m,theta")
    parser.add_argument("--cmax", type=float, help="Largest investment in the reward model")


def add_output_flags(parser: argparse.ArgumentParser, formats: bool = True):
    parser.add_argument("--out", type=Path, default=Path("."), help="Output directory")
    if formats:
        parser.add_argument(
            "--format", choices=["json", "csv"], default="json", help="Report format"
        )
    parser.add_argument(
        "--grid",
        type=int,
        default=SEARCH_GRID_SIZE,
        help=f"Search grid size for CRRA (default: {SEARCH_GRID_SIZE})",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Debug logging")


def build_parser() -> CliParser:
    parser = CliParser(
        prog="risk-corners",
        description="Optimal risky investment under CARA and CRRA utility",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__.split("\n", 2)[2],
    )
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="Optimal investment for one agent")
    solve.add_argument("model", choices=["prob", "reward", "credit"])
    add_preference_flags(solve)
    add_model_flags(solve)
    add_output_flags(solve)
    solve.add_argument("--curve", action="store_true", help="Also write the EU curve as CSV")
    solve.add_argument("--plot", action="store_true", help="Also write a plot script")
    solve.set_defaults(handler=cmd_solve)

    sweep = commands.add_parser("sweep", help="Optimal investment over a parameter range")
    sweep.add_argument("model", choices=["prob", "reward", "credit"])
    add_preference_flags(sweep)
    add_model_flags(sweep)
    add_output_flags(sweep)
    sweep.add_argument("--vary", choices=list(SWEEP_PARAMETERS), required=True)
    sweep.add_argument("--range", required=True, help="lo,hi")
    sweep.add_argument("--steps", type=int, default=50)
    sweep.add_argument("--log", action="store_true", help="Geometric spacing")
    sweep.add_argument("--plot", action="store_true", help="Also write a plot script")
    sweep.set_defaults(handler=cmd_sweep)

    threshold = commands.add_parser("threshold", help="Risk-aversion or wealth thresholds")
    threshold.add_argument("kind", choices=["lambda", "wealth", "credit-lambda", "credit-wealth"])
    add_preference_flags(threshold)
    add_model_flags(threshold)
    add_output_flags(threshold)
    threshold.add_argument("--tol", type=float, help="Bisection tolerance")
    threshold.add_argument("--wealth", help="Wealth bracket lo,hi (default: 0 and auto-expand)")
    threshold.add_argument(
        "--k", type=float, default=CREDIT_LAMBDA_K, help="lambda(B) = k / B for credit-wealth"
    )
    threshold.set_defaults(handler=cmd_threshold)

    cal = commands.add_parser("calibrate", help="Fit the model to survey records")
    cal.add_argument("--input", type=Path, default=FIXTURE_PATH, help="Survey CSV")
    cal.add_argument("--groups", type=int, default=CALIBRATION_GROUPS)
    cal.add_argument("--sigmas", default=",".join(f"{s:g}" for s in CALIBRATION_SIGMAS))
    cal.add_argument("--H", type=float, default=CALIBRATION_H)
    cal.add_argument("--L", type=float, default=CALIBRATION_L)
    cal.add_argument("--pbar", type=float, default=CALIBRATION_P_BAR)
    cal.add_argument("--success-likert", type=int, default=SUCCESS_LIKERT)
    cal.add_argument("--plot", action="store_true", help="Also write a plot script")
    add_output_flags(cal, formats=True)
    cal.set_defaults(handler=cmd_calibrate)

    sim = commands.add_parser("simulate", help="Synthetic agents playing the investment games")
    sim.add_argument("--game", choices=[*expsim.GAME_NAMES, "all"], default="all")
    sim.add_argument("--n", type=int, default=POPULATION_SIZE)
    sim.add_argument("--seed", type=int, default=POPULATION_SEED)
    sim.add_argument("--lambda-log-uniform", help="CARA population, lambda range lo,hi")
    sim.add_argument("--crra-grid", help="CRRA population, sigmas drawn from s1,s2,...")
    sim.add_argument("--wealth", help="Uniform outside wealth lo,hi")
    sim.add_argument("--population", type=Path, help="Population config as JSON")
    add_output_flags(sim, formats=False)
    sim.set_defaults(handler=cmd_simulate)
    return parser


Handler = Callable[[argparse.Namespace, Console], int]


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    console = Console()
    handler: Handler = args.handler
    try:
        return handler(args, console)
    except VALIDATION_ERRORS as exc:
        status = 2
        error = exc
    except RiskCornersError as exc:
        status = 1
        error = exc
    message = " ".join(str(error).split())
    sys.stderr.write(f"error: {type(error).__name__}: {message}\n")
    return status
