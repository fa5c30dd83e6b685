import sys
from argparse import ArgumentParser, ArgumentTypeError, Namespace
from pathlib import Path

import numpy as np
from dotenv import dotenv_values

from relay_allocator.config import (
    CONFIG_FILE_KEYS,
    DEFAULT_DUAL_UPDATE,
    DEFAULT_EPSILON,
    DEFAULT_MAX_ITERS,
    DEFAULT_MIN_ITERS,
    DEFAULT_MU,
    DEFAULT_N_SUBCARRIERS,
    DEFAULT_N_TAPS,
    DEFAULT_REALIZATIONS,
    DEFAULT_SEED,
    DEFAULT_SNR_DB,
    DEFAULT_STEP0,
    DEFAULT_STEP_RULE,
    DEFAULT_WORKERS,
)
from relay_allocator.constants import DualUpdate, Scheme, StepRule
from relay_allocator.dtos import SolverConfig
from relay_allocator.exceptions import ConfigError, RelayAllocatorError
from relay_allocator.log import Log
from relay_allocator.main import ExperimentRunner

RUNTIME_ERROR = 1


def get_defaults() -> dict[str, object]:
    return {
        "mu": DEFAULT_MU,
        "epsilon": DEFAULT_EPSILON,
        "max_iters": DEFAULT_MAX_ITERS,
        "min_iters": DEFAULT_MIN_ITERS,
        "step0": DEFAULT_STEP0,
        "step_rule": DEFAULT_STEP_RULE,
        "dual_update": DEFAULT_DUAL_UPDATE,
        "n": DEFAULT_N_SUBCARRIERS,
        "taps": DEFAULT_N_TAPS,
        "realizations": DEFAULT_REALIZATIONS,
        "workers": DEFAULT_WORKERS,
    }


def get_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument(
        "--config", default=None, help="KEY=value file with solver and run settings"
    )
    common.add_argument(
        "--seed", type=int, default=DEFAULT_SEED, help=f"Master seed. (default: {DEFAULT_SEED})"
    )
    common.add_argument("--mu", type=float, default=None, help="MA phase fraction in (0, 1)")
    common.add_argument("--n", type=int, default=None, help="Number of subcarriers")
    common.add_argument("--taps", type=int, default=None, help="Channel taps per link")

    parser = ArgumentParser(
        description="Power allocation for two-way DF OFDM relaying", add_help=True
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen = commands.add_parser(
        "gen-channels", parents=[common], help="Write seeded channel fixtures"
    )
    gen.add_argument("--realizations", type=int, default=None, help="Number of fixtures to write")
    gen.add_argument("--out", default="channels", help="Output directory. (default: channels)")

    solve = commands.add_parser("solve", parents=[common], help="Solve one channel fixture")
    solve.add_argument("--channel", required=True, help="Channel fixture file")
    solve.add_argument(
        "--scheme",
        default=Scheme.TYPE1_OPT.value,
        choices=[scheme.value for scheme in Scheme],
        help=f"Allocation scheme. (default: {Scheme.TYPE1_OPT.value})",
    )
    solve.add_argument("--budget", type=float, default=None, help="Power budget of every node")
    solve.add_argument("--snr-db", default=None, help="Per-subcarrier SNR setting the budgets")
    solve.add_argument("--out", default=None, help="Power allocation file to write")

    sweep = commands.add_parser("sweep", parents=[common], help="Monte Carlo rate-vs-SNR sweep")
    sweep.add_argument(
        "--snr-db",
        default=DEFAULT_SNR_DB,
        help=f"'start:stop:step' or a comma list. (default: {DEFAULT_SNR_DB})",
    )
    sweep.add_argument(
        "--schemes",
        default=",".join(scheme.value for scheme in Scheme),
        help="Comma-separated schemes to run",
    )
    sweep.add_argument("--realizations", type=int, default=None, help="Realizations per SNR point")
    sweep.add_argument("--workers", type=int, default=None, help="Worker processes")
    sweep.add_argument("--out", default="sweep.csv", help="CSV file. (default: sweep.csv)")
    return parser


def parse_snr_list(text: str) -> list[float]:
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
            if step <= 0 or stop < start:
                raise ArgumentTypeError(f"'{text}' is an empty SNR range.")
            count = int(np.floor((stop - start) / step + 1e-9)) + 1
            return [round(start + index * step, 10) for index in range(count)]
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ArgumentTypeError(f"'{text}' is an invalid SNR list.") from e
    if not values:
        raise ArgumentTypeError("the SNR list is empty.")
    return values


def parse_schemes(text: str) -> list[Scheme]:
    try:
        return [Scheme(part.strip().lower()) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ArgumentTypeError(f"'{text}' holds an invalid scheme.") from e


def read_config_file(path: str) -> dict[str, object]:
    if not Path(path).is_file():
        raise ConfigError(f"config file '{path}' does not exist")
    settings = {}
    for key, value in dotenv_values(path).items():
        key = key.lower()
        if key not in CONFIG_FILE_KEYS:
            raise ConfigError(f"unknown config key '{key}' in {path}")
        if value is None:
            raise ConfigError(f"config key '{key}' has no value in {path}")
        try:
            settings[key] = CONFIG_FILE_KEYS[key](value)
        except ValueError as e:
            raise ConfigError(f"bad value for '{key}' in {path}: {value}") from e
    return settings


def parser_option(args: Namespace) -> Namespace:
    """Fill unset settings from the config file, then from the environment defaults."""
    from_file = read_config_file(args.config) if args.config else {}
    for key, default in get_defaults().items():
        if getattr(args, key, None) is None:
            setattr(args, key, from_file.get(key, default))

    if getattr(args, "snr_db", None) is not None:
        args.snr_db = parse_snr_list(str(args.snr_db))
    if getattr(args, "schemes", None) is not None:
        args.schemes = parse_schemes(args.schemes)
    if args.command == "solve" and args.budget is None:
        if args.snr_db is None or len(args.snr_db) != 1:
            raise ArgumentTypeError("solve needs --budget or a single --snr-db value.")
    return args


def get_solver_config(args: Namespace) -> SolverConfig:
    try:
        step_rule = StepRule(args.step_rule)
    except ValueError as e:
        raise ConfigError(f"unknown step rule '{args.step_rule}'") from e
    try:
        dual_update = DualUpdate(args.dual_update)
    except ValueError as e:
        raise ConfigError(f"unknown dual update '{args.dual_update}'") from e
    return SolverConfig(
        epsilon=args.epsilon,
        max_iters=args.max_iters,
        step0=args.step0,
        step_rule=step_rule,
        min_iters=args.min_iters,
        dual_update=dual_update,
    )


def run_command(args: Namespace, runner: ExperimentRunner) -> None:
    if args.command == "gen-channels":
        runner.run_gen_channels(args.out, args.realizations, args.n, args.taps, args.seed)
    elif args.command == "solve":
        runner.run_solve(
            channel_path=args.channel,
            scheme=Scheme(args.scheme),
            mu=args.mu,
            budget=args.budget,
            snr_db=args.snr_db[0] if args.snr_db else None,
            out_path=args.out,
        )
    else:
        runner.run_sweep(
            snr_db=args.snr_db,
            realizations=args.realizations,
            seed=args.seed,
            schemes=args.schemes,
            n_subcarriers=args.n,
            n_taps=args.taps,
            mu=args.mu,
            out_path=args.out,
        )


def main() -> None:
    parser = get_parser()
    args = parser.parse_args()
    try:
        args = parser_option(args)
        runner = ExperimentRunner(
            logger=Log(), solver_config=get_solver_config(args), workers=args.workers
        )
    except (ArgumentTypeError, ConfigError) as e:
        parser.error(str(e))

    try:
        run_command(args, runner)
    except RelayAllocatorError as e:
        print(f"error: {e}", file=sys.stderr)
        sys.exit(RUNTIME_ERROR)


if __name__ == "__main__":
    main()
