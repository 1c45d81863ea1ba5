# Standard library imports
import argparse
import sys

# Local project-specific imports
from src.assets.config import load_config, parse_config
from src.assets.custom_errors import ConfigValidationError, ExperimentError
from src.experiments.harness import run_experiment

EXIT_OK: int = 0
EXIT_FAILURE: int = 1
EXIT_CONFIG_ERROR: int = 2
EXIT_CHECK_FAILED: int = 3

# Subcommand -> experiment type
COMMANDS: dict[str, str] = {
    "fit": "fit",
    "counterexample": "counterexample",
    "rate-sweep": "rate_sweep",
    "audit": "audit",
    "graph": "graph",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.main",
        description="Bayesian variable selection for GLMs: fits, counterexample, rate sweeps, "
                    "condition audits and graph experiments.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=f"Run the {COMMANDS[command]} experiment.")
        sub.add_argument("--config", help="Path to the JSON configuration.")
        sub.add_argument("--out", help="Output directory (overrides output_dir).")
        sub.add_argument("--seed", type=int, help="Master seed, unsigned 64-bit (overrides seed).")
        sub.add_argument("--replicates", type=int, help="Number of replicates (overrides replicates).")
        sub.add_argument("--threads", type=int, default=1, help="Worker processes (default 1).")
        sub.add_argument("--check", action="store_true",
                         help="Exit with code 3 when an acceptance check fails.")
    return parser


def main(argv: list[str] | None = None) -> int:
    """
    Parses the command line, runs the experiment and returns the exit code.

    Exit codes: 0 success, 1 run failure, 2 configuration error, 3 failed acceptance check
    (only with --check).
    """
    args = build_parser().parse_args(argv)
    experiment = COMMANDS[args.command]
    try:
        config = load_config(args.config, experiment) if args.config else parse_config("{}", experiment)
        config = config.with_overrides(seed=args.seed, replicates=args.replicates, output_dir=args.out)
    except ConfigValidationError as config_err:
        print(f"❌ [ERROR] Invalid configuration:\n{config_err}")
        return EXIT_CONFIG_ERROR

    if args.threads < 1:
        print("❌ [ERROR] --threads must be at least 1.")
        return EXIT_CONFIG_ERROR

    try:
        result = run_experiment(config, threads=args.threads)
    except ExperimentError as exp_err:
        print(f"❌ [ERROR] {exp_err}")
        print("⚠️ [WARNING] The run failure is recorded in the manifest.")
        return EXIT_FAILURE

    if args.check and not result.checks_passed:
        print("❌ [ERROR] Acceptance checks failed.")
        return EXIT_CHECK_FAILED
    return EXIT_OK


# Check if the script is being run as the main program
if __name__ == "__main__":
    sys.exit(main())
