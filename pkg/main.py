"""
StockFlow · Command-Line Entry Point
Subcommands: calibrate, run, sensitivity
Run with: python main.py run --config configs/forward_demo.yaml --out outputs/forward
"""

import argparse
import sys

from scripts.config import config
from scripts.errors import ValidationError
from scripts.logger import get_logger

logger = get_logger("stockflow.main")


def _window(text: str) -> tuple[int, int]:
    try:
        first, last = (int(part) for part in text.split("-"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"window must look like 1980-2010, got {text!r}") from e
    return first, last


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stockflow",
        description="Depletion kinetics of cost-distributed energy resources",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    calibrate = sub.add_parser("calibrate", help="Estimate ν₀ from reserve and production history")
    calibrate.add_argument("--rp-csv", required=True, help="CSV with year,region,reserves,production")
    calibrate.add_argument("--out", required=True, help="Output directory")
    calibrate.add_argument("--window", type=_window, help="Inclusive year window, e.g. 1980-2010")
    calibrate.add_argument("--scope", nargs="+", help="Regions to aggregate (default: all)")
    calibrate.add_argument("--unit-factor", type=float, default=1.0,
                           help="Multiplier converting reserves and production to EJ")

    run = sub.add_parser("run", help="Run a scenario config")
    run.add_argument("--config", required=True, help="Scenario YAML file")
    run.add_argument("--out", help=f"Output directory (default: {config.OUTPUT_DIR}/<scenario name>)")
    run.add_argument("--seed", type=int, help="Override the scenario seed")
    run.add_argument("--threads", type=int, help=f"Ensemble worker threads (default: {config.THREADS})")

    sens = sub.add_parser("sensitivity", help="Sweep ν₀ for one resource of a scenario")
    sens.add_argument("--config", required=True, help="Scenario YAML file")
    sens.add_argument("--out", help="Output directory")
    sens.add_argument("--nu0-inverse", type=float, nargs="*", help="ν₀⁻¹ values in years, e.g. 34 44 54")
    sens.add_argument("--resource", help="Resource to sweep (default: from the config)")
    sens.add_argument("--seed", type=int, help="Override the scenario seed")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    for problem in config.validate():
        logger.warning(f"⚠️ {problem}")

    from cli.commands import EXIT_OK, cmd_calibrate, cmd_run, cmd_sensitivity, exit_code_for
    try:
        if args.command == "calibrate":
            cmd_calibrate(args.rp_csv, args.out, args.window, args.scope, args.unit_factor)
        elif args.command == "run":
            if args.threads is not None and args.threads < 1:
                raise ValidationError(f"--threads must be >= 1, got {args.threads}")
            cmd_run(args.config, args.out, args.seed, args.threads)
        else:
            cmd_sensitivity(args.config, args.out, args.nu0_inverse, args.resource, args.seed)
    except Exception as e:
        code = exit_code_for(e)
        errors = e.errors if isinstance(e, ValidationError) else [str(e)]
        for message in errors:
            logger.error(message)
        print(f"error: {'; '.join(errors)}", file=sys.stderr)
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
