#!/usr/bin/env python3
"""
Main entry point for the gouy matter-wave toolkit.

Commands:
    propagate      time sweep of the pure Gaussian packet
    curves         width, sigma_xp and Gouy phase versus slit width
    fit            fit delta_kx to a measured width dataset
    oracle-verify  closed forms against the numerical oracle
    constants      print the constant table

Exit codes: 0 success, 1 generic error, 2 parse error, 3 ill-posed fit,
4 verification failure.
"""

import argparse
import logging
import sys

from pydantic import ValidationError

from src.app.cli.commands import (
    cmd_constants,
    cmd_curves,
    cmd_fit,
    cmd_oracle_verify,
    cmd_propagate,
    configure_logging,
)
from src.app.cli.models import load_run_config
from src.app.core.errors import DatasetParseError, IllPosedFitError

EXIT_OK, EXIT_ERROR, EXIT_PARSE, EXIT_ILL_POSED, EXIT_VERIFICATION = 0, 1, 2, 3, 4

# command-line flag -> run config key
FLAG_KEYS = {
    "out": "output.dir",
    "dkx": "coherence.delta_kx",
    "t": "experiment.t_s",
    "b": "packet.b_m",
    "vz": "particle.v_z",
    "detector_fwhm": "detector.fwhm_m",
    "slit_factor": "experiment.slit_factor",
    "kernel": "detector.kernel",
    "theta_convention": "experiment.theta_convention",
}

logger = logging.getLogger("gouy")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Run config file (key=value)")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--dkx", type=float, help="Transverse momentum spread delta_kx (1/m)")
    common.add_argument("--t", type=float, help="Time of flight (s)")
    common.add_argument("--b", type=float, help="Initial packet width b (m)")
    common.add_argument("--vz", type=float, help="Longitudinal velocity (m/s)")
    common.add_argument("--detector-fwhm", type=float, help="Detector resolution FWHM (m)")
    common.add_argument("--slit-factor", type=float, help="Slit width to b factor")
    common.add_argument("--kernel", choices=["gaussian", "tophat"], help="Detector kernel")
    common.add_argument(
        "--theta-convention",
        choices=["sigma", "sqrt2-sigma"],
        help="Angular divergence convention",
    )
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(description="Matter-wave Gouy phase toolkit")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("propagate", parents=[common], help="Pure packet time sweep")
    commands.add_parser("curves", parents=[common], help="Slit-width curves (CSV + SVG)")
    fit = commands.add_parser("fit", parents=[common], help="Fit delta_kx to a dataset")
    fit.add_argument("dataset", help="CSV with slit_width_m,fwhm_m[,vdw_flag,weight]")
    commands.add_parser("oracle-verify", parents=[common], help="Numeric oracle suite")
    commands.add_parser("constants", parents=[common], help="Print the constant table")
    return parser


def run(argv=None) -> int:
    """Parse arguments, run one command and return its exit code.

    Args:
        argv: Command-line arguments without the program name; None reads sys.argv.

    Returns:
        The process exit code.
    """
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    overrides = {key: getattr(args, flag) for flag, key in FLAG_KEYS.items()}

    try:
        config = load_run_config(args.config, overrides)
    except (DatasetParseError, ValidationError) as e:
        logger.error(f"Config error: {e}")
        return EXIT_PARSE

    try:
        if args.command == "propagate":
            for path in cmd_propagate(config):
                print(path)
        elif args.command == "curves":
            for path in cmd_curves(config):
                print(path)
        elif args.command == "fit":
            result = cmd_fit(config, args.dataset)
            print(f"delta_kx = {result.delta_kx:.6e} +- {result.parameter_stderr:.2e} 1/m")
            if not result.converged:
                logger.error(f"Fit did not converge: {result.message}")
                return EXIT_ERROR
        elif args.command == "oracle-verify":
            report = cmd_oracle_verify(config)
            print(f"{len(report.rows) - len(report.failures)}/{len(report.rows)} checks passed")
            if not report.passed:
                for row in report.failures:
                    logger.error(f"Verification failed: {row.case} {row.quantity}")
                return EXIT_VERIFICATION
        elif args.command == "constants":
            print(cmd_constants(config), end="")
    except DatasetParseError as e:
        logger.error(f"Parse error: {e}")
        return EXIT_PARSE
    except IllPosedFitError as e:
        logger.error(f"Ill-posed fit: {e}")
        return EXIT_ILL_POSED
    except Exception as e:
        logger.error(f"An error occurred: {e}")
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    try:
        sys.exit(run())
    except KeyboardInterrupt:
        print("\nStopped by user")
        sys.exit(EXIT_ERROR)
