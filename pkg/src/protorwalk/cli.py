"""Command-line entry point: ``protorwalk <command> [flags]``.

Exit status is 0 iff every test in the command's report passes.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .harness import COMMANDS, ExperimentConfig
from .io import read_overrides

DEFAULT_SAMPLES = {"simulate": 1, "verify": 100, "compare": 10_000,
                   "recurrence": 1_000, "perturb": 10_000}
DEFAULT_STEPS = {"recurrence": 100_000}


def _times(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad time list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=float, default=0.75, help="broken-rotor probability")
    common.add_argument("--alpha", type=float, default=1.0)
    common.add_argument("--beta", type=float, default=0.0)
    common.add_argument("--steps", type=int, help="walk length n")
    common.add_argument("--samples", type=int, help="number of trajectories / samples N")
    common.add_argument("--grid-steps", type=int, default=10_000)
    common.add_argument("--times", type=_times, default=(0.25, 0.5, 1.0),
                        help="comma-separated marginal times in (0, 1]")
    common.add_argument("--seed", type=int, default=0, help="master seed")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--out", help="output directory")
    common.add_argument("--significance", type=float, default=0.01)
    common.add_argument("--overrides", help="CSV of (site, rotor) pinned initial rotors")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="protorwalk", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sim = sub.add_parser("simulate", parents=[common], help="write trajectory CSVs")
    sim.add_argument("--streaming", action="store_true",
                     help="write one endpoint summary instead of full trajectories")
    sub.add_parser("verify", parents=[common], help="exact identity suite")
    sub.add_parser("compare", parents=[common], help="KS comparison with the scaling limit")
    sub.add_parser("recurrence", parents=[common], help="finite-horizon recurrence check")
    sub.add_parser("perturb", parents=[common],
                   help="compare with and without pinned initial rotors")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    return ExperimentConfig(
        command=args.command, p=args.p, alpha=args.alpha, beta=args.beta,
        steps=args.steps or DEFAULT_STEPS.get(args.command, 10_000),
        samples=args.samples or DEFAULT_SAMPLES[args.command],
        grid_steps=args.grid_steps, times=args.times, seed=args.seed,
        workers=args.workers, out=args.out, significance=args.significance,
        overrides=read_overrides(args.overrides) if args.overrides else {},
        streaming=getattr(args, "streaming", False),
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = config_from_args(args)
        report = COMMANDS[args.command](config)
    except (OSError, ValueError) as exc:
        print(f"protorwalk: error: {exc}", file=sys.stderr)
        return 2
    if config.out is None:
        sys.stdout.write(report.dumps())
    for t in report.tests:
        status = "PASS" if t["pass"] else "FAIL"
        print(f"{status} {t['test']}", file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
