import argparse
import logging
import sys

from config import get_settings
from services import COMMANDS, run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nullcone",
        description="Past null cones, injectivity radii, curvature flux and energy checks for 3+1 metrics.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument("scenario", help="YAML or JSON scenario file, or the name of a bundled scenario.")
        sub.add_argument("--grid-level", type=int, default=None, help="Icosphere refinement of the direction grid.")
        sub.add_argument("--s-max", type=float, default=None, help="Affine parameter horizon.")
        sub.add_argument("--tol", type=float, default=None, help="Relative integrator tolerance.")
        sub.add_argument("--workers", type=int, default=None, help="Worker processes (1 runs inline).")
        sub.add_argument("--force", action="store_true", help="Continue when the budget audit fails.")
        sub.add_argument("--out", default=None, help="Output directory.")
        sub.add_argument("--log-level", default=None, help="Logging level, e.g. DEBUG or INFO.")
    return parser


def main(argv: list[str] | None = None) -> int:
    settings = get_settings()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return run(
        args.command,
        args.scenario,
        grid_level=args.grid_level,
        s_max=args.s_max,
        tol=args.tol,
        workers=args.workers,
        force=args.force,
        out=args.out,
        settings=settings,
    )


if __name__ == "__main__":
    sys.exit(main())
