import argparse
import logging

from ppt_discrimination import __version__
from ppt_discrimination.actions.bound import register_cli as register_bound_cli
from ppt_discrimination.actions.certify import register_cli as register_certify_cli
from ppt_discrimination.actions.examples import register_cli as register_examples_cli
from ppt_discrimination.actions.solve import register_cli as register_solve_cli
from ppt_discrimination.conic import SolverError
from ppt_discrimination.discrim import VerificationError

logging.basicConfig(level=logging.INFO, format="%(levelname)s:%(asctime)s:%(name)s:%(message)s")
logger = logging.getLogger("cli")

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_SOLVER_ERROR = 2


def main() -> int:
    parser = argparse.ArgumentParser(
        description="Bounds and optimal measurements for discriminating bipartite quantum states "
        "with PPT measurements."
    )
    parser.add_argument("--debug", action="store_true", help="Log debug messages.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparser = parser.add_subparsers(title="subcommands", required=True)
    register_solve_cli(subparser)
    register_bound_cli(subparser)
    register_certify_cli(subparser)
    register_examples_cli(subparser)
    args = parser.parse_args()
    if args.debug:
        logging.getLogger().setLevel(logging.DEBUG)
    return args.action(args)


def entry_point() -> int:
    try:
        return main()
    except SolverError as e:
        logger.error("Solver did not reach an optimal solution: %s", e)
        logger.error("Build metadata: %r", e.metadata)
        return EXIT_SOLVER_ERROR
    except VerificationError as e:
        logger.error("Computed result failed its independent verification: %s", e)
        return EXIT_INPUT_ERROR
    except Exception as e:
        logger.exception("Cannot complete the command. Reason: %r", e)
        return EXIT_INPUT_ERROR
