import argparse
import logging
from typing import Final

from ppt_discrimination.actions.report import bound_report_to_dict, write_report
from ppt_discrimination.actions.solve import (
    add_out_argument,
    add_set_argument,
    arg_type_tol,
    format_value,
)
from ppt_discrimination.actions.statesets import resolve_state_set
from ppt_discrimination.conic import SolveOptions
from ppt_discrimination.discrim import eq3_bound
from ppt_discrimination.utils import env_gap_tol

logger = logging.getLogger("cli")

SUBCMD_DESCRIPTION: Final = """\
Compute upper bounds on the PPT success probability without solving for a measurement:
the transposed-state bound min (1/k)Tr(Y) over Y >= w_j T_A(rho_j), and for sets of maximally
entangled states on C^d x C^d the analytic bound d/k.

    pptdiscrim bound --set pow2_3
    pptdiscrim bound --set bell_basis --out bell-bound.json
"""


def register_cli(subparser) -> None:
    bound_parser = subparser.add_parser(
        "bound",
        help="Upper-bound the PPT success probability of a state set.",
        description=SUBCMD_DESCRIPTION,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_set_argument(bound_parser)
    bound_parser.add_argument(
        "--force-sdp",
        action="store_true",
        help="Solve the bound as a full semidefinite program even for lattice or generalized Bell "
        "states.",
    )
    bound_parser.add_argument(
        "-t",
        "--tol",
        type=arg_type_tol,
        help="Relative duality gap tolerance of the solver.",
    )
    add_out_argument(bound_parser)
    bound_parser.set_defaults(action=action)


def action(args) -> int:
    inst = resolve_state_set(args.state_set)
    tol = args.tol if args.tol is not None else env_gap_tol()
    report = eq3_bound(inst, SolveOptions(tol_gap=tol), force_sdp=args.force_sdp)
    print(f"instance   {inst.name}")
    print(f"eq3 bound  {format_value(report.bound)}")
    if report.theorem1_bound is None:
        print("d/k bound  not applicable")
    else:
        print(f"d/k bound  {format_value(report.theorem1_bound)}")
    if args.out:
        write_report(args.out, bound_report_to_dict(report, inst))
    return 0
