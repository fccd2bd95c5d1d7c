import argparse
import logging
from pathlib import Path
from typing import Final

from ppt_discrimination.actions.report import solve_report_to_dict, write_report
from ppt_discrimination.actions.statesets import resolve_state_set
from ppt_discrimination.conic import SolveOptions
from ppt_discrimination.constants import MAX_DENSE_SCHUR_ROWS, MAX_EMBEDDED_BLOCK_ORDER
from ppt_discrimination.discrim import SolveReport, solve_instance
from ppt_discrimination.types import Cone, Mode
from ppt_discrimination.utils import env_gap_tol

logger = logging.getLogger("cli")

SUBCMD_DESCRIPTION: Final = f"""\
Solve a discrimination problem and print the optimal success probability together with
the certified upper bound. Lattice states are solved through a linear program and generalized
Bell states through a reduced semidefinite program unless --force-sdp is given.

* Minimum-error PPT discrimination of a built-in set:

    pptdiscrim solve --set yde4 --mode min-error --cone ppt

* Unambiguous discrimination with a JSON report:

    pptdiscrim solve --set yde4 --mode unambiguous --out yde4-unambiguous.json

* A state set file, with the full semidefinite program:

    pptdiscrim solve --set ./states.yaml --force-sdp

The environment variable PPTDISCRIM_TOL sets the default of --tol.

The full semidefinite program is limited to {MAX_DENSE_SCHUR_ROWS} constraint rows and to
blocks of real order {MAX_EMBEDDED_BLOCK_ORDER}. Larger problems, for example --force-sdp on
pow2_3 or gbell6, stop with an error; their reduced formulations are not affected.
"""


def arg_type_mode(value: str) -> Mode:
    try:
        return Mode(value.replace("-", "_"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Unknown mode {value}, expected min-error or unambiguous")


def arg_type_cone(value: str) -> Cone:
    try:
        return Cone(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Unknown cone {value}, expected ppt or psd")


def arg_type_tol(value: str) -> float:
    try:
        tol = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Tolerance {value} is not a number")
    if not tol > 0:
        raise argparse.ArgumentTypeError(f"Tolerance must be positive, got {value}")
    return tol


def add_set_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-s",
        "--set",
        metavar="NAME_OR_PATH",
        dest="state_set",
        required=True,
        help="A built-in example set (see the examples command) or the path of a state set file "
        "in JSON or YAML.",
    )


def add_out_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-o",
        "--out",
        metavar="PATH",
        type=Path,
        help="Write the JSON report to this file.",
    )


def register_cli(subparser) -> None:
    solve_parser = subparser.add_parser(
        "solve",
        help="Compute the optimal PPT (or global) success probability of a state set.",
        description=SUBCMD_DESCRIPTION,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    add_set_argument(solve_parser)
    solve_parser.add_argument(
        "-m",
        "--mode",
        type=arg_type_mode,
        default=Mode.MIN_ERROR,
        help="min-error or unambiguous. Defaults to min-error.",
    )
    solve_parser.add_argument(
        "-c",
        "--cone",
        type=arg_type_cone,
        default=Cone.PPT,
        help="ppt restricts every measurement operator to be PPT, psd allows any measurement. "
        "Defaults to ppt.",
    )
    solve_parser.add_argument(
        "--force-sdp",
        action="store_true",
        help="Always solve the full semidefinite program, even for lattice or generalized Bell "
        "states.",
    )
    solve_parser.add_argument(
        "-t",
        "--tol",
        type=arg_type_tol,
        help="Relative duality gap tolerance of the solver.",
    )
    add_out_argument(solve_parser)
    solve_parser.set_defaults(action=action)


def format_value(value: float) -> str:
    return str(round(value, 6))


def print_solve_summary(report: SolveReport) -> None:
    rows = [
        ("instance", report.instance["name"]),
        ("mode", str(report.mode)),
        ("cone", str(report.cone)),
        ("path", str(report.path)),
        ("optimal value", format_value(report.primal_value)),
        ("dual bound", format_value(report.dual_value)),
        ("duality gap", f"{report.gap:.3e}"),
    ]
    if report.eq3_bound is not None:
        rows.append(("eq3 bound", format_value(report.eq3_bound)))
    if report.theorem1_bound is not None:
        rows.append(("d/k bound", format_value(report.theorem1_bound)))
    for label, value in zip(report.instance["labels"], report.per_state):
        rows.append((f"<P, {label}>", format_value(value)))
    width = max(len(label) for label, _ in rows)
    for label, value in rows:
        print(f"{label.ljust(width)}  {value}")


def action(args) -> int:
    inst = resolve_state_set(args.state_set)
    tol = args.tol if args.tol is not None else env_gap_tol()
    report = solve_instance(
        inst,
        mode=args.mode,
        cone=args.cone,
        force_sdp=args.force_sdp,
        opts=SolveOptions(tol_gap=tol),
    )
    print_solve_summary(report)
    if args.out:
        write_report(args.out, solve_report_to_dict(report))
    return 0
