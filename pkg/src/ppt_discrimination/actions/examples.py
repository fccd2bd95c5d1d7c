import logging

from ppt_discrimination.states import EXAMPLE_REFERENCES, example_set

logger = logging.getLogger("cli")


def register_cli(subparser) -> None:
    examples_parser = subparser.add_parser(
        "examples",
        help="List the built-in state sets with their dimensions and reference values.",
    )
    examples_parser.set_defaults(action=action)


def action(args) -> int:
    rows = []
    for name, (description, reference) in EXAMPLE_REFERENCES.items():
        inst = example_set(name)
        rows.append((name, f"{inst.dim_a}x{inst.dim_b}", f"k={inst.k}", reference, description))
    widths = [max(len(row[i]) for row in rows) for i in range(4)]
    for row in rows:
        cells = [cell.ljust(width) for cell, width in zip(row, widths)]
        print("  ".join([*cells, row[4]]))
    return 0
