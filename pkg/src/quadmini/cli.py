"""Command-line front end: patch rank checks, inf-sup sweeps, convergence studies.

Exit codes: 0 success, 2 singular saddle-point system, 3 invalid arguments.
Output formatting is fixed (5-decimal scientific mantissas, 2-decimal
rates) so repeated runs of the same configuration are byte-identical.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

from .mesh import build_dof_maps, build_structured_mesh, level_subdivisions
from .refelem import BubbleKind
from .solver import SingularSystemError
from .stability import (
    build_macro_matrix,
    check_m1,
    counterclockwise_column_order,
    estimate_infsup,
)
from .verify import ErrorReport, run_convergence_study

EXIT_OK = 0
EXIT_SINGULAR = 2
EXIT_BAD_ARGS = 3

#: Largest level the dense inf-sup eigensolve accepts (n = 32 subdivisions).
MAX_INFSUP_LEVEL = 4
MAX_CONVERGE_LEVEL = 6

#: An estimated beta_h at or below this is reported as a singular pairing.
BETA_WARN = 1e-5


@dataclass(frozen=True)
class RunConfig:
    command: str
    bubble: BubbleKind
    example: int | None
    max_level: int
    shear: float
    output_format: str
    output_path: str | None
    plot_path: str | None


class _Parser(argparse.ArgumentParser):
    """argparse's default error exit code (2) is taken by 'singular' here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_BAD_ARGS, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="quadmini", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_bubble(p):
        p.add_argument(
            "--bubble",
            type=BubbleKind,
            choices=list(BubbleKind),
            default=BubbleKind.CORNER,
            metavar="{standard,corner,linear,quadsym}",
        )

    rank = sub.add_parser("rank", help="exact patch coupling matrix, its rank, M1 verdict")
    add_bubble(rank)
    rank.add_argument("--out", dest="output_path", default=None)

    infsup = sub.add_parser("infsup", help="inf-sup constant estimates per refinement level")
    add_bubble(infsup)
    infsup.add_argument("--max-level", type=int, default=MAX_INFSUP_LEVEL)
    infsup.add_argument("--shear", type=float, default=0.0)
    infsup.add_argument("--out", dest="output_path", default=None)
    infsup.add_argument("--plot", dest="plot_path", default=None)

    conv = sub.add_parser("converge", help="manufactured-solution error and rate table")
    add_bubble(conv)
    conv.add_argument("--example", type=int, choices=(1, 2), required=True)
    conv.add_argument("--max-level", type=int, default=MAX_CONVERGE_LEVEL)
    conv.add_argument("--shear", type=float, default=0.0)
    conv.add_argument("--format", dest="output_format", choices=("csv", "markdown"), default="csv")
    conv.add_argument("--out", dest="output_path", default=None)
    conv.add_argument("--plot", dest="plot_path", default=None)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=args.command,
        bubble=getattr(args, "bubble", BubbleKind.CORNER),
        example=getattr(args, "example", None),
        max_level=getattr(args, "max_level", 0),
        shear=getattr(args, "shear", 0.0),
        output_format=getattr(args, "output_format", "csv"),
        output_path=getattr(args, "output_path", None),
        plot_path=getattr(args, "plot_path", None),
    )


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)


def format_rank_report(config: RunConfig) -> str:
    """Exact matrix (fractions, counterclockwise column order) and verdict."""
    matrix = build_macro_matrix(config.bubble)
    order = counterclockwise_column_order()
    labels = [matrix.col_basis[c] for c in order]
    cells = [[str(row[c]) for c in order] for row in matrix.entries]
    widths = [
        max(len(labels[t]), max(len(r[t]) for r in cells)) for t in range(len(order))
    ]
    lines = [f"bubble: {config.bubble.value}"]
    head = "  ".join(lab.rjust(w) for lab, w in zip(labels, widths))
    lines.append(" " * 8 + head)
    for name, row in zip(matrix.row_basis, cells):
        lines.append(name.ljust(8) + "  ".join(v.rjust(w) for v, w in zip(row, widths)))
    report = check_m1(config.bubble)
    lines.append(f"rank = {report.rank}")
    lines.append(f"dim B_i = {report.dim_Bi}")
    lines.append("M1 HOLDS" if report.m1_satisfied else "M1 FAILS")
    return "\n".join(lines) + "\n"


def cmd_rank(config: RunConfig) -> int:
    _emit(format_rank_report(config), config.output_path)
    return EXIT_OK


def cmd_infsup(config: RunConfig) -> int:
    if not 1 <= config.max_level <= MAX_INFSUP_LEVEL:
        sys.stderr.write(
            f"quadmini: error: infsup needs 1 <= --max-level <= {MAX_INFSUP_LEVEL} "
            f"(dense eigensolve), got {config.max_level}\n"
        )
        return EXIT_BAD_ARGS
    lines = ["level,n_elem,beta_h"]
    levels, betas = [], []
    for level in range(1, config.max_level + 1):
        mesh = build_structured_mesh(level_subdivisions(level), shear=config.shear)
        dofs = build_dof_maps(mesh)
        beta = estimate_infsup(mesh, dofs, config.bubble)
        levels.append(level)
        betas.append(beta)
        lines.append(f"{level},{mesh.element_count},{beta:.5e}")
        if beta <= BETA_WARN:
            sys.stderr.write(
                f"warning: beta_h = {beta:.1e} at level {level}: the "
                f"'{config.bubble.value}' pairing has no discrete inf-sup bound\n"
            )
    _emit("\n".join(lines) + "\n", config.output_path)
    if config.plot_path is not None:
        from .plots import save_infsup_figure

        save_infsup_figure(levels, betas, config.bubble.value, config.plot_path)
    return EXIT_OK


def _converge_cells(report: ErrorReport) -> list[list[str]]:
    h1r = report.h1_rates()
    l2r = report.l2_rates()
    pr = report.p_rates()
    rows = []
    for i, row in enumerate(report.rows):
        rate = lambda seq: "" if i == 0 else f"{seq[i - 1]:.2f}"  # noqa: E731
        rows.append(
            [
                str(row.level),
                str(row.n_elem),
                f"{row.h1_u:.5e}",
                rate(h1r),
                f"{row.l2_u:.5e}",
                rate(l2r),
                f"{row.l2_p:.5e}",
                rate(pr),
            ]
        )
    return rows


CONVERGE_HEADER = ["level", "n_elem", "h1_u", "h1_rate", "l2_u", "l2_rate", "l2_p", "p_rate"]


def format_convergence_csv(report: ErrorReport) -> str:
    lines = [",".join(CONVERGE_HEADER)]
    lines += [",".join(cells) for cells in _converge_cells(report)]
    return "\n".join(lines) + "\n"


def format_convergence_markdown(report: ErrorReport) -> str:
    body = _converge_cells(report)
    widths = [
        max(len(h), max(len(row[t]) for row in body)) for t, h in enumerate(CONVERGE_HEADER)
    ]
    fmt = lambda cells: "| " + " | ".join(c.ljust(w) for c, w in zip(cells, widths)) + " |"  # noqa: E731
    lines = [fmt(CONVERGE_HEADER), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines += [fmt(row) for row in body]
    # Companion velocity-error measures, flagged for norm-convention
    # comparisons: the H1 seminorm and the errors of the vertex (bilinear)
    # field with the element-bubble part dropped.
    lines.append("")
    lines.append("companion velocity measures (h1_semi, h1_nodal, l2_nodal):")
    for row in report.rows:
        lines.append(
            f"  level {row.level}: {row.h1_semi:.5e}  {row.h1_nodal:.5e}  {row.l2_nodal:.5e}"
        )
    return "\n".join(lines) + "\n"


def cmd_converge(config: RunConfig) -> int:
    if not 1 <= config.max_level <= MAX_CONVERGE_LEVEL:
        sys.stderr.write(
            f"quadmini: error: converge needs 1 <= --max-level <= {MAX_CONVERGE_LEVEL}, "
            f"got {config.max_level}\n"
        )
        return EXIT_BAD_ARGS
    try:
        report = run_convergence_study(
            config.example, config.bubble, config.max_level, shear=config.shear
        )
    except SingularSystemError as exc:
        note = (
            " (the standard bubble is the known singular choice)"
            if config.bubble is BubbleKind.STANDARD
            else ""
        )
        sys.stderr.write(f"quadmini: singular system: {exc}{note}\n")
        return EXIT_SINGULAR
    if config.output_format == "markdown":
        text = format_convergence_markdown(report)
    else:
        text = format_convergence_csv(report)
    _emit(text, config.output_path)
    if config.plot_path is not None:
        from .plots import save_convergence_figure

        save_convergence_figure(report, config.plot_path)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _config(args)
    if not 0.0 <= config.shear < 0.5:
        sys.stderr.write(
            f"quadmini: error: --shear must lie in [0, 0.5), got {config.shear}\n"
        )
        return EXIT_BAD_ARGS
    handler = {"rank": cmd_rank, "infsup": cmd_infsup, "converge": cmd_converge}[config.command]
    return handler(config)


if __name__ == "__main__":
    sys.exit(main())
