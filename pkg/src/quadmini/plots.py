"""Figure rendering for the CLI report paths.

Figures are always written to files (Agg backend, no display); the CLI
offers them alongside the delimited output via --plot.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .verify import ErrorReport


def save_convergence_figure(report: ErrorReport, path: str) -> None:
    """Log-log error-vs-h plot with first- and second-order reference slopes."""
    h = [1.0 / (row.n_elem ** 0.5) for row in report.rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ax.loglog(h, [r.h1_u for r in report.rows], "o-", label="velocity H1")
    ax.loglog(h, [r.l2_u for r in report.rows], "s-", label="velocity L2")
    ax.loglog(h, [r.l2_p for r in report.rows], "^-", label="pressure L2")
    for slope, style in ((1, "k--"), (2, "k:")):
        anchor = report.rows[-1].h1_u if slope == 1 else report.rows[-1].l2_u
        ref = [anchor * (hi / h[-1]) ** slope for hi in h]
        ax.loglog(h, ref, style, linewidth=0.8, label=f"slope {slope}")
    ax.set_xlabel("h")
    ax.set_ylabel("error")
    ax.set_title(f"case {report.case_id}, bubble '{report.bubble.value}', shear {report.shear:g}")
    ax.grid(True, which="both", linewidth=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_infsup_figure(levels, betas, bubble, path: str) -> None:
    """Inf-sup constant against refinement level (flat curve = mesh-uniform bound)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(list(levels), list(betas), "o-")
    ax.set_xlabel("refinement level")
    ax.set_ylabel(r"$\beta_h$")
    ax.set_ylim(bottom=0.0)
    ax.set_xticks(list(levels))
    ax.set_title(f"inf-sup estimate, bubble '{bubble}'")
    ax.grid(True, linewidth=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
