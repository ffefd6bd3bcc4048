"""Exact patch-level stability analysis and numerical inf-sup estimation.

The decisive object is the coupling matrix D of the 2x2-element vertex
patch: rows are the 9 bilinear pressure hats on the patch's 3x3 vertex
grid, columns the 10 interior velocity dofs (4 bubbles + the central
vertex hat, times 2 components), entries the exact rational integrals
of pressure times velocity-derivative.  rank(D) = 8 means the only patch
pressure orthogonal to every interior velocity is the constant, which is
the local condition guaranteeing a mesh-uniform inf-sup bound; rank 7
leaves a spurious pressure mode and a singular global system.

Everything on the patch is computed in exact rational arithmetic; no
floating point enters until the separate mesh-level eigenvalue estimate
of the inf-sup constant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import scipy.linalg
from scipy.sparse.linalg import splu

from .assembly import (
    assemble_divergence,
    assemble_mean_weights,
    assemble_pressure_mass,
    assemble_velocity_gram,
)
from .mesh import DofMap, Mesh, build_dof_maps, build_structured_mesh, level_subdivisions
from .poly import ONE, Poly2, X, Y
from .refelem import BubbleKind, bubble

#: The four patch cells (lower-left offsets), row-major.  This is also the
#: column order of MacroMatrix: one (x, y) column pair per cell's bubble,
#: then the pair for the central vertex hat.
MACRO_CELLS = ((0, 0), (1, 0), (0, 1), (1, 1))

#: Largest mesh subdivision count accepted by the dense inf-sup eigensolve.
MAX_INFSUP_SUBDIVISIONS = 32


@dataclass(frozen=True)
class MacroMatrix:
    """Exact 9 x 10 patch coupling matrix with labelled bases."""

    entries: tuple[tuple[Fraction, ...], ...]
    row_basis: tuple[str, ...]
    col_basis: tuple[str, ...]


@dataclass(frozen=True)
class StabilityReport:
    bubble: BubbleKind
    rank: int
    dim_Bi: int
    m1_satisfied: bool
    infsup_by_level: tuple[tuple[int, float], ...] = field(default_factory=tuple)


def _corner_hat(cx: int, cy: int) -> Poly2:
    """Reference-square bilinear hat that is 1 at corner (cx, cy) in {0,1}^2."""
    return (X if cx else ONE - X) * (Y if cy else ONE - Y)


@lru_cache(maxsize=None)
def macro_patch_functions(kind: BubbleKind):
    """Patch basis functions as cell-supported pieces.

    Returns (pressures, velocities); each function is a dict mapping a patch
    cell to its local polynomial on that cell's own (0,1)^2 coordinates.
    Pressures: the 9 vertex hats of the 3x3 grid, row-major.  Velocities:
    the 4 interior scalar bubbles (cell order MACRO_CELLS) and the hat of
    the central vertex (1,1) -- the patch's only interior vertex.
    """
    pressures = []
    for gy in range(3):
        for gx in range(3):
            supp = {}
            for ox, oy in MACRO_CELLS:
                cx, cy = gx - ox, gy - oy
                if cx in (0, 1) and cy in (0, 1):
                    supp[(ox, oy)] = _corner_hat(cx, cy)
            pressures.append(supp)
    b = bubble(BubbleKind(kind))
    velocities = [{cell: b} for cell in MACRO_CELLS]
    velocities.append({(ox, oy): _corner_hat(1 - ox, 1 - oy) for ox, oy in MACRO_CELLS})
    return tuple(pressures), tuple(velocities)


@lru_cache(maxsize=None)
def _macro_tensor(kind: BubbleKind):
    """Exact tensor T[j][k][i] = ∫_patch psi_j * d_i phi_k, cell by cell."""
    pressures, velocities = macro_patch_functions(kind)
    tensor = [[[Fraction(0), Fraction(0)] for _ in velocities] for _ in pressures]
    for j, psi in enumerate(pressures):
        for k, phi in enumerate(velocities):
            for cell in psi.keys() & phi.keys():
                for i, var in enumerate(("x", "y")):
                    tensor[j][k][i] += (psi[cell] * phi[cell].diff(var)).integrate_unit_square()
    return tensor


def build_macro_matrix(
    kind: BubbleKind, jacobian: tuple[tuple[Fraction, ...], ...] | None = None
) -> MacroMatrix:
    """Exact patch coupling matrix D for the given bubble kind.

    With ``jacobian`` (an exact 2x2 matrix of rationals, positive
    determinant) the patch is mapped affinely before differentiating, i.e.
    entries become |det A| * sum_i A^{-T}[c,i] T[j,k,i]; the rank is
    unaffected, which the test suite checks rather than assumes.
    """
    kind = BubbleKind(kind)
    tensor = _macro_tensor(kind)
    if jacobian is None:
        adj = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    else:
        (a, b), (c, d) = ((Fraction(v) for v in row) for row in jacobian)
        if a * d - b * c <= 0:
            raise ValueError("jacobian must have positive determinant")
        # adj[i][c] pairs reference derivative i with physical component c,
        # i.e. adj[i][c] = (|det A| * A^{-T})[c][i] — the plain adjugate.
        adj = ((d, -b), (-c, a))
    entries = tuple(
        tuple(
            sum(adj[i][c] * tensor[j][k][i] for i in range(2))
            for k in range(5)
            for c in range(2)
        )
        for j in range(9)
    )
    row_basis = tuple(f"p({gx},{gy})" for gy in range(3) for gx in range(3))
    col_labels = [f"b{ox}{oy}" for ox, oy in MACRO_CELLS] + ["hat"]
    col_basis = tuple(f"{name}:{comp}" for name in col_labels for comp in ("x", "y"))
    return MacroMatrix(entries=entries, row_basis=row_basis, col_basis=col_basis)


def counterclockwise_column_order() -> tuple[int, ...]:
    """Column order presenting bubble pairs counterclockwise (LL, LR, UR, UL).

    MacroMatrix columns follow the row-major cell order MACRO_CELLS; this
    permutation rearranges the four bubble column pairs into the package's
    counterclockwise vertex convention, central-hat pair last.
    """
    return (0, 1, 2, 3, 6, 7, 4, 5, 8, 9)


def _rows_of(matrix) -> list[list[Fraction]]:
    rows = matrix.entries if isinstance(matrix, MacroMatrix) else matrix
    return [[Fraction(v) for v in row] for row in rows]


def rational_rank(matrix) -> int:
    """Matrix rank by exact Gaussian elimination over the rationals."""
    rows = _rows_of(matrix)
    if not rows:
        return 0
    rank = 0
    for col in range(len(rows[0])):
        piv = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        lead = rows[rank]
        scale = 1 / lead[col]
        for i in range(rank + 1, len(rows)):
            f = rows[i][col] * scale
            if f:
                rows[i] = [a - f * b for a, b in zip(rows[i], lead)]
        rank += 1
        if rank == len(rows):
            break
    return rank


def rational_nullspace(matrix) -> list[tuple[Fraction, ...]]:
    """Exact basis of {x : M x = 0}, one vector per free column of the RREF."""
    rows = _rows_of(matrix)
    if not rows:
        return []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(rows)) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        rows[r] = [v / rows[r][col] for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        vec = [Fraction(0)] * ncols
        vec[free] = Fraction(1)
        for prow, pcol in enumerate(pivots):
            vec[pcol] = -rows[prow][free]
        basis.append(tuple(vec))
    return basis


def transpose(matrix) -> list[list[Fraction]]:
    """Exact transpose of a MacroMatrix or nested sequence."""
    rows = _rows_of(matrix)
    return [list(col) for col in zip(*rows)]


def check_m1(kind: BubbleKind) -> StabilityReport:
    """Rank-based patch stability verdict for a bubble kind.

    dim_Bi = 9 - rank counts the patch pressures orthogonal to all interior
    velocities; the stability condition holds exactly when that space is
    the constants alone (dim 1).  The constant is always in it -- verified
    exactly here, since every interior velocity vanishes on the patch
    boundary and so has zero total divergence.
    """
    kind = BubbleKind(kind)
    matrix = build_macro_matrix(kind)
    for col in range(10):
        total = sum(row[col] for row in matrix.entries)
        if total != 0:
            raise ArithmeticError(
                f"column {matrix.col_basis[col]} has nonzero sum {total}; "
                "constant pressure not in the orthogonal space"
            )
    rank = rational_rank(matrix)
    dim_bi = 9 - rank
    return StabilityReport(
        bubble=kind, rank=rank, dim_Bi=dim_bi, m1_satisfied=dim_bi == 1
    )


def estimate_infsup(mesh: Mesh, dofs: DofMap, bubble_kind: BubbleKind) -> float:
    """Discrete inf-sup constant by a dense generalized eigensolve.

    beta_h^2 is the smallest eigenvalue of (B G^-1 B^T) q = lambda Mp q over
    mean-zero pressures, with G the Dirichlet-eliminated full-H1 velocity
    Gram.  The constant pressure is an exact zero mode of the pencil and is
    deflated by restricting to the mean-weight orthogonal complement; a
    further (near-)zero eigenvalue there is the signature of an unstable
    pairing, reported as beta_h ~ 0.
    """
    if mesh.n > MAX_INFSUP_SUBDIVISIONS:
        raise ValueError(
            f"dense inf-sup estimate limited to n <= {MAX_INFSUP_SUBDIVISIONS}, got n = {mesh.n}"
        )
    kind = BubbleKind(bubble_kind)
    gram = assemble_velocity_gram(mesh, dofs, kind)
    interior = dofs.interior_vector()
    b_int = assemble_divergence(mesh, dofs, kind)[:, interior]
    mass_p = assemble_pressure_mass(mesh, dofs).toarray()
    weights = assemble_mean_weights(mesh, dofs)

    lu = splu(gram.tocsc())
    schur = b_int @ lu.solve(b_int.toarray().T)
    schur = 0.5 * (schur + schur.T)

    basis = scipy.linalg.null_space(weights[None, :])
    reduced_s = basis.T @ schur @ basis
    reduced_m = basis.T @ mass_p @ basis
    smallest = scipy.linalg.eigh(
        reduced_s, reduced_m, eigvals_only=True, subset_by_index=[0, 0]
    )[0]
    return float(np.sqrt(max(smallest, 0.0)))


def infsup_sweep(
    bubble_kind: BubbleKind, max_level: int, shear: float = 0.0
) -> StabilityReport:
    """Patch verdict plus inf-sup estimates on refinement levels 1..max_level."""
    report = check_m1(bubble_kind)
    estimates = []
    for level in range(1, max_level + 1):
        mesh = build_structured_mesh(level_subdivisions(level), shear=shear)
        dofs = build_dof_maps(mesh)
        estimates.append((level, estimate_infsup(mesh, dofs, bubble_kind)))
    return StabilityReport(
        bubble=report.bubble,
        rank=report.rank,
        dim_Bi=report.dim_Bi,
        m1_satisfied=report.m1_satisfied,
        infsup_by_level=tuple(estimates),
    )
