"""Manufactured Stokes solutions, discrete error norms, and convergence studies.

Both benchmark cases are polynomial, so the right-hand side f = -nu*Lap(u)
+ grad(p) is produced by exact differentiation of the entered solution --
never typed in by hand -- and boundary data is interpolated from the same
polynomial objects.  Case 1 has velocity vanishing on the whole boundary
and a pressure with exact zero mean; case 2 is inhomogeneous on the
boundary, exercising the lift path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .assembly import (
    LOAD_QUAD_ORDER,
    apply_dirichlet,
    assemble_system,
    attach_mean_constraint,
)
from .mesh import (
    DofMap,
    Mesh,
    build_dof_maps,
    build_structured_mesh,
    element_geometry_arrays,
    level_subdivisions,
)
from .poly import Poly2, X, Y
from .refelem import (
    BubbleKind,
    gauss_rule,
    q1_basis,
    tabulate,
    tabulate_gradients,
    velocity_basis,
)
from .solver import SingularSystemError, SolveOutcome, SolveStatus, solve_saddle

MAX_LEVEL = 6


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact polynomial Stokes solution with its derived right-hand side."""

    id: int
    u: tuple[Poly2, Poly2]
    p: Poly2
    f: tuple[Poly2, Poly2]
    nu: float = 1.0


class ErrorNorms(NamedTuple):
    h1_u: float
    l2_u: float
    l2_p: float


@dataclass(frozen=True)
class LevelErrors:
    level: int
    n_elem: int
    h1_u: float
    l2_u: float
    l2_p: float
    # Companion measures of the same velocity error, reported side by side
    # because tabulated benchmark errors do not always state which variant
    # they record: the H1 seminorm, and the error of the vertex (bilinear)
    # field alone with the element-bubble contribution dropped.
    h1_semi: float
    h1_nodal: float
    l2_nodal: float


@dataclass(frozen=True)
class ErrorReport:
    """Per-level errors of one convergence study plus derived rates."""

    case_id: int
    bubble: BubbleKind
    shear: float
    rows: tuple[LevelErrors, ...]

    def h1_rates(self) -> tuple[float, ...]:
        return tuple(eoc([r.h1_u for r in self.rows]))

    def l2_rates(self) -> tuple[float, ...]:
        return tuple(eoc([r.l2_u for r in self.rows]))

    def p_rates(self) -> tuple[float, ...]:
        return tuple(eoc([r.l2_p for r in self.rows]))


@lru_cache(maxsize=None)
def manufactured_case(case_id: int) -> ManufacturedCase:
    """The two polynomial benchmark solutions on the unit square.

    Case 1: u from the stream function (xy(1-x)(1-y))^2, zero on the whole
    boundary; p = x(1-x)(1-2y).  Case 2: a divergence-free cubic velocity,
    nonzero on the boundary; p = xy + x + y + x^3 y^2 - 4/3.
    """
    if case_id == 1:
        u1 = -2 * X**2 * Y * (2 * Y - 1) * (X - 1) ** 2 * (Y - 1)
        u2 = 2 * X * Y**2 * (2 * X - 1) * (X - 1) * (Y - 1) ** 2
        p = X * (1 - X) * (1 - 2 * Y)
    elif case_id == 2:
        u1 = X + X**2 - 2 * X * Y + X**3 - 3 * X * Y**2 + X**2 * Y
        u2 = -Y - 2 * X * Y + Y**2 - 3 * X**2 * Y + Y**3 - X * Y**2
        p = X * Y + X + Y + X**3 * Y**2 - Fraction(4, 3)
    else:
        raise ValueError(f"case_id must be 1 or 2, got {case_id}")

    div = u1.diff("x") + u2.diff("y")
    if not div.is_zero:
        raise ArithmeticError(f"case {case_id} velocity is not divergence free: {div!r}")
    if p.integrate_unit_square() != 0:
        raise ArithmeticError(f"case {case_id} pressure does not have zero mean")

    def laplacian(q: Poly2) -> Poly2:
        return q.diff("x").diff("x") + q.diff("y").diff("y")

    f = (-laplacian(u1) + p.diff("x"), -laplacian(u2) + p.diff("y"))
    return ManufacturedCase(id=case_id, u=(u1, u2), p=p, f=f)


def expand_velocity(
    mesh: Mesh, dofs: DofMap, outcome: SolveOutcome, case: ManufacturedCase
) -> np.ndarray:
    """Full-length velocity coefficients: solved interior dofs + boundary data."""
    m = dofs.velocity_scalar_count
    full = np.zeros(2 * m)
    bx, by = mesh.vertices[mesh.boundary_vertex].T
    full[dofs.boundary_scalar] = case.u[0](bx, by)
    full[m + dofs.boundary_scalar] = case.u[1](bx, by)
    full[dofs.interior_vector()] = outcome.velocity
    return full


class ErrorDetail(NamedTuple):
    norms: ErrorNorms
    h1_semi: float
    h1_nodal: float
    l2_nodal: float


def _error_detail(
    mesh: Mesh,
    dofs: DofMap,
    bubble_kind: BubbleKind,
    outcome: SolveOutcome,
    case: ManufacturedCase,
) -> ErrorDetail:
    """Primary norms plus companion velocity measures, by elementwise quadrature."""
    kind = BubbleKind(bubble_kind)
    rule = gauss_rule(LOAD_QUAD_ORDER)
    vals_v = tabulate(velocity_basis(kind), rule)  # (5, q)
    grads_v = tabulate_gradients(velocity_basis(kind), rule)  # (2, 5, q)
    vals_p = tabulate(q1_basis(), rule)  # (4, q)
    w = rule.weights

    jac, offset, det, inv = element_geometry_arrays(mesh)
    phys = np.einsum("eij,qj->eqi", jac, rule.points) + offset[:, None, :]
    x, y = phys[..., 0], phys[..., 1]

    m = dofs.velocity_scalar_count
    full_u = expand_velocity(mesh, dofs, outcome, case)
    esd = dofs.element_scalar_dofs
    coefs = np.stack([full_u[esd], full_u[m + esd]], axis=-1)  # (ne, 5, 2)

    u_exact = np.stack([case.u[0](x, y), case.u[1](x, y)], axis=-1)
    grad_exact = np.empty(u_exact.shape + (2,))
    for c in range(2):
        grad_exact[..., c, 0] = case.u[c].diff("x")(x, y)
        grad_exact[..., c, 1] = case.u[c].diff("y")(x, y)

    def velocity_error_sq(local: np.ndarray) -> tuple[float, float]:
        uh = np.einsum("eac,aq->eqc", local, vals_v)
        diff_u = u_exact - uh
        l2_sq = np.einsum("e,eqc,eqc,q->", det, diff_u, diff_u, w)
        grad_uh = np.einsum("eac,eid,iaq->eqcd", local, inv, grads_v)
        diff_g = grad_exact - grad_uh
        return l2_sq, np.einsum("e,eqcd,eqcd,q->", det, diff_g, diff_g, w)

    l2_u_sq, semi_sq = velocity_error_sq(coefs)
    nodal_coefs = coefs.copy()
    nodal_coefs[:, -1, :] = 0.0  # drop the element-bubble dof
    l2_nodal_sq, semi_nodal_sq = velocity_error_sq(nodal_coefs)

    ph = np.einsum("ek,kq->eq", outcome.pressure[mesh.elements], vals_p)
    diff_p = case.p(x, y) - ph
    # Both pressures are only determined up to a constant on the (possibly
    # sheared) domain; compare after matching means.
    area = det.sum()
    mean = np.einsum("e,eq,q->", det, diff_p, w) / area
    diff_p = diff_p - mean
    l2_p_sq = np.einsum("e,eq,eq,q->", det, diff_p, diff_p, w)

    norms = ErrorNorms(
        h1_u=math.sqrt(l2_u_sq + semi_sq),
        l2_u=math.sqrt(l2_u_sq),
        l2_p=math.sqrt(l2_p_sq),
    )
    return ErrorDetail(
        norms=norms,
        h1_semi=math.sqrt(semi_sq),
        h1_nodal=math.sqrt(l2_nodal_sq + semi_nodal_sq),
        l2_nodal=math.sqrt(l2_nodal_sq),
    )


def error_norms(
    mesh: Mesh,
    dofs: DofMap,
    bubble_kind: BubbleKind,
    outcome: SolveOutcome,
    case: ManufacturedCase,
) -> ErrorNorms:
    """Full-H1 and L2 velocity errors and the L2 pressure error."""
    return _error_detail(mesh, dofs, bubble_kind, outcome, case).norms


def eoc(errors) -> list[float]:
    """Estimated orders of convergence: log2 of successive error ratios."""
    errors = list(errors)
    if any(e <= 0 for e in errors):
        raise ValueError("orders of convergence need positive errors")
    return [math.log2(prev / cur) for prev, cur in zip(errors, errors[1:])]


def solve_case(
    mesh: Mesh, dofs: DofMap, bubble_kind: BubbleKind, case: ManufacturedCase
) -> SolveOutcome:
    """Assemble and solve one manufactured case on a given mesh."""
    system = assemble_system(mesh, dofs, bubble_kind, case.f, nu=case.nu)
    system = apply_dirichlet(system, mesh, dofs, g=case.u)
    system = attach_mean_constraint(system)
    return solve_saddle(system)


def run_convergence_study(
    case_id: int,
    bubble_kind: BubbleKind,
    max_level: int,
    shear: float = 0.0,
) -> ErrorReport:
    """Solve on levels 1..max_level and report errors and convergence rates.

    Raises SingularSystemError as soon as any level's system is singular
    (the expected outcome for the standard bubble).
    """
    if not 1 <= max_level <= MAX_LEVEL:
        raise ValueError(f"max_level must be in 1..{MAX_LEVEL}, got {max_level}")
    kind = BubbleKind(bubble_kind)
    case = manufactured_case(case_id)
    rows = []
    for level in range(1, max_level + 1):
        mesh = build_structured_mesh(level_subdivisions(level), shear=shear)
        dofs = build_dof_maps(mesh)
        outcome = solve_case(mesh, dofs, kind, case)
        if outcome.status is SolveStatus.SINGULAR:
            raise SingularSystemError(
                f"singular system for bubble '{kind.value}' at level {level} "
                f"(n = {mesh.n}); the pairing lacks a discrete inf-sup bound"
            )
        detail = _error_detail(mesh, dofs, kind, outcome, case)
        rows.append(
            LevelErrors(
                level=level,
                n_elem=mesh.element_count,
                h1_u=detail.norms.h1_u,
                l2_u=detail.norms.l2_u,
                l2_p=detail.norms.l2_p,
                h1_semi=detail.h1_semi,
                h1_nodal=detail.h1_nodal,
                l2_nodal=detail.l2_nodal,
            )
        )
    return ErrorReport(case_id=case_id, bubble=kind, shear=shear, rows=tuple(rows))
