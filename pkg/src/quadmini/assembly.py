"""Global assembly of the Stokes saddle-point system.

Blocks follow the weak form nu*(grad u, grad v) - (p, div v) = (f, v),
(div u, q) = 0.  The divergence matrix B is assembled with the positive
sign B[q, v] = integral of q * div v; the solver places -B^T in the
momentum rows to keep the block system symmetric.

Assembly runs elementwise over reference tensors tabulated once per
(bubble kind, quadrature order) and contracted against per-element affine
geometry, then scattered into COO staging arrays and compressed to CSR
(duplicates summed).  The pressure zero-mean condition is recorded as a
single weight row for the solver rather than by pinning a node, so a
genuinely singular pairing (the standard bubble) surfaces as an exact
extra null vector instead of being masked.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .mesh import DofMap, Mesh, element_geometry_arrays
from .poly import Poly2
from .refelem import (
    BubbleKind,
    gauss_rule,
    q1_basis,
    tabulate,
    tabulate_gradients,
    velocity_basis,
)

#: Quadrature order for matrix assembly; exact for every bubble except
#: QUADSYM, whose stiffness integrand reaches degree 8 per variable.
DEFAULT_QUAD_ORDER = 4
#: Quadrature order for load vectors and error norms (manufactured data).
LOAD_QUAD_ORDER = 6


def assembly_quad_order(kind: BubbleKind) -> int:
    """Smallest tensor-Gauss order that integrates the kind's stiffness exactly."""
    return 5 if BubbleKind(kind) is BubbleKind.QUADSYM else DEFAULT_QUAD_ORDER


@dataclass(frozen=True)
class SaddleSystem:
    """Assembled Stokes blocks, either raw or Dirichlet-reduced.

    Raw systems (``reduced=False``) index all 2m velocity dofs.  After
    `apply_dirichlet` the velocity blocks are restricted to interior dofs,
    ``load`` is interior-length, and ``lift`` carries the boundary-data
    contribution to subtract from the right-hand side (velocity part then
    pressure part).  ``boundary_values`` keeps the full-length vector of
    imposed dof values so solutions can be re-expanded for error norms.
    """

    A: sp.csr_matrix  # viscous block
    B: sp.csr_matrix  # divergence block, rows = pressure dofs
    Mp: sp.csr_matrix  # pressure mass
    Gv: sp.csr_matrix  # velocity full-H1 Gram
    load: np.ndarray
    lift: np.ndarray | None
    mean_weights: np.ndarray  # per-pressure-dof integrals of the hat functions
    dofs: DofMap
    boundary_values: np.ndarray
    reduced: bool = False
    mean_attached: bool = False

    @property
    def pressure_count(self) -> int:
        return self.B.shape[0]


@lru_cache(maxsize=None)
def _reference_tensors(kind: BubbleKind, order: int):
    """Reference-square integral tensors by tensor-Gauss quadrature.

    Returns (grad_grad, div_coupling, vel_mass, press_mass) with
      grad_grad[a, b, i, j] = ∫ d_i phi_a  d_j phi_b
      div_coupling[k, a, i] = ∫ psi_k  d_i phi_a
      vel_mass[a, b]        = ∫ phi_a phi_b
      press_mass[k, l]      = ∫ psi_k psi_l
    over (0,1)^2, for the 5 velocity shapes phi and 4 pressure hats psi.
    """
    rule = gauss_rule(order)
    vel = velocity_basis(kind)
    vals_v = tabulate(vel, rule)
    grads_v = tabulate_gradients(vel, rule)
    vals_p = tabulate(q1_basis(), rule)
    w = rule.weights
    grad_grad = np.einsum("iam,jbm,m->abij", grads_v, grads_v, w)
    div_coupling = np.einsum("km,iam,m->kai", vals_p, grads_v, w)
    vel_mass = np.einsum("am,bm,m->ab", vals_v, vals_v, w)
    press_mass = np.einsum("km,lm,m->kl", vals_p, vals_p, w)
    return grad_grad, div_coupling, vel_mass, press_mass


def _scatter(data: np.ndarray, rows: np.ndarray, cols: np.ndarray, shape) -> sp.csr_matrix:
    """COO staging -> CSR with duplicate entries summed."""
    mat = sp.coo_matrix((data.ravel(), (rows.ravel(), cols.ravel())), shape=shape)
    return mat.tocsr()


def _element_index_blocks(dofs: DofMap) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index arrays (ne, 5, 5) pairing element-local scalar dofs."""
    esd = dofs.element_scalar_dofs
    return np.repeat(esd[:, :, None], 5, axis=2), np.repeat(esd[:, None, :], 5, axis=1)


def _scalar_stiffness(mesh: Mesh, dofs: DofMap, kind: BubbleKind, order: int) -> sp.csr_matrix:
    grad_grad = _reference_tensors(kind, order)[0]
    _, _, det, inv = element_geometry_arrays(mesh)
    metric = np.einsum("eic,ejc->eij", inv, inv)  # A^{-1} A^{-T}
    local = np.einsum("e,eij,abij->eab", det, metric, grad_grad)
    rows, cols = _element_index_blocks(dofs)
    m = dofs.velocity_scalar_count
    return _scatter(local, rows, cols, (m, m))


def _scalar_mass(mesh: Mesh, dofs: DofMap, kind: BubbleKind, order: int) -> sp.csr_matrix:
    vel_mass = _reference_tensors(kind, order)[2]
    det = element_geometry_arrays(mesh)[2]
    local = det[:, None, None] * vel_mass[None, :, :]
    rows, cols = _element_index_blocks(dofs)
    m = dofs.velocity_scalar_count
    return _scatter(local, rows, cols, (m, m))


def _vector_block(scalar: sp.csr_matrix) -> sp.csr_matrix:
    """Same scalar operator on each velocity component (x block, then y)."""
    return sp.block_diag([scalar, scalar], format="csr")


def assemble_viscous(
    mesh: Mesh,
    dofs: DofMap,
    bubble_kind: BubbleKind,
    nu: float = 1.0,
    quad_order: int | None = None,
) -> sp.csr_matrix:
    """Viscous block: (i, j) entry is nu * ∫ grad(phi_i) . grad(phi_j).

    The full-gradient form decouples the components, so the matrix is two
    identical diagonal blocks of the scalar stiffness.
    """
    if nu <= 0:
        raise ValueError(f"nu must be positive, got {nu}")
    order = assembly_quad_order(bubble_kind) if quad_order is None else quad_order
    return nu * _vector_block(_scalar_stiffness(mesh, dofs, BubbleKind(bubble_kind), order))


def assemble_divergence(
    mesh: Mesh,
    dofs: DofMap,
    bubble_kind: BubbleKind,
    quad_order: int | None = None,
) -> sp.csr_matrix:
    """Divergence coupling: row q, column v entry is ∫ q * div(v)."""
    kind = BubbleKind(bubble_kind)
    order = assembly_quad_order(kind) if quad_order is None else quad_order
    div_coupling = _reference_tensors(kind, order)[1]
    _, _, det, inv = element_geometry_arrays(mesh)
    # d/dx_c phi = sum_i A^{-T}[c,i] dhat_i phi; A^{-T}[c,i] == inv[i,c]
    local = np.einsum("e,eic,kai->ekac", det, inv, div_coupling)  # (ne, 4, 5, 2)
    m = dofs.velocity_scalar_count
    esd = dofs.element_scalar_dofs  # (ne, 5)
    rows = np.broadcast_to(mesh.elements[:, :, None, None], local.shape)
    comp = np.array([0, m])
    cols = esd[:, None, :, None] + comp[None, None, None, :]
    cols = np.broadcast_to(cols, local.shape)
    return _scatter(local, rows, cols, (dofs.pressure_count, 2 * m))


def assemble_pressure_mass(
    mesh: Mesh, dofs: DofMap, quad_order: int = DEFAULT_QUAD_ORDER
) -> sp.csr_matrix:
    """Bilinear pressure mass matrix; entries sum to the domain area."""
    press_mass = _reference_tensors(BubbleKind.STANDARD, quad_order)[3]
    det = element_geometry_arrays(mesh)[2]
    local = det[:, None, None] * press_mass[None, :, :]
    rows = np.repeat(mesh.elements[:, :, None], 4, axis=2)
    cols = np.repeat(mesh.elements[:, None, :], 4, axis=1)
    p = dofs.pressure_count
    return _scatter(local, rows, cols, (p, p))


def assemble_velocity_gram(
    mesh: Mesh,
    dofs: DofMap,
    bubble_kind: BubbleKind,
    quad_order: int | None = None,
) -> sp.csr_matrix:
    """Full-H1 velocity Gram (mass + unit-viscosity stiffness), Dirichlet-eliminated.

    Rows/columns are restricted to interior velocity dofs; this is the norm
    matrix in the inf-sup eigenproblem's denominator.
    """
    full = _velocity_gram_full(mesh, dofs, BubbleKind(bubble_kind), quad_order)
    interior = dofs.interior_vector()
    return full[interior][:, interior]


def _velocity_gram_full(
    mesh: Mesh, dofs: DofMap, kind: BubbleKind, quad_order: int | None = None
) -> sp.csr_matrix:
    order = assembly_quad_order(kind) if quad_order is None else quad_order
    scalar = _scalar_stiffness(mesh, dofs, kind, order) + _scalar_mass(mesh, dofs, kind, order)
    return _vector_block(scalar)


def assemble_load(
    mesh: Mesh,
    dofs: DofMap,
    bubble_kind: BubbleKind,
    f: tuple[Poly2, Poly2],
    quad_order: int = LOAD_QUAD_ORDER,
) -> np.ndarray:
    """Load vector ∫ f . v for a polynomial right-hand side f = (f1, f2)."""
    kind = BubbleKind(bubble_kind)
    rule = gauss_rule(quad_order)
    vals_v = tabulate(velocity_basis(kind), rule)  # (5, q)
    jac, offset, det, _ = element_geometry_arrays(mesh)
    phys = np.einsum("eij,qj->eqi", jac, rule.points) + offset[:, None, :]
    x, y = phys[..., 0], phys[..., 1]
    m = dofs.velocity_scalar_count
    load = np.zeros(2 * m)
    for c, fc in enumerate(f):
        fvals = fc(x, y)  # (ne, q)
        local = np.einsum("e,eq,aq,q->ea", det, fvals, vals_v, rule.weights)
        np.add.at(load, c * m + dofs.element_scalar_dofs, local)
    return load


def assemble_mean_weights(mesh: Mesh, dofs: DofMap) -> np.ndarray:
    """Integral of each pressure hat over the domain: the zero-mean weight row."""
    ones = np.ones(dofs.pressure_count)
    return np.asarray(assemble_pressure_mass(mesh, dofs) @ ones)


def assemble_system(
    mesh: Mesh,
    dofs: DofMap,
    bubble_kind: BubbleKind,
    f: tuple[Poly2, Poly2],
    nu: float = 1.0,
    quad_order: int | None = None,
) -> SaddleSystem:
    """Raw (pre-Dirichlet) system with all blocks over the full dof set."""
    kind = BubbleKind(bubble_kind)
    m = dofs.velocity_scalar_count
    return SaddleSystem(
        A=assemble_viscous(mesh, dofs, kind, nu=nu, quad_order=quad_order),
        B=assemble_divergence(mesh, dofs, kind, quad_order=quad_order),
        Mp=assemble_pressure_mass(mesh, dofs),
        Gv=_velocity_gram_full(mesh, dofs, kind, quad_order),
        load=assemble_load(mesh, dofs, kind, f),
        lift=None,
        mean_weights=assemble_mean_weights(mesh, dofs),
        dofs=dofs,
        boundary_values=np.zeros(2 * m),
        reduced=False,
        mean_attached=False,
    )


def apply_dirichlet(
    system: SaddleSystem,
    mesh: Mesh,
    dofs: DofMap,
    g: tuple[Poly2, Poly2] | None = None,
) -> SaddleSystem:
    """Impose velocity boundary values g (None = homogeneous) by elimination.

    Boundary vertex dofs are fixed to g interpolated at the vertices; their
    coupling into the remaining equations moves to ``lift`` and the velocity
    blocks shrink to interior dofs.
    """
    if system.reduced:
        raise ValueError("Dirichlet data already applied")
    m = dofs.velocity_scalar_count
    values = np.zeros(2 * m)
    if g is not None:
        bx, by = mesh.vertices[mesh.boundary_vertex].T
        values[dofs.boundary_scalar] = g[0](bx, by)
        values[m + dofs.boundary_scalar] = g[1](bx, by)
    interior = dofs.interior_vector()
    lift = np.concatenate([(system.A @ values)[interior], system.B @ values])
    return replace(
        system,
        A=system.A[interior][:, interior],
        B=system.B[:, interior],
        Gv=system.Gv[interior][:, interior],
        load=system.load[interior],
        lift=lift,
        boundary_values=values,
        reduced=True,
    )


def attach_mean_constraint(system: SaddleSystem) -> SaddleSystem:
    """Mark the single constraint mean_weights . p = 0 as active for the solver."""
    if system.mean_weights is None or not len(system.mean_weights):
        raise ValueError("mean weights missing")
    return replace(system, mean_attached=True)
