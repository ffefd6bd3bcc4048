"""Structured parallelogram meshes of the unit square and DOF numbering.

The mesh is an n x n grid of congruent parallelograms: vertex (i, j) sits at
(i/n + shear*j/n, j/n), so shear = 0 gives axis-aligned squares and any
shear keeps every element a parallelogram with an affine map from the
reference square.  Velocity carries one scalar DOF per vertex plus one
bubble DOF per element (per component); pressure carries one DOF per vertex.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Element areas below this are treated as degenerate.
_DEGENERATE_DET = 1e-14


@dataclass(frozen=True)
class Mesh:
    """Structured mesh: vertices lexicographic (x fastest), elements row-major.

    Element k lists its vertex indices counterclockwise from the lower-left
    corner, matching the reference-square convention.
    """

    n: int
    shear: float
    vertices: np.ndarray  # (nv, 2)
    elements: np.ndarray  # (ne, 4) int
    boundary_vertex: np.ndarray  # (nv,) bool

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def element_count(self) -> int:
        return len(self.elements)


@dataclass(frozen=True)
class ElementGeometry:
    """Affine map x = jacobian @ xhat + offset from (0,1)^2 onto element k."""

    jacobian: np.ndarray  # (2, 2), columns are the edge vectors at vertex 0
    offset: np.ndarray  # (2,)
    det: float  # element area
    inverse_transpose: np.ndarray  # (2, 2)


@dataclass(frozen=True)
class DofMap:
    """Scalar DOF numbering: vertex DOFs first (vertex order), then one bubble per element.

    Vector velocity DOFs are blocked by component: x-component scalar DOF i
    is vector DOF i, the y-component is ``velocity_scalar_count + i``.
    """

    velocity_scalar_count: int
    pressure_count: int
    element_scalar_dofs: np.ndarray  # (ne, 5): 4 vertex DOFs + bubble DOF
    boundary_scalar: np.ndarray  # sorted indices of Dirichlet scalar DOFs
    interior_scalar: np.ndarray  # sorted indices of the remaining scalar DOFs
    interior_velocity_index: np.ndarray  # (M,), reduced index or -1 if eliminated

    @property
    def interior_scalar_count(self) -> int:
        return len(self.interior_scalar)

    def interior_vector(self) -> np.ndarray:
        """Interior vector-velocity DOF indices, x block then y block."""
        m = self.velocity_scalar_count
        return np.concatenate([self.interior_scalar, m + self.interior_scalar])

    def boundary_vector(self) -> np.ndarray:
        m = self.velocity_scalar_count
        return np.concatenate([self.boundary_scalar, m + self.boundary_scalar])


def level_subdivisions(level: int) -> int:
    """Refinement level -> subdivisions per side (level 1 = 16 elements)."""
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    return 2 ** (level + 1)


def build_structured_mesh(n: int, shear: float = 0.0) -> Mesh:
    """Build the n x n mesh of the unit square, sheared into a parallelogram.

    ``shear`` in [0, 0.5): vertex (i, j) is shifted right by shear*j/n, so
    all elements share one Jacobian [[h, shear*h], [0, h]] with h = 1/n.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 <= shear < 0.5:
        raise ValueError(f"shear must lie in [0, 0.5), got {shear}")
    side = np.arange(n + 1) / n
    jj, ii = np.meshgrid(side, side, indexing="ij")  # jj = y, ii = x (x fastest)
    vertices = np.column_stack([(ii + shear * jj).ravel(), jj.ravel()])

    idx = np.arange((n + 1) * (n + 1)).reshape(n + 1, n + 1)  # [j, i]
    ll = idx[:-1, :-1].ravel()
    lr = idx[:-1, 1:].ravel()
    ur = idx[1:, 1:].ravel()
    ul = idx[1:, :-1].ravel()
    elements = np.column_stack([ll, lr, ur, ul])

    boundary = np.zeros((n + 1, n + 1), dtype=bool)
    boundary[0, :] = boundary[-1, :] = boundary[:, 0] = boundary[:, -1] = True

    mesh = Mesh(
        n=n,
        shear=shear,
        vertices=vertices,
        elements=elements,
        boundary_vertex=boundary.ravel(),
    )
    _validate_parallelograms(mesh)
    return mesh


def _validate_parallelograms(mesh: Mesh) -> None:
    v = mesh.vertices[mesh.elements]  # (ne, 4, 2)
    gap = np.abs((v[:, 1] - v[:, 0]) - (v[:, 2] - v[:, 3])).max()
    gap = max(gap, np.abs((v[:, 3] - v[:, 0]) - (v[:, 2] - v[:, 1])).max())
    if gap > 1e-12:
        raise ValueError(f"non-parallelogram element (edge mismatch {gap:.3e})")
    if element_geometry_arrays(mesh)[2].min() <= _DEGENERATE_DET:
        raise ValueError("degenerate or inverted element in mesh")


def element_geometry(mesh: Mesh, k: int) -> ElementGeometry:
    """Affine geometry of element k; rejects degenerate elements."""
    if not 0 <= k < mesh.element_count:
        raise IndexError(f"element index {k} out of range")
    v = mesh.vertices[mesh.elements[k]]
    jac = np.column_stack([v[1] - v[0], v[3] - v[0]])
    det = jac[0, 0] * jac[1, 1] - jac[0, 1] * jac[1, 0]
    if det <= _DEGENERATE_DET:
        raise ValueError(f"element {k} is degenerate (det = {det:.3e})")
    inv = np.array([[jac[1, 1], -jac[0, 1]], [-jac[1, 0], jac[0, 0]]]) / det
    return ElementGeometry(
        jacobian=jac, offset=v[0].copy(), det=float(det), inverse_transpose=inv.T
    )


def element_geometry_arrays(mesh: Mesh) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized geometry for all elements: (jacobians, offsets, dets, inverses).

    ``inverses`` are the plain Jacobian inverses A^{-1}, shape (ne, 2, 2);
    the physical gradient of a shape function is A^{-T} @ reference gradient.
    """
    v = mesh.vertices[mesh.elements]  # (ne, 4, 2)
    jac = np.stack([v[:, 1] - v[:, 0], v[:, 3] - v[:, 0]], axis=-1)  # (ne, 2, 2)
    det = jac[:, 0, 0] * jac[:, 1, 1] - jac[:, 0, 1] * jac[:, 1, 0]
    inv = np.empty_like(jac)
    inv[:, 0, 0] = jac[:, 1, 1]
    inv[:, 0, 1] = -jac[:, 0, 1]
    inv[:, 1, 0] = -jac[:, 1, 0]
    inv[:, 1, 1] = jac[:, 0, 0]
    inv /= det[:, None, None]
    return jac, v[:, 0, :], det, inv


def build_dof_maps(mesh: Mesh) -> DofMap:
    """Number velocity (vertices then bubbles) and pressure (vertices) DOFs."""
    nv = mesh.vertex_count
    ne = mesh.element_count
    m = nv + ne

    bubble_dofs = nv + np.arange(ne)
    element_scalar_dofs = np.column_stack([mesh.elements, bubble_dofs])

    boundary_scalar = np.flatnonzero(mesh.boundary_vertex)
    interior_mask = np.ones(m, dtype=bool)
    interior_mask[boundary_scalar] = False
    interior_scalar = np.flatnonzero(interior_mask)

    interior_index = np.full(m, -1, dtype=int)
    interior_index[interior_scalar] = np.arange(len(interior_scalar))

    return DofMap(
        velocity_scalar_count=m,
        pressure_count=nv,
        element_scalar_dofs=element_scalar_dofs,
        boundary_scalar=boundary_scalar,
        interior_scalar=interior_scalar,
        interior_velocity_index=interior_index,
    )
