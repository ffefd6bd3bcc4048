"""Structured parallelogram meshes and DOF numbering."""

import numpy as np
import pytest

from quadmini.mesh import (
    build_dof_maps,
    build_structured_mesh,
    element_geometry,
    element_geometry_arrays,
    level_subdivisions,
)


def test_level_subdivisions_double_per_level():
    assert [level_subdivisions(level) for level in (1, 2, 6)] == [4, 8, 128]
    with pytest.raises(ValueError):
        level_subdivisions(0)


@pytest.mark.parametrize("n,shear", [(1, 0.0), (3, 0.0), (4, 0.2), (5, 0.45)])
def test_counts_and_uniform_geometry(n, shear):
    mesh = build_structured_mesh(n, shear=shear)
    assert mesh.vertex_count == (n + 1) ** 2
    assert mesh.element_count == n * n
    assert int(mesh.boundary_vertex.sum()) == 4 * n
    jac, _, det, inv = element_geometry_arrays(mesh)
    h = 1.0 / n
    assert np.allclose(det, h * h)  # shear preserves area; orientation positive
    assert np.allclose(jac, np.array([[h, shear * h], [0.0, h]])[None])
    assert np.allclose(np.einsum("eij,ejk->eik", jac, inv), np.eye(2)[None], atol=1e-14)


def test_single_element_geometry_view():
    mesh = build_structured_mesh(4, shear=0.3)
    geo = element_geometry(mesh, 7)
    assert geo.det == pytest.approx(1.0 / 16.0)
    assert np.allclose(geo.inverse_transpose.T @ geo.jacobian, np.eye(2), atol=1e-14)
    # element 7 sits at (i=3, j=1); its first vertex is the map's offset
    assert np.allclose(geo.offset, mesh.vertices[mesh.elements[7, 0]])


def test_vertex_layout_runs_x_fastest():
    mesh = build_structured_mesh(2)
    assert np.allclose(mesh.vertices[1], [0.5, 0.0])
    assert np.allclose(mesh.vertices[3], [0.0, 0.5])
    # element vertices are listed counterclockwise: ll, lr, ur, ul
    assert mesh.elements[0].tolist() == [0, 1, 4, 3]
    assert mesh.elements[3].tolist() == [4, 5, 8, 7]


def test_constructor_guards():
    with pytest.raises(ValueError):
        build_structured_mesh(0)
    with pytest.raises(ValueError):
        build_structured_mesh(4, shear=0.5)
    with pytest.raises(ValueError):
        build_structured_mesh(4, shear=-0.1)


def test_dof_partition():
    mesh = build_structured_mesh(3)
    dofs = build_dof_maps(mesh)
    nv, ne = mesh.vertex_count, mesh.element_count
    assert dofs.velocity_scalar_count == nv + ne
    assert dofs.pressure_count == nv
    assert dofs.element_scalar_dofs.shape == (ne, 5)
    # bubble DOFs are numbered after all vertices, one per element
    assert dofs.element_scalar_dofs[:, 4].tolist() == list(range(nv, nv + ne))
    boundary = set(dofs.boundary_scalar.tolist())
    interior = set(dofs.interior_scalar.tolist())
    assert boundary | interior == set(range(nv + ne))
    assert not boundary & interior
    assert set(range(nv, nv + ne)) <= interior  # bubbles never see the wall


def test_interior_vector_blocks_by_component():
    mesh = build_structured_mesh(3)
    dofs = build_dof_maps(mesh)
    m = dofs.velocity_scalar_count
    iv = dofs.interior_vector()
    k = dofs.interior_scalar_count
    assert len(iv) == 2 * k
    assert iv[:k].tolist() == dofs.interior_scalar.tolist()
    assert iv[k:].tolist() == (dofs.interior_scalar + m).tolist()
    for reduced, scalar in enumerate(dofs.interior_scalar.tolist()):
        assert dofs.interior_velocity_index[scalar] == reduced
    assert all(dofs.interior_velocity_index[s] == -1 for s in dofs.boundary_scalar)
