"""Saddle-point block assembly: symmetry, divergence identities, patch anchor."""

from fractions import Fraction

import numpy as np
import pytest

from quadmini.assembly import (
    apply_dirichlet,
    assemble_divergence,
    assemble_load,
    assemble_mean_weights,
    assemble_pressure_mass,
    assemble_system,
    assemble_velocity_gram,
    assemble_viscous,
    attach_mean_constraint,
)
from quadmini.mesh import build_dof_maps, build_structured_mesh, element_geometry_arrays
from quadmini.poly import ONE, X, Y, ZERO
from quadmini.refelem import BubbleKind, bubble
from quadmini.stability import build_macro_matrix


@pytest.fixture(scope="module", params=[0.0, 0.2], ids=["square", "sheared"])
def mesh_and_dofs(request):
    mesh = build_structured_mesh(3, shear=request.param)
    return mesh, build_dof_maps(mesh)


def _max_asymmetry(matrix):
    return abs(matrix - matrix.T).max()


@pytest.mark.parametrize("kind", list(BubbleKind))
def test_symmetric_blocks(mesh_and_dofs, kind):
    mesh, dofs = mesh_and_dofs
    assert _max_asymmetry(assemble_viscous(mesh, dofs, kind)) <= 1e-12
    assert _max_asymmetry(assemble_pressure_mass(mesh, dofs)) <= 1e-12
    assert _max_asymmetry(assemble_velocity_gram(mesh, dofs, kind)) <= 1e-12


def test_divergence_theorem_zeroes_interior_columns(mesh_and_dofs):
    mesh, dofs = mesh_and_dofs
    B = assemble_divergence(mesh, dofs, BubbleKind.CORNER)
    column_sums = np.asarray(B.sum(axis=0)).ravel()
    # sum over all pressure hats = integral of div(basis): zero whenever the
    # velocity basis function vanishes on the domain boundary
    assert np.max(np.abs(column_sums[dofs.interior_vector()])) <= 1e-12
    assert np.max(np.abs(column_sums)) > 1e-3  # wall DOFs carry boundary flux


@pytest.mark.parametrize("kind", list(BubbleKind))
@pytest.mark.parametrize("shear", [0.0, 0.2])
def test_divergence_block_matches_exact_patch_matrix(kind, shear):
    # one 2x2 patch: the assembled B restricted to the nine pressure hats and
    # the five interior velocity generators must equal the exact rational
    # patch matrix mapped through the element Jacobian
    mesh = build_structured_mesh(2, shear=shear)
    dofs = build_dof_maps(mesh)
    B = assemble_divergence(mesh, dofs, kind).toarray()
    m = dofs.velocity_scalar_count
    scalars = [9, 10, 11, 12, 4]  # four bubbles (elements 0..3), central vertex
    cols = [c for s in scalars for c in (s, m + s)]
    jac = ((Fraction(1, 2), Fraction(shear) / 2), (Fraction(0), Fraction(1, 2)))
    exact = build_macro_matrix(kind, jacobian=jac)
    expected = np.array([[float(v) for v in row] for row in exact.entries])
    assert np.max(np.abs(B[:, cols] - expected)) <= 1e-13


@pytest.mark.parametrize("kind", list(BubbleKind))
def test_quadrature_order_insensitivity(mesh_and_dofs, kind):
    mesh, dofs = mesh_and_dofs
    for build in (assemble_viscous, assemble_divergence):
        low = build(mesh, dofs, kind)
        high = build(mesh, dofs, kind, quad_order=6)
        assert abs(low - high).max() <= 1e-13


def test_load_vector_matches_exact_integrals(mesh_and_dofs):
    mesh, dofs = mesh_and_dofs
    load = assemble_load(mesh, dofs, BubbleKind.CORNER, (ONE, ZERO))
    m = dofs.velocity_scalar_count
    _, _, det, _ = element_geometry_arrays(mesh)
    expected = np.zeros(m)
    weights = np.array([0.25] * 4 + [float(bubble(BubbleKind.CORNER).integrate_unit_square())])
    for k in range(mesh.element_count):
        expected[dofs.element_scalar_dofs[k]] += det[k] * weights
    assert np.allclose(load[:m], expected, atol=1e-14)
    assert np.max(np.abs(load[m:])) == 0.0

    load_y = assemble_load(mesh, dofs, BubbleKind.CORNER, (ZERO, X * Y))
    assert np.max(np.abs(load_y[:m])) == 0.0
    # vertex hats partition unity, so their loads sum to the integral of x*y
    # over the (possibly sheared) domain
    nv = mesh.vertex_count
    exact = 0.25 + mesh.shear / 3.0
    assert load_y[m : m + nv].sum() == pytest.approx(exact, rel=1e-12)


def test_mean_weights_measure_hat_volumes(mesh_and_dofs):
    mesh, dofs = mesh_and_dofs
    Mp = assemble_pressure_mass(mesh, dofs)
    weights = assemble_mean_weights(mesh, dofs)
    assert np.allclose(weights, np.asarray(Mp.sum(axis=1)).ravel(), atol=1e-15)
    assert weights.sum() == pytest.approx(1.0, rel=1e-13)  # the domain area
    assert np.all(weights > 0)


def test_dirichlet_reduction_and_mean_constraint(mesh_and_dofs):
    mesh, dofs = mesh_and_dofs
    system = assemble_system(mesh, dofs, BubbleKind.CORNER, (X, Y))
    n_interior = len(dofs.interior_vector())
    assert system.A.shape == (2 * dofs.velocity_scalar_count,) * 2
    reduced = apply_dirichlet(system, mesh, dofs)
    assert reduced.reduced
    assert reduced.A.shape == (n_interior, n_interior)
    assert reduced.B.shape == (dofs.pressure_count, n_interior)
    # homogeneous walls: no lift contribution anywhere
    assert np.max(np.abs(reduced.lift)) == 0.0
    assert abs(reduced.Gv - assemble_velocity_gram(mesh, dofs, BubbleKind.CORNER)).max() == 0.0
    with pytest.raises(ValueError):
        apply_dirichlet(reduced, mesh, dofs)
    constrained = attach_mean_constraint(reduced)
    assert constrained.mean_attached


def test_inhomogeneous_lift_uses_boundary_values(mesh_and_dofs):
    mesh, dofs = mesh_and_dofs
    system = assemble_system(mesh, dofs, BubbleKind.CORNER, (ZERO, ZERO))
    reduced = apply_dirichlet(system, mesh, dofs, g=(X + Y, ONE))
    m = dofs.velocity_scalar_count
    for scalar in dofs.boundary_scalar.tolist():
        x, y = mesh.vertices[scalar]
        assert reduced.boundary_values[scalar] == pytest.approx(x + y, abs=1e-14)
        assert reduced.boundary_values[m + scalar] == pytest.approx(1.0, abs=1e-14)
    assert np.max(np.abs(reduced.lift)) > 0
