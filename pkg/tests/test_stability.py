"""Exact patch stability analysis and the numerical inf-sup estimator."""

from fractions import Fraction

import numpy as np
import pytest

import golden
from quadmini.mesh import build_dof_maps, build_structured_mesh, level_subdivisions
from quadmini.refelem import BubbleKind
from quadmini.stability import (
    build_macro_matrix,
    check_m1,
    counterclockwise_column_order,
    estimate_infsup,
    infsup_sweep,
    rational_nullspace,
    rational_rank,
    transpose,
)


@pytest.mark.parametrize("name", ["standard", "corner", "linear"])
def test_patch_matrix_matches_frozen_reference(name):
    matrix = build_macro_matrix(BubbleKind(name))
    order = counterclockwise_column_order()
    assert order == golden.PRINTED_COLUMN_ORDER
    printed = tuple(tuple(row[c] for c in order) for row in matrix.entries)
    assert printed == golden.REFERENCE_MATRICES[name]


def test_patch_matrix_labels():
    matrix = build_macro_matrix(BubbleKind.CORNER)
    assert len(matrix.row_basis) == 9 and len(matrix.col_basis) == 10
    assert matrix.row_basis[0] == "p(0,0)"
    assert matrix.col_basis[:2] == ("b00:x", "b00:y")
    assert matrix.col_basis[-2:] == ("hat:x", "hat:y")


def test_quadsym_bubble_couplings_are_uniform():
    matrix = build_macro_matrix(BubbleKind.QUADSYM)
    magnitudes = {abs(v) for row in matrix.entries for v in row[:8]}
    assert magnitudes == {Fraction(0), golden.QUADSYM_BUBBLE_MAGNITUDE}


@pytest.mark.parametrize("name,rank", sorted(golden.REFERENCE_RANKS.items()))
def test_patch_ranks_and_m1_verdict(name, rank):
    report = check_m1(BubbleKind(name))
    assert report.rank == rank
    assert report.dim_Bi == 9 - rank
    assert report.m1_satisfied == (rank == 8)
    assert report.bubble is BubbleKind(name)


@pytest.mark.parametrize("name", ["corner", "linear"])
def test_stable_left_nullspace_is_the_constants(name):
    matrix = build_macro_matrix(BubbleKind(name))
    null = rational_nullspace(transpose(matrix))
    assert len(null) == 1
    vec = null[0]
    assert vec[0] != 0 and all(v == vec[0] for v in vec)


@pytest.mark.parametrize("name", ["standard", "quadsym"])
def test_deficient_left_nullspace_has_a_spurious_mode(name):
    matrix = build_macro_matrix(BubbleKind(name))
    assert len(rational_nullspace(transpose(matrix))) == 2


def test_affine_mapping_preserves_rank_exactly():
    jac = ((Fraction(1, 3), Fraction(1, 7)), (Fraction(0), Fraction(2, 5)))
    for kind in BubbleKind:
        mapped = build_macro_matrix(kind, jacobian=jac)
        assert rational_rank(mapped) == golden.REFERENCE_RANKS[kind.value]


def test_orientation_reversing_jacobian_rejected():
    flip = ((Fraction(0), Fraction(1)), (Fraction(1), Fraction(0)))
    with pytest.raises(ValueError):
        build_macro_matrix(BubbleKind.CORNER, jacobian=flip)


def test_infsup_matches_frozen_baselines():
    for name, baseline in golden.INFSUP_BASELINES.items():
        for level, expected in zip((1, 2), baseline):  # cheap levels; the
            # acceptance suite sweeps the full 1-4 range
            mesh = build_structured_mesh(level_subdivisions(level))
            beta = estimate_infsup(mesh, build_dof_maps(mesh), BubbleKind(name))
            assert beta == pytest.approx(expected, rel=1e-7)


@pytest.mark.parametrize("name", ["standard", "quadsym"])
def test_unstable_pairings_deflate_to_zero(name):
    mesh = build_structured_mesh(4)
    dofs = build_dof_maps(mesh)
    assert estimate_infsup(mesh, dofs, BubbleKind(name)) <= 1e-5


def test_estimator_rejects_oversized_meshes():
    mesh = build_structured_mesh(64)
    with pytest.raises(ValueError):
        estimate_infsup(mesh, build_dof_maps(mesh), BubbleKind.CORNER)


def test_infsup_sweep_bundles_patch_check_and_levels():
    report = infsup_sweep(BubbleKind.CORNER, 2)
    assert report.rank == 8 and report.m1_satisfied
    assert [level for level, _ in report.infsup_by_level] == [1, 2]
    assert all(beta > 0.05 for _, beta in report.infsup_by_level)
