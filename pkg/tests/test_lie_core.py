'''
lie_core:
  brackets      so3 cross-product table, so4 factors commute, batched brackets
  axioms        residuals of the built-ins, descriptors rejected by load_algebra
  subspaces     flags of subalgebras, centralizers, complements, derived algebra
  commuting     relative commuting test
'''
import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from curvlab.utilities.errors import AlgebraError, DegenerateError, DimensionError, InputError, StructureError
from curvlab.utilities.lie_core import (antisymmetry_residual, ad_invariance_residual, centralizer_basis,
                                        commutes, derived_subalgebra, diagonal_subalgebra, factor_subspace,
                                        is_so4, jacobi_residual, load_algebra, orthogonal_complement,
                                        orthonormalize, project, projection_matrix, span, validate_algebra,
                                        with_inner_product, LieAlgebra)
from tests.conftest import embed


def test_so3_bracket_table(so3):
    e1, e2, e3 = np.eye(3)
    assert_allclose(so3.bracket(e1, e2), e3)
    assert_allclose(so3.bracket(e2, e3), e1)
    assert_allclose(so3.bracket(e3, e1), e2)
    assert_allclose(so3.bracket(e2, e1), -e3)


def test_so3_bracket_is_cross_product(so3, rng):
    X, Y = rng.normal(3), rng.normal(3)
    assert_allclose(so3.bracket(X, Y), np.cross(X, Y), atol=1e-14)


def test_batched_bracket_matches_single(so4, rng):
    X, Y = rng.normal((5, 6)), rng.normal((5, 6))
    batched = so4.bracket(X, Y)
    for k in range(5):
        assert_allclose(batched[k], so4.bracket(X[k], Y[k]))


def test_so4_factors_commute(so4):
    A1, B2 = embed([1, 0, 0]), embed(v=[0, 1, 0])
    assert_allclose(so4.bracket(A1, B2), np.zeros(6))
    assert commutes(so4, A1, B2)
    assert is_so4(so4)
    assert so4.factors == (3, 3)


def test_dimension_mismatch(so3):
    with pytest.raises(DimensionError):
        so3.bracket(np.ones(4), np.ones(3))


@pytest.mark.parametrize('residual', [antisymmetry_residual, jacobi_residual, ad_invariance_residual])
def test_builtin_axioms(so3, so4, residual):
    assert residual(so3) <= 1e-12
    assert residual(so4) <= 1e-12


def test_non_invariant_structure_rejected():
    c = np.zeros((3, 3, 3))
    c[0, 1, 0], c[1, 0, 0] = 1.0, -1.0 #[e1,e2]=e1 has no ad-invariant inner product
    with pytest.raises(AlgebraError):
        validate_algebra(LieAlgebra('bad', c, np.eye(3)))


def test_load_algebra_builtin_and_descriptor(tmp_path, so3):
    assert load_algebra('so3') is so3
    path = tmp_path / 'so3.json'
    path.write_text(json.dumps({'name': 'mine', 'dim': 3, 'structure': so3.structure.tolist()}))
    L = load_algebra(str(path))
    assert L.name == 'mine'
    assert_allclose(L.structure, so3.structure)


def test_load_algebra_rejects_bad_files(tmp_path):
    with pytest.raises(InputError):
        load_algebra(str(tmp_path / 'missing.json'))
    path = tmp_path / 'broken.json'
    path.write_text(json.dumps({'name': 'x', 'dim': 2, 'structure': np.zeros((3, 3, 3)).tolist()}))
    with pytest.raises(AlgebraError):
        load_algebra(str(path))


def test_orthonormalize_drops_dependent_vectors(so3):
    basis = orthonormalize(so3, [np.array([1.0, 0, 0]), np.array([2.0, 0, 0]), np.array([1.0, 1.0, 0])])
    assert basis.shape == (2, 3)
    assert_allclose(basis @ basis.T, np.eye(2), atol=1e-15)


def test_subspace_flags(so4):
    g1 = factor_subspace(so4, 0)
    assert g1.is_subalgebra and g1.is_ideal and not g1.is_abelian
    delta = diagonal_subalgebra(so4)
    assert delta.is_subalgebra and not delta.is_ideal
    plane = span(so4, [embed([1, 0, 0]), embed(v=[0, 0, 1])])
    assert plane.is_abelian
    line = span(so4, [embed([1, 0, 0], [0, 1, 0])])
    assert line.is_abelian


def test_centralizer_of_so4_vector(so4):
    X = embed([0, 0, 2.0], [1.0, 0, 0])
    C = centralizer_basis(so4, X)
    assert C.dim == 2
    assert_allclose(C.basis[0], X / np.linalg.norm(X))
    for Y in C.basis:
        assert commutes(so4, X, Y)


def test_centralizer_of_zero(so3):
    with pytest.raises(DegenerateError):
        centralizer_basis(so3, np.zeros(3))


def test_projection_and_complement(so4, rng):
    delta = diagonal_subalgebra(so4)
    rest = orthogonal_complement(so4, delta)
    assert rest.dim == 3
    X = rng.normal(6)
    assert_allclose(project(so4, delta, X) + project(so4, rest, X), X, atol=1e-14)
    P = projection_matrix(so4, delta)
    assert_allclose(P @ P, P, atol=1e-14)


def test_derived_subalgebra(so3, so4):
    assert derived_subalgebra(so3).dim == 3
    assert derived_subalgebra(so4).dim == 6


def test_with_inner_product(so4):
    gram = np.diag([2.0] * 3 + [0.5] * 3)
    L1 = with_inner_product(so4, gram)
    assert_allclose(L1.h0, gram)
    with pytest.raises(StructureError):
        with_inner_product(so4, np.diag([1.0, 2.0, 1.0, 1.0, 1.0, 1.0]))


def test_commuting_is_relative(so3):
    X = np.array([1e6, 0, 0])
    Y = np.array([1e6, 1e-12, 0])
    assert commutes(so3, X, Y)
    assert not commutes(so3, np.array([1.0, 0, 0]), np.array([0, 1.0, 0]))
