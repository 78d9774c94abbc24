'''
variations:
  families      Cheeger deformations, shrinking and enlarging subalgebras
  sampling      commuting pairs and the infinitesimal nonnegativity report
  rigidity      smallest-eigenspace lemmas, sampled curvature minimum
  shifts        directions taken from a different bi-invariant reference metric
'''
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from curvlab.utilities.curvature import kappa
from curvlab.utilities.errors import DegenerateError, DomainError, StructureError
from curvlab.utilities.lie_core import diagonal_subalgebra, factor_subspace, span
from curvlab.utilities.metrics import Direction, direction_from_metric
from curvlab.utilities.reports import Verdict
from curvlab.utilities.so4 import mixing_counterexample
from curvlab.utilities.variations import (abelian_enlarge_kappa, bracket_ratio_sup, biinvariant_shift_check,
                                          cheeger_evolve, cheeger_monotonicity_check, eschenburg_zero_check,
                                          expand_direction, global_rigidity_check,
                                          infinitesimal_nonnegativity_report, lemma_k_check,
                                          max_abelian_expansion_check, min_curvature_estimate,
                                          nonabelian_enlarge_kappa, sample_commuting_pairs,
                                          scalar_shift_kappa_deviation, shifted_direction, shrink_direction,
                                          smallest_eigenspace)

from .conftest import embed

E = np.eye(3)


def test_cheeger_evolve_diagonal():
    assert_allclose(cheeger_evolve(np.diag([1.0, 2.0]), 1.0), np.diag([0.5, 2.0 / 3.0]), atol=1e-15)


def test_cheeger_evolve_is_inverse_linear(rng):
    A0 = rng.spd(4)
    for t in (0.0, 0.5, 3.0):
        assert_allclose(np.linalg.inv(cheeger_evolve(A0, t)), np.linalg.inv(A0) + t * np.eye(4), atol=1e-10)


def test_cheeger_evolve_singular():
    with pytest.raises(DegenerateError):
        cheeger_evolve(np.diag([1.0, 2.0]), -1.0)


def test_families_need_subalgebras(so3):
    plane = span(so3, [E[0], E[1]])
    with pytest.raises(StructureError):
        shrink_direction(so3, plane)
    with pytest.raises(StructureError):
        expand_direction(so3, plane)


def test_abelian_formula_needs_abelian_subalgebra(so4):
    with pytest.raises(StructureError):
        abelian_enlarge_kappa(so4, factor_subspace(so4, 0), embed(E[0]), embed(E[1]), 0.2)


def test_enlargement_stops_at_one(so3):
    with pytest.raises(DomainError):
        abelian_enlarge_kappa(so3, span(so3, [E[2]]), E[0], E[1], 1.0)


def test_abelian_enlargement_matches_kappa(so4, rng):
    S = span(so4, [embed(E[0]), embed(v=E[0])])
    Psi = expand_direction(so4, S)
    X, Y = rng.normal(6), rng.normal(6)
    for t in (-2.0, 0.1, 0.5, 0.9):
        assert abelian_enlarge_kappa(so4, S, X, Y, t) == pytest.approx(kappa(so4, Psi, X, Y, t), rel=1e-10, abs=1e-12)


def test_nonabelian_enlargement_of_a_factor(so4):
    S = factor_subspace(so4, 0)
    X, Y = embed(E[0], E[0]), embed(E[1], E[1])
    for t in (-1.0, 0.2, 0.5):
        expected = 0.5 - 0.75 * t + 0.75 * t ** 2 - 0.25 * t ** 3
        assert nonabelian_enlarge_kappa(so4, S, X, Y, t) == pytest.approx(expected, abs=1e-12)
        assert kappa(so4, expand_direction(so4, S), X, Y, t) == pytest.approx(expected, abs=1e-12)


def test_nonabelian_enlargement_matches_kappa(so4, rng):
    S = diagonal_subalgebra(so4)
    Psi = expand_direction(so4, S)
    X, Y = rng.normal(6), rng.normal(6)
    for t in (-1.5, 0.3, 0.8):
        assert nonabelian_enlarge_kappa(so4, S, X, Y, t) == pytest.approx(kappa(so4, Psi, X, Y, t), rel=1e-10, abs=1e-12)


def test_max_abelian_expansion(so3):
    S = span(so3, [E[2]])
    passed = max_abelian_expansion_check(so3, S, 0.25, 16, 0)
    assert passed.verdict == Verdict.PASS
    assert passed.samples_used == 17
    failed = max_abelian_expansion_check(so3, S, 0.3, 16, 0)
    assert failed.verdict == Verdict.FAIL
    assert failed.witnesses[0].value == pytest.approx(1.0 / 0.7)


def test_bracket_ratio(so4):
    assert bracket_ratio_sup(so4, factor_subspace(so4, 0), 32, 0) <= 1.0 + 1e-9
    assert math.isinf(bracket_ratio_sup(so4, diagonal_subalgebra(so4), 32, 0))


def test_commuting_pairs(so4):
    pairs = sample_commuting_pairs(so4, 24, 7)
    assert len(pairs) == 24
    for pair in pairs:
        assert np.linalg.norm(so4.bracket(pair.X, pair.Y)) <= 1e-10
        assert_allclose([pair.X @ pair.X, pair.Y @ pair.Y, pair.X @ pair.Y], [1.0, 1.0, 0.0], atol=1e-12)
    assert [p.index for p in pairs] == list(range(24))


def test_commuting_pairs_are_deterministic(so4):
    first, second = sample_commuting_pairs(so4, 5, 3), sample_commuting_pairs(so4, 5, 3)
    for a, b in zip(first, second):
        assert_allclose(a.X, b.X)
        assert_allclose(a.Y, b.Y)


def test_no_commuting_pairs_in_so3(so3):
    #centralizers in so3 are lines
    assert sample_commuting_pairs(so3, 4, 0) == []
    report = infinitesimal_nonnegativity_report(so3, np.zeros((3, 3)), 4, 1e-9, 0)
    assert report.verdict == Verdict.INCONCLUSIVE


def test_nonnegativity_of_catalog_directions(so4, catalog):
    for entry in catalog:
        report = infinitesimal_nonnegativity_report(so4, direction_from_metric(entry.form), 48, 1e-9, 0)
        assert report.verdict == Verdict.PASS, entry.name


def test_enlarging_the_diagonal_is_not_nonnegative(so4):
    Psi = expand_direction(so4, diagonal_subalgebra(so4))
    report = infinitesimal_nonnegativity_report(so4, Psi, 16, 1e-9, 0)
    assert report.verdict == Verdict.FAIL
    assert report.witnesses[0].value < -1e-3
    assert len(report.rows) == 16


def test_smallest_eigenspace(so4):
    Phi = mixing_counterexample()
    p0 = smallest_eigenspace(so4, Phi)
    assert p0.dim == 1
    assert abs(p0.basis[0, 0]) == pytest.approx(1.0)


def test_rigidity_of_catalog_metrics(so4, catalog):
    for entry in catalog:
        assert lemma_k_check(so4, direction_from_metric(entry.form), 16, 1e-9, 0).passed, entry.name
        assert global_rigidity_check(so4, entry.form, 16, 1e-9, 0).passed, entry.name


def test_mixing_counterexample_fails_rigidity(so4):
    report = global_rigidity_check(so4, mixing_counterexample(), 16, 1e-9, 0)
    assert report.verdict == Verdict.FAIL
    assert report.witnesses
    assert report.details['p0_dim'] == 1


def test_min_curvature_finds_the_negative_plane(so3):
    Phi = np.diag([1.0, 1.0, 1.0 / 0.7])
    value, (X, Y) = min_curvature_estimate(so3, Phi, 32, 20, 0)
    assert value <= -0.07
    assert_allclose([X @ X, Y @ Y, X @ Y], [1.0, 1.0, 0.0], atol=1e-9)


def test_min_curvature_of_round_so3(so3):
    value, _ = min_curvature_estimate(so3, np.eye(3), 16, 10, 0)
    assert value == pytest.approx(0.25, abs=1e-9)


def test_shift_needs_biinvariant_reference(so4, rng):
    with pytest.raises(StructureError):
        shifted_direction(so4, np.diag([1.0, 2.0, 1.0, 1.0, 1.0, 1.0]), np.zeros((6, 6)))


def test_shifted_direction_of_identity(so4):
    #starting from h1 = 2 h0, the metric h0 is reached in direction I - M = -I
    _, Ups = shifted_direction(so4, 2.0 * np.eye(6), np.zeros((6, 6)))
    assert_allclose(Ups.psi, -np.eye(6), atol=1e-15)


def test_biinvariant_shift_identities(so4, rng):
    Psi = Direction(rng.symmetric(6, 0.2), so4.h0)
    pair = sample_commuting_pairs(so4, 1, 5)[0]
    for M in (np.diag([0.7] * 3 + [1.6] * 3), 1.3 * np.eye(6)):
        report = biinvariant_shift_check(so4, M, Psi, pair)
        assert report.verdict == Verdict.PASS, report.details


def test_scalar_shift_for_noncommuting_planes(so3, rng):
    Psi = Direction(rng.symmetric(3, 0.2), so3.h0)
    X, Y = rng.normal(3), rng.normal(3)
    for t in (0.0, 0.3, 0.6):
        assert scalar_shift_kappa_deviation(so3, 0.8, Psi, X, Y, t) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize('subalgebra', ['diagonal', 'factor'])
def test_zero_planes_of_shrunk_metrics(so4, subalgebra):
    S = diagonal_subalgebra(so4) if subalgebra == 'diagonal' else factor_subspace(so4, 0)
    report = eschenburg_zero_check(so4, S, 0.5, 24, 0)
    assert report.verdict == Verdict.PASS
    assert any(abs(row['kappa']) <= 1e-9 for row in report.rows)


def test_cheeger_monotonicity(so3, so4, catalog):
    assert cheeger_monotonicity_check(so3, np.diag([1.0, 1.0, 1.2]), (0.5, 1.0, 2.0), 16, 0).passed
    entry = catalog[0]
    assert cheeger_monotonicity_check(so4, entry.form, (0.5, 2.0), 8, 0).passed


def test_expansion_check_out_of_domain(so3):
    with pytest.raises(DomainError):
        max_abelian_expansion_check(so3, span(so3, [E[2]]), 1.5, 4, 0)
