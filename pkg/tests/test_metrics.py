'''
metrics:
  forms         validation of MetricForm and Direction, generalized spectra with h0
  paths         domain, path_at at and beyond the poles, shifted reparametrization
  directions    direction_from_metric, cheeger_direction, canonical_direction
  files         load_form and form_document
'''
import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from curvlab.utilities.errors import DimensionError, DomainError, InputError, MetricError
from curvlab.utilities.lie_core import load_algebra
from curvlab.utilities.metrics import (Direction, MetricForm, as_metric, canonical_direction, cheeger_direction,
                                       direction_from_metric, domain_of, dump_form, form_document, load_form,
                                       path_at, shift_direction)


def test_metric_must_be_positive_definite():
    with pytest.raises(MetricError):
        MetricForm(np.diag([1.0, -1.0, 1.0]))


def test_metric_must_be_self_adjoint():
    with pytest.raises(MetricError):
        MetricForm(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_self_adjoint_relative_to_h0():
    h0 = np.diag([2.0, 1.0])
    #h0 @ phi = [[2, 1], [1, 3]] is symmetric although phi is not
    phi = np.array([[1.0, 0.5], [1.0, 3.0]])
    form = MetricForm(phi, h0)
    assert_allclose(form.inverse @ phi, np.eye(2), atol=1e-14)
    V = form.eigvecs
    assert_allclose(V.T @ h0 @ V, np.eye(2), atol=1e-14)


def test_as_metric_dimension(so3):
    with pytest.raises(DimensionError):
        as_metric(so3, np.eye(4))


def test_domain_and_path():
    Psi = Direction(np.diag([2.0, -0.5, 0.0]))
    domain = domain_of(Psi)
    assert domain.upper == pytest.approx(0.5)
    assert domain.lower == pytest.approx(-2.0)
    assert_allclose(path_at(Psi, 0.25).phi, np.diag([2.0, 1 / 1.125, 1.0]))
    with pytest.raises(DomainError) as info:
        path_at(Psi, 0.5)
    assert info.value.eigenvalue == pytest.approx(2.0)
    assert info.value.t == 0.5


def test_domain_unbounded_for_negative_direction():
    domain = domain_of(Direction(-np.eye(3)))
    assert domain.upper == math.inf
    assert domain.lower == pytest.approx(-1.0)
    grid = domain.grid(0.9, 5, cap=10.0)
    assert grid[0] == pytest.approx(-0.9)
    assert grid[-1] == pytest.approx(10.0)


def test_path_at_zero_is_identity(rng):
    Psi = Direction(rng.symmetric(4))
    assert_allclose(path_at(Psi, 0.0).phi, np.eye(4), atol=1e-14)


def test_direction_from_metric_reaches_metric(rng):
    Phi = MetricForm(rng.spd(6))
    assert_allclose(path_at(direction_from_metric(Phi), 1.0).phi, Phi.phi, atol=1e-12)


def test_cheeger_direction_shifts_to_metric_direction(rng):
    Phi = MetricForm(rng.spd(3))
    shifted = shift_direction(cheeger_direction(Phi), 1.0).direction
    assert_allclose(shifted.psi, direction_from_metric(Phi).psi, atol=1e-14)


@pytest.mark.parametrize('a', [1.0, 0.4])
def test_shift_reparametrization(rng, a):
    Psi = cheeger_direction(MetricForm(rng.spd(4)))
    shifted = shift_direction(Psi, a)
    for s in np.arange(1, 10) / 10:
        lhs = shifted.scale(s) * path_at(shifted.direction, s).phi
        assert_allclose(lhs, path_at(Psi, shifted.time(s)).phi, atol=1e-12)


def test_canonical_direction(rng):
    Psi = Direction(rng.symmetric(5))
    canonical = canonical_direction(Direction(3.0 * Psi.psi + 2.0 * np.eye(5)))
    assert canonical.eigvals[0] == pytest.approx(0.0, abs=1e-12)
    assert canonical.op_norm() == pytest.approx(1.0)
    assert_allclose(canonical.psi, canonical_direction(Psi).psi, atol=1e-12)
    assert_allclose(canonical_direction(Direction(4.0 * np.eye(3))).psi, np.zeros((3, 3)))


def test_consistency_residual(rng):
    Psi = Direction(rng.symmetric(6))
    assert Psi.consistency_residual() <= 1e-12
    assert_allclose(Psi.power(2), Psi.psi @ Psi.psi, atol=1e-12)


def test_load_form_round_trip(tmp_path, so4, rng):
    Phi = MetricForm(rng.spd(6))
    path = tmp_path / 'phi.json'
    path.write_text(dump_form(form_document(so4, Phi, 'random', {'seed': 1234})))
    L, form, data = load_form(str(path), load_algebra)
    assert L.name == 'so4'
    assert isinstance(form, MetricForm)
    assert data['family'] == 'random'
    assert_allclose(form.phi, Phi.phi)


@pytest.mark.parametrize('doc', [
    {'algebra': 'so3', 'phi': [[1.0, 0.0], [0.0, 1.0]]},
    {'algebra': 'so3', 'phi': [[1.0, 0, 0], [0, -1.0, 0], [0, 0, 1.0]]},
    {'algebra': 'so3', 'phi': [[1.0, 0, 0], [0, 1.0, 0]]},
    {'algebra': 'so3', 'phi': [[1.0]], 'psi': [[1.0]]},
    {'algebra': 'so3'},
])
def test_load_form_rejects(tmp_path, doc):
    path = tmp_path / 'bad.json'
    path.write_text(json.dumps(doc))
    with pytest.raises(InputError):
        load_form(str(path), load_algebra)
