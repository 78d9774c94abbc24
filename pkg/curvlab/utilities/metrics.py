'''
Left-invariant metrics as endomorphisms relative to the reference inner product h0.

A metric h is stored as the endomorphism Phi with h(X,Y) = h0(Phi X, Y). A direction Psi
generates the inverse-linear path Phi_t = (I - t Psi)^-1. Both are h0-self-adjoint, so
their spectra come from the generalized symmetric eigenproblem (h0 Phi) v = a h0 v.
'''
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from curvlab.utilities.errors import DimensionError, DomainError, InputError, MetricError
from curvlab.utilities.misc import validate_json

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
POLE_TOL = 1e-12 #t is rejected once 1 - t*a drops below this
SPECTRAL_TOL = 1e-10


def _as_square(matrix, h0, label):
    matrix = np.array(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f'{label} must be a square matrix, got shape {matrix.shape}')
    n = matrix.shape[0]
    h0 = np.eye(n) if h0 is None else np.array(h0, dtype=float)
    if h0.shape != (n, n):
        raise DimensionError(f'{label} is {n} x {n} but h0 is {h0.shape}')
    return matrix, h0


def _check_self_adjoint(matrix, h0, label):
    gram = h0 @ matrix
    scale = max(1.0, float(np.abs(gram).max()))
    asymmetry = float(np.abs(gram - gram.T).max())
    if asymmetry > SYMMETRY_TOL * scale:
        raise MetricError(f'{label} is not h0-self-adjoint (asymmetry {asymmetry:.3e})')


class _SelfAdjoint:
    #Shared spectral machinery of MetricForm and Direction

    @property
    def dim(self):
        return self.matrix.shape[0]

    @cached_property
    def _spectrum(self):
        gram = self.h0 @ self.matrix
        gram = (gram + gram.T) / 2
        #eigenvectors come back h0-orthonormal: V^T h0 V = I
        return linalg.eigh(gram, self.h0)

    @property
    def eigvals(self):
        return self._spectrum[0]

    @property
    def eigvecs(self):
        return self._spectrum[1]

    def spectral(self, fn):
        '''
        Returns V diag(fn(a)) V^T h0, the endomorphism with the same eigenvectors
        '''
        a, V = self._spectrum
        return (V * fn(a)) @ V.T @ self.h0

    def apply(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1:] != (self.dim,):
            raise DimensionError(f'expected vectors of length {self.dim}, got shape {X.shape}')
        return X @ self.matrix.T

    def op_norm(self):
        return float(np.abs(self.eigvals).max())


@dataclass(frozen=True, eq=False)
class MetricForm(_SelfAdjoint):
    phi: np.ndarray
    h0: np.ndarray = None

    def __post_init__(self):
        phi, h0 = _as_square(self.phi, self.h0, 'metric form')
        _check_self_adjoint(phi, h0, 'metric form')
        phi.setflags(write=False)
        h0.setflags(write=False)
        object.__setattr__(self, 'phi', phi)
        object.__setattr__(self, 'h0', h0)
        if self.eigvals[0] <= 0.0:
            raise MetricError(f'metric form is not positive-definite (smallest eigenvalue {self.eigvals[0]:.3e})')

    @property
    def matrix(self):
        return self.phi

    @cached_property
    def inverse(self):
        return self.spectral(lambda a: 1.0 / a)

    @property
    def gram(self):
        #Gram matrix of h in the canonical basis
        return self.h0 @ self.phi

    def inner(self, X, Y):
        return np.einsum('...i,ij,...j->...', X, self.gram, Y)

    def solve(self, X):
        return np.asarray(X, dtype=float) @ self.inverse.T


@dataclass(frozen=True, eq=False)
class Direction(_SelfAdjoint):
    psi: np.ndarray
    h0: np.ndarray = None

    def __post_init__(self):
        psi, h0 = _as_square(self.psi, self.h0, 'direction')
        _check_self_adjoint(psi, h0, 'direction')
        psi.setflags(write=False)
        h0.setflags(write=False)
        object.__setattr__(self, 'psi', psi)
        object.__setattr__(self, 'h0', h0)

    @property
    def matrix(self):
        return self.psi

    def consistency_residual(self):
        #|V diag(a) V^T h0 - psi|, the spectral cache against the matrix
        return float(np.abs(self.spectral(lambda a: a) - self.psi).max())

    def power(self, n):
        return self.spectral(lambda a: a ** n)


@dataclass(frozen=True)
class PathDomain:
    '''
    Open interval (lower, upper) of t with 1 - t*a > 0 for every eigenvalue a
    '''
    lower: float
    upper: float

    def contains(self, t):
        return self.lower < t < self.upper

    def grid(self, fraction=0.9, count=20, cap=10.0):
        lo = fraction * self.lower if math.isfinite(self.lower) else -cap
        hi = fraction * self.upper if math.isfinite(self.upper) else cap
        return np.linspace(lo, hi, count)

    def to_dict(self):
        return {'lower': self.lower, 'upper': self.upper}


@dataclass(frozen=True)
class ShiftedDirection:
    '''
    Psi + aI with the reparametrization s -> t = s/(1 - s*a) and scale c = 1 - s*a,
    under which c * Phi~(s) = Phi(t)
    '''
    direction: Direction
    base: Direction
    a: float

    def time(self, s):
        return s / (1.0 - s * self.a)

    def scale(self, s):
        return 1.0 - s * self.a


def as_metric(L, phi):
    if isinstance(phi, MetricForm):
        if phi.dim != L.dim:
            raise DimensionError(f'{L.name} has dimension {L.dim}, metric form is {phi.dim} x {phi.dim}')
        return phi
    return MetricForm(phi, L.h0)


def as_direction(L, psi):
    if isinstance(psi, Direction):
        if psi.dim != L.dim:
            raise DimensionError(f'{L.name} has dimension {L.dim}, direction is {psi.dim} x {psi.dim}')
        return psi
    return Direction(psi, L.h0)


def direction_from_metric(Phi):
    '''
    Psi = I - Phi^-1, the direction whose path reaches Phi at t = 1
    '''
    return Direction(np.eye(Phi.dim) - Phi.inverse, Phi.h0)


def cheeger_direction(Phi):
    #Psi = -Phi^-1; shifting by I gives direction_from_metric(Phi)
    return Direction(-Phi.inverse, Phi.h0)


def domain_of(Psi):
    a = Psi.eigvals
    upper = 1.0 / a.max() if a.max() > 0 else math.inf
    lower = 1.0 / a.min() if a.min() < 0 else -math.inf
    return PathDomain(lower, upper)


def path_at(Psi, t):
    a = Psi.eigvals
    margins = 1.0 - t * a
    worst = int(np.argmin(margins))
    if margins[worst] <= POLE_TOL:
        raise DomainError(t, float(a[worst]), domain_of(Psi))
    return MetricForm(Psi.spectral(lambda a: 1.0 / (1.0 - t * a)), Psi.h0)


def shift_direction(Psi, a):
    shifted = Direction(Psi.psi + a * np.eye(Psi.dim), Psi.h0)
    return ShiftedDirection(shifted, Psi, float(a))


def canonical_direction(Psi):
    '''
    Representative of {b Psi + a I : b > 0}: smallest eigenvalue 0, operator norm 1.
    Multiples of the identity map to the zero direction.
    '''
    a = Psi.eigvals
    spread = float(a.max() - a.min())
    if spread <= SPECTRAL_TOL * max(1.0, float(np.abs(a).max())):
        return Direction(np.zeros_like(Psi.psi), Psi.h0)
    return Direction((Psi.psi - a.min() * np.eye(Psi.dim)) / spread, Psi.h0)


def load_form(path, load_algebra):
    '''
    Reads a metric/direction file {"algebra": ..., "phi" | "psi": [[...]]}.
    Returns (algebra, form, document); form is a MetricForm for "phi", a Direction for "psi".
    '''
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except (OSError, ValueError) as error:
        raise InputError(f'cannot read {path}: {error}') from error
    validate_json(data, 'input-schema.json', InputError)
    L = load_algebra(data['algebra'])
    key = 'phi' if 'phi' in data else 'psi'
    rows = data[key]
    if any(len(row) != len(rows) for row in rows):
        raise InputError(f'{path}: {key} is not a square matrix')
    try:
        form = as_metric(L, rows) if key == 'phi' else as_direction(L, rows)
    except (DimensionError, MetricError) as error:
        raise InputError(f'{path}: {error}') from error
    logger.debug('loaded %s from %s on %s', key, path, L.name)
    return L, form, data


def form_document(L, form, family=None, params=None):
    key = 'phi' if isinstance(form, MetricForm) else 'psi'
    doc = {'algebra': L.name, key: form.matrix.tolist()}
    if family is not None:
        doc['family'] = family
    if params is not None:
        doc['params'] = params
    return doc


def dump_form(doc):
    validate_json(doc, 'input-schema.json', InputError)
    return json.dumps(doc, indent=4, sort_keys=True, allow_nan=False) + '\n'
