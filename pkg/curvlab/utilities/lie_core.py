'''
Lie algebra arithmetic over structure constants.

An algebra is stored as the rank-3 array c with [e_i, e_j] = sum_k c[i][j][k] e_k and
the Gram matrix h0 of a bi-invariant reference inner product. Vectors are plain numpy
arrays of coordinates in the canonical basis.
'''
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy import linalg

from curvlab.utilities.errors import AlgebraError, DegenerateError, DimensionError, InputError, StructureError
from curvlab.utilities.misc import validate_json

logger = logging.getLogger(__name__)

Vector = np.ndarray

AXIOM_TOL = 1e-12 #antisymmetry, Jacobi and ad-invariance residuals
RANK_TOL = 1e-9 #relative singular value / Gram-Schmidt threshold
CLOSURE_TOL = 1e-10 #subalgebra, abelian and ideal flags
COMMUTING_TOL = 1e-10 #|[X,Y]| <= COMMUTING_TOL*|X||Y| means commuting


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    name: str
    structure: np.ndarray
    h0: np.ndarray = None
    factors: tuple = ()

    def __post_init__(self):
        structure = np.array(self.structure, dtype=float)
        if structure.ndim != 3 or len(set(structure.shape)) != 1 or structure.shape[0] == 0:
            raise AlgebraError(f'structure constants of {self.name} must be an n x n x n array, got shape {structure.shape}')
        n = structure.shape[0]
        h0 = np.eye(n) if self.h0 is None else np.array(self.h0, dtype=float)
        if h0.shape != (n, n):
            raise AlgebraError(f'h0 of {self.name} must be {n} x {n}, got {h0.shape}')
        structure.setflags(write=False)
        h0.setflags(write=False)
        object.__setattr__(self, 'structure', structure)
        object.__setattr__(self, 'h0', h0)
        object.__setattr__(self, 'factors', tuple(int(f) for f in self.factors))

    @property
    def dim(self):
        return self.structure.shape[0]

    def basis(self):
        return np.eye(self.dim)

    def vector(self, X):
        X = np.asarray(X, dtype=float)
        if X.shape[-1:] != (self.dim,):
            raise DimensionError(f'{self.name} has dimension {self.dim}, got a vector of shape {X.shape}')
        return X

    def bracket(self, X, Y):
        #Works on single vectors and on stacks of vectors (leading batch axes)
        return np.einsum('...i,...j,ijk->...k', self.vector(X), self.vector(Y), self.structure)

    def ad(self, X):
        #Matrix of Y -> [X, Y]
        return np.einsum('i,ijk->kj', self.vector(X), self.structure)

    def inner(self, X, Y):
        return np.einsum('...i,ij,...j->...', self.vector(X), self.h0, self.vector(Y))

    def norm(self, X):
        return np.sqrt(np.maximum(self.inner(X, X), 0.0))

    @cached_property
    def chol(self):
        #Upper factor U with h0 = U^T U
        try:
            return linalg.cholesky(self.h0, lower=False)
        except linalg.LinAlgError as error:
            raise AlgebraError(f'h0 of {self.name} is not positive-definite') from error


@dataclass(frozen=True, eq=False)
class Subspace:
    '''
    Subspace of an algebra given by an h0-orthonormal basis (rows of `basis`).
    The algebraic flags are computed lazily from the structure constants.
    '''
    algebra: LieAlgebra
    basis: np.ndarray

    def __post_init__(self):
        basis = np.array(self.basis, dtype=float).reshape(-1, self.algebra.dim)
        basis.setflags(write=False)
        object.__setattr__(self, 'basis', basis)

    @property
    def dim(self):
        return self.basis.shape[0]

    def vectors(self):
        return [row for row in self.basis]

    def _outside(self, Z):
        return Z - project(self.algebra, self, Z)

    @cached_property
    def is_subalgebra(self):
        L = self.algebra
        return all(L.norm(self._outside(L.bracket(a, b))) <= CLOSURE_TOL
                   for i, a in enumerate(self.basis) for b in self.basis[i + 1:])

    @cached_property
    def is_abelian(self):
        L = self.algebra
        return all(L.norm(L.bracket(a, b)) <= CLOSURE_TOL
                   for i, a in enumerate(self.basis) for b in self.basis[i + 1:])

    @cached_property
    def is_ideal(self):
        L = self.algebra
        return all(L.norm(self._outside(L.bracket(e, b))) <= CLOSURE_TOL * L.norm(e)
                   for e in L.basis() for b in self.basis)

    def contains(self, X, tol=CLOSURE_TOL):
        L = self.algebra
        X = L.vector(X)
        return L.norm(self._outside(X)) <= tol * max(1.0, L.norm(X))


def build_so3():
    '''
    so(3) with [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2 and h0 the identity
    '''
    return _so3()


@lru_cache(maxsize=None)
def _so3():
    c = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        c[i, j, k] = 1.0
        c[j, i, k] = -1.0
    return LieAlgebra('so3', c, np.eye(3), (3,))


def direct_sum(L1, L2, name=None):
    n1, n2 = L1.dim, L2.dim
    c = np.zeros((n1 + n2,) * 3)
    c[:n1, :n1, :n1] = L1.structure
    c[n1:, n1:, n1:] = L2.structure
    h0 = linalg.block_diag(L1.h0, L2.h0)
    factors = (L1.factors or (n1,)) + (L2.factors or (n2,))
    return LieAlgebra(name or f'{L1.name}+{L2.name}', c, h0, factors)


def build_so4():
    return _so4()


@lru_cache(maxsize=None)
def _so4():
    return direct_sum(build_so3(), build_so3(), name='so4')


def is_so4(L):
    return L.dim == 6 and L.factors == (3, 3) and np.array_equal(L.structure, build_so4().structure)


def with_inner_product(L, gram, name=None):
    '''
    Same brackets, different reference inner product. The new Gram matrix must be ad-invariant.
    '''
    L1 = LieAlgebra(name or f"{L.name}'", L.structure, gram, L.factors)
    residual = ad_invariance_residual(L1)
    if residual > AXIOM_TOL * max(1.0, np.abs(L1.h0).max()):
        raise StructureError(f'inner product is not bi-invariant on {L.name} (residual {residual:.3e})')
    return L1


def bracket(L, X, Y):
    return L.bracket(X, Y)


def antisymmetry_residual(L):
    return float(np.abs(L.structure + L.structure.transpose(1, 0, 2)).max())


def jacobi_residual(L):
    c = L.structure
    T = np.einsum('ijl,lkm->ijkm', c, c) #[[e_i,e_j],e_k]
    J = T + np.einsum('jkim->ijkm', T) + np.einsum('kijm->ijkm', T)
    return float(np.abs(J).max())


def ad_invariance_residual(L):
    #<[e_i,e_j],e_k> + <e_j,[e_i,e_k]>
    c, h0 = L.structure, L.h0
    R = np.einsum('ijl,lk->ijk', c, h0) + np.einsum('jl,ikl->ijk', h0, c)
    return float(np.abs(R).max())


def validate_algebra(L):
    scale = max(1.0, float(np.abs(L.structure).max()))
    checks = (('antisymmetry', antisymmetry_residual(L)),
              ('Jacobi identity', jacobi_residual(L) / scale),
              ('ad-invariance of h0', ad_invariance_residual(L) / scale))
    for label, residual in checks:
        if residual > AXIOM_TOL:
            raise AlgebraError(f'{L.name} violates {label} (residual {residual:.3e})')
    if not np.allclose(L.h0, L.h0.T, atol=AXIOM_TOL):
        raise AlgebraError(f'h0 of {L.name} is not symmetric')
    L.chol #raises AlgebraError unless h0 is positive-definite
    logger.debug('validated algebra %s (dim %d)', L.name, L.dim)
    return L


def load_algebra(source):
    '''
    Returns a built-in algebra ("so3", "so4") or one read from a JSON descriptor
    {"name": ..., "dim": n, "structure": [[[...]]], "h0": [[...]] (optional)}
    '''
    builtins = {'so3': build_so3, 'so4': build_so4}
    if isinstance(source, LieAlgebra):
        return source
    if source in builtins:
        return builtins[source]()
    try:
        with open(source, 'r') as f:
            data = json.load(f)
    except (OSError, ValueError) as error:
        raise InputError(f'cannot read algebra descriptor {source}: {error}') from error
    validate_json(data, 'algebra-schema.json', InputError)
    structure = np.array(data['structure'], dtype=float)
    if structure.shape != (data['dim'],) * 3:
        raise AlgebraError(f'descriptor {source} declares dim {data["dim"]} but structure has shape {structure.shape}')
    L = LieAlgebra(data['name'], structure, data.get('h0'), tuple(data.get('factors', ())))
    return validate_algebra(L)


def orthonormalize(L, vectors, rank_tol=RANK_TOL):
    '''
    Order-preserving h0 Gram-Schmidt (two passes). Vectors whose residual is below
    rank_tol times the largest input norm are dropped.
    '''
    vectors = [L.vector(v) for v in vectors]
    scale = max((float(L.norm(v)) for v in vectors), default=0.0)
    basis = []
    if scale == 0.0:
        return np.zeros((0, L.dim))
    for v in vectors:
        w = np.array(v, dtype=float)
        for _ in range(2):
            for b in basis:
                w = w - L.inner(b, w) * b
        length = float(L.norm(w))
        if length > rank_tol * scale:
            basis.append(w / length)
    return np.array(basis).reshape(len(basis), L.dim)


def span(L, vectors):
    return Subspace(L, orthonormalize(L, vectors))


def _nullspace(matrix, rank_tol=RANK_TOL):
    #Rows spanning {v : matrix @ v = 0}, singular values <= rank_tol*max counted as zero
    n = matrix.shape[1]
    if matrix.size == 0:
        return np.eye(n)
    _, s, vt = np.linalg.svd(matrix)
    if s.size == 0 or s[0] == 0.0:
        return np.eye(n)
    rank = int(np.sum(s > rank_tol * s[0]))
    return vt[rank:]


def centralizer_basis(L, X):
    '''
    h0-orthonormal basis of {Y : [X,Y] = 0}; the first basis vector is X/|X|
    '''
    X = L.vector(X)
    if L.norm(X) == 0.0:
        raise DegenerateError('the centralizer of the zero vector is the whole algebra')
    null = _nullspace(L.ad(X))
    return Subspace(L, orthonormalize(L, [X] + list(null)))


def project(L, S, X):
    X = L.vector(X)
    return (X @ L.h0 @ S.basis.T) @ S.basis


def projection_matrix(L, S):
    return S.basis.T @ S.basis @ L.h0


def orthogonal_complement(L, S):
    if S.dim == 0:
        return Subspace(L, orthonormalize(L, L.basis()))
    return Subspace(L, orthonormalize(L, _nullspace(S.basis @ L.h0)))


def derived_subalgebra(L):
    '''
    [g,g], spanned by all basis brackets
    '''
    n = L.dim
    brackets = [L.structure[i, j] for i in range(n) for j in range(i + 1, n)]
    return span(L, brackets)


def factor_subspace(L, index):
    if not L.factors or index >= len(L.factors):
        raise StructureError(f'{L.name} has no factor {index}')
    start = sum(L.factors[:index])
    return span(L, L.basis()[start:start + L.factors[index]])


def diagonal_subalgebra(L):
    '''
    The diagonal {(v, v)} of a direct sum of two equal factors
    '''
    if len(L.factors) != 2 or L.factors[0] != L.factors[1]:
        raise StructureError(f'{L.name} is not a sum of two equal factors')
    d = L.factors[0]
    return span(L, [np.concatenate([e, e]) for e in np.eye(d)])


def commutator_norm(L, X, Y):
    return float(L.norm(L.bracket(X, Y)))


def commutes(L, X, Y, tol=COMMUTING_TOL):
    return commutator_norm(L, X, Y) <= tol * float(L.norm(X)) * float(L.norm(Y))
