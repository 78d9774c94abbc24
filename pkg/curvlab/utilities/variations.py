'''
Families of inverse-linear variations and the sampled checks built on them: Cheeger
deformations, shrinking and enlarging subalgebras, the infinitesimal nonnegativity test,
the rigidity lemmas, plane-sampling curvature estimates and the identities relating
directions taken from different bi-invariant reference metrics.

Every sampled check draws sample i from SeededRNG(seed).fork(i), so a report depends only
on (seed, samples, tol).
'''
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from curvlab.utilities.curvature import kappa, kappa_coefficients, puttmann_curvature_batch
from curvlab.utilities.errors import CommutingError, DegenerateError, DomainError, MetricError, StructureError
from curvlab.utilities.lie_core import (COMMUTING_TOL, Subspace, centralizer_basis, commutes, derived_subalgebra,
                                        is_so4, orthonormalize, project, projection_matrix, with_inner_product)
from curvlab.utilities.metrics import (Direction, PathDomain, as_direction, as_metric, cheeger_direction,
                                       path_at)
from curvlab.utilities.misc import SeededRNG, parallel_map
from curvlab.utilities.reports import Witness, build_report

logger = logging.getLogger(__name__)

NONNEG_TOL = 1e-9
D_TOL = 1e-6 #|D| allowed when |delta| <= tol
EIGEN_TOL = 1e-9 #relative gap defining the smallest eigenspace
ZERO_PLANE_TOL = 1e-9
SEPARATION = 1e-3 #planes with bracket norms in (ZERO_PLANE_TOL, SEPARATION) are not classified
RESAMPLE_LIMIT = 16
SINGULAR_EVERY = 8 #every 8th so4 commuting pair is a singular one, (u,0) and (0,v)
REFINE_TOP = 8
EXPANSION_BOUND = 4.0 / 3.0
SINGULAR_COND = 1e14


def cheeger_evolve(A0, t):
    '''
    A^t = A^0 (I + t A^0)^-1
    '''
    A0 = np.asarray(A0, dtype=float)
    M = np.eye(A0.shape[0]) + t * A0
    if np.linalg.cond(M) > SINGULAR_COND:
        raise DegenerateError(f'I + tA0 is singular at t={t!r}')
    At = linalg.solve(M.T, A0.T).T
    return (At + At.T) / 2


def _require_subalgebra(S):
    if not S.is_subalgebra:
        raise StructureError('subspace is not closed under the bracket')


def _require_abelian(S):
    _require_subalgebra(S)
    if not S.is_abelian:
        raise StructureError('subspace is not abelian')


def shrink_direction(L, S):
    #Psi = -proj_S, the Cheeger deformation by the subgroup with algebra S
    _require_subalgebra(S)
    return Direction(-projection_matrix(L, S), L.h0)


def expand_direction(L, S):
    _require_subalgebra(S)
    return Direction(projection_matrix(L, S), L.h0)


def _check_below_one(t):
    if t >= 1.0:
        raise DomainError(t, 1.0, PathDomain(-math.inf, 1.0))


def abelian_enlarge_kappa(L, S, X, Y, t):
    '''
    1/4 |[X,Y]|^2 - 3/4 |[X,Y]^h|^2 t/(1-t), the twisted curvature when an abelian
    subalgebra is enlarged
    '''
    _require_abelian(S)
    _check_below_one(t)
    XY = L.bracket(X, Y)
    XYh = project(L, S, XY)
    return float(0.25 * L.inner(XY, XY) - 0.75 * L.inner(XYh, XYh) * t / (1.0 - t))


def nonabelian_enlarge_kappa(L, S, X, Y, t):
    _require_subalgebra(S)
    _check_below_one(t)
    X, Y = L.vector(X), L.vector(Y)
    Xh, Yh = project(L, S, X), project(L, S, Y)
    Xm, Ym = X - Xh, Y - Yh
    XY = L.bracket(X, Y)
    XYh = project(L, S, XY)
    B = L.bracket(Xh, Yh)
    Bm = project(L, S, L.bracket(Xm, Ym))
    nB = L.inner(B, B)
    value = (0.25 * L.inner(XY, XY) - 0.75 * L.inner(XYh, XYh) * t + 0.75 * nB * t ** 2
             - 0.25 * nB * t ** 3 - 0.75 * L.inner(Bm, Bm) * t ** 2 / (1.0 - t))
    return float(value)


def max_abelian_expansion_check(L, S, t, samples, seed, tol=NONNEG_TOL):
    '''
    Samples unit Z in [g,g] and checks |Z|^2_{h_t} <= 4/3 |Z|^2 for the enlarged metric.
    The exact maximizer (top eigenvector of h_t compressed to [g,g]) is appended as the
    last candidate.
    '''
    _require_abelian(S)
    _check_below_one(t)
    Phi_t = path_at(expand_direction(L, S), t)
    derived = derived_subalgebra(L)
    root = SeededRNG(seed)

    def candidate(index, Z):
        Z = Z / L.norm(Z)
        value = float(Phi_t.inner(Z, Z))
        return Witness('expansion', value, EXPANSION_BOUND + tol - value, X=Z, t=t, index=index)

    candidates = []
    if derived.dim > 0:
        for i in range(samples):
            candidates.append(candidate(i, root.fork(i).normal(derived.dim) @ derived.basis))
        compressed = derived.basis @ Phi_t.gram @ derived.basis.T
        _, vecs = linalg.eigh((compressed + compressed.T) / 2)
        candidates.append(candidate(samples, vecs[:, -1] @ derived.basis))
    rows = [{'index': w.index, 'expansion': w.value} for w in candidates]
    return build_report('max_abelian_expansion', candidates, len(candidates), tol, seed, rows=rows,
                        details={'t': float(t), 'derived_dim': derived.dim})


def random_orthonormal_pair(L, rng):
    while True:
        pair = orthonormalize(L, [rng.normal(L.dim), rng.normal(L.dim)])
        if pair.shape[0] == 2:
            return pair[0], pair[1]


def bracket_ratio_sup(L, S, samples, seed):
    '''
    Estimated sup of |[X^h,Y^h]| / |[X,Y]|. Infinite when a commuting pair with
    [X^h,Y^h] != 0 turns up, which certifies that small enlargements of S create
    negative curvature.
    '''
    root = SeededRNG(seed)
    best = 0.0
    for pair in sample_commuting_pairs(L, samples, seed):
        numerator = float(L.norm(L.bracket(project(L, S, pair.X), project(L, S, pair.Y))))
        if numerator > ZERO_PLANE_TOL:
            logger.debug('bracket ratio unbounded: commuting pair %d has |[X^h,Y^h]|=%.3e', pair.index, numerator)
            return math.inf
    for i in range(samples):
        X, Y = random_orthonormal_pair(L, root.fork(samples + i))
        numerator = float(L.norm(L.bracket(project(L, S, X), project(L, S, Y))))
        denominator = float(L.norm(L.bracket(X, Y)))
        if denominator <= ZERO_PLANE_TOL:
            if numerator > ZERO_PLANE_TOL:
                return math.inf
            continue
        best = max(best, numerator / denominator)
    return best


@dataclass(frozen=True)
class CommutingPair:
    X: np.ndarray
    Y: np.ndarray
    commutator_norm: float
    index: int = None

    @classmethod
    def from_vectors(cls, L, X, Y, index=None):
        '''
        Orthonormalizes (X, Y) and checks that they commute
        '''
        X, Y = L.vector(X), L.vector(Y)
        pair = orthonormalize(L, [X, Y])
        if pair.shape[0] != 2:
            raise DegenerateError('X and Y are linearly dependent')
        if not commutes(L, X, Y):
            raise CommutingError(f'X and Y do not commute (|[X,Y]| = {float(L.norm(L.bracket(X, Y))):.3e})')
        return cls(pair[0], pair[1], float(L.norm(L.bracket(pair[0], pair[1]))), index)


def _so4_pair(L, rng, index):
    #X = (a u, b v), Y = (c u, d v) with (a,b) orthogonal to (c,d)
    u, v = rng.unit_vector(3), rng.unit_vector(3)
    theta = 0.0 if index % SINGULAR_EVERY == 0 else rng.uniform(0.0, np.pi)
    a, b, c, d = np.cos(theta), np.sin(theta), -np.sin(theta), np.cos(theta)
    return CommutingPair.from_vectors(L, np.concatenate([a * u, b * v]), np.concatenate([c * u, d * v]), index)


def _general_pair(L, rng, index):
    for _ in range(RESAMPLE_LIMIT):
        X = rng.unit_vector(L.dim, L.h0)
        C = centralizer_basis(L, X)
        if C.dim > 1:
            Y = rng.normal(C.dim - 1) @ C.basis[1:]
            return CommutingPair.from_vectors(L, X, Y, index)
    return None


def sample_commuting_pairs(L, n, seed):
    '''
    n commuting orthonormal pairs (fewer, possibly none, when centralizers are lines)
    '''
    root = SeededRNG(seed)
    make = _so4_pair if is_so4(L) else _general_pair
    pairs = parallel_map(lambda i: make(L, root.fork(i), i), range(n))
    pairs = [p for p in pairs if p is not None]
    if len(pairs) < n:
        logger.debug('%s: %d of %d commuting pairs sampled', L.name, len(pairs), n)
    return pairs


def infinitesimal_nonnegativity_report(L, Psi, samples, tol, seed, d_tol=D_TOL, pairs=None):
    '''
    For each commuting pair: delta must be >= -tol, and |delta| <= tol requires |D| <= d_tol.
    '''
    Psi = as_direction(L, Psi)
    pairs = sample_commuting_pairs(L, samples, seed) if pairs is None else pairs

    def measure(pair):
        coefs = kappa_coefficients(L, Psi, pair.X, pair.Y)
        D_norm = float(L.norm(coefs.D))
        row = {'index': pair.index, 'delta': coefs.delta, 'D_norm': D_norm, 'commutator_norm': pair.commutator_norm}
        if abs(coefs.delta) <= tol and D_norm > d_tol:
            return row, Witness('D', D_norm, d_tol - D_norm, pair.X, pair.Y, index=pair.index)
        return row, Witness('delta', coefs.delta, coefs.delta + tol, pair.X, pair.Y, index=pair.index)

    measured = parallel_map(measure, pairs)
    return build_report('infinitesimal_nonnegativity', [w for _, w in measured], len(pairs), tol, seed,
                        rows=[r for r, _ in measured], inconclusive=not pairs)


def smallest_eigenspace(L, form, tol=EIGEN_TOL):
    a, V = form.eigvals, form.eigvecs
    cut = a[0] + tol * max(1.0, float(np.abs(a).max()))
    return Subspace(L, V[:, a <= cut].T)


def _rigidity_check(L, name, form, operator, samples, tol, seed):
    #X in the smallest eigenspace p0, Y in the centralizer of X: [X, operator(Y)] must lie in p0
    p0 = smallest_eigenspace(L, form)
    root = SeededRNG(seed)
    scale = tol * max(1.0, form.op_norm())

    def measure(i):
        rng = root.fork(i)
        X = rng.normal(p0.dim) @ p0.basis
        X = X / L.norm(X)
        C = centralizer_basis(L, X)
        Y = rng.normal(C.dim) @ C.basis
        Y = Y / L.norm(Y)
        W = L.bracket(X, operator(Y))
        residual = float(L.norm(W - project(L, p0, W)))
        return Witness('rigidity', residual, scale - residual, X, Y, index=i)

    candidates = parallel_map(measure, range(samples))
    rows = [{'index': w.index, 'residual': w.value} for w in candidates]
    return build_report(name, candidates, samples, tol, seed, rows=rows,
                        details={'p0_dim': p0.dim, 'smallest_eigenvalue': float(form.eigvals[0])})


def lemma_k_check(L, Psi, samples, tol, seed):
    Psi = as_direction(L, Psi)
    return _rigidity_check(L, 'lemma_k', Psi, Psi.apply, samples, tol, seed)


def global_rigidity_check(L, Phi, samples, tol, seed):
    Phi = as_metric(L, Phi)
    return _rigidity_check(L, 'global_rigidity', Phi, Phi.solve, samples, tol, seed)


def _orthonormal_batch(L, X, Y):
    X = X / L.norm(X)[..., None]
    Y = Y - L.inner(X, Y)[..., None] * X
    lengths = L.norm(Y)
    ok = lengths > 1e-9
    Y = Y / np.where(ok, lengths, 1.0)[..., None]
    return X, Y, ok


def _descend(L, Phi, X, Y, steps, step=0.25):
    '''
    Coordinate descent on the pair (X, Y): each sweep tries +-step on every coordinate of
    X and of Y, re-orthonormalizes, keeps the best move and halves the step when none helps
    '''
    best = float(puttmann_curvature_batch(L, Phi, X, Y))
    moves = np.concatenate([np.eye(L.dim), -np.eye(L.dim)])
    zeros = np.zeros_like(moves)
    for _ in range(steps):
        Xs = X + step * np.concatenate([moves, zeros])
        Ys = Y + step * np.concatenate([zeros, moves])
        Xs, Ys, ok = _orthonormal_batch(L, Xs, Ys)
        values = np.where(ok, puttmann_curvature_batch(L, Phi, Xs, Ys), np.inf)
        k = int(np.argmin(values))
        if values[k] < best:
            best, X, Y = float(values[k]), Xs[k], Ys[k]
        else:
            step /= 2
    return best, X, Y


def min_curvature_estimate(L, Phi, samples, refine_steps, seed, refine_top=REFINE_TOP):
    '''
    Smallest curvature over sampled orthonormal planes. Candidates are every pair of
    canonical basis vectors followed by `samples` random planes; the refine_top lowest are
    refined by coordinate descent. Returns (value, (X, Y)).
    '''
    Phi = as_metric(L, Phi)
    root = SeededRNG(seed)
    basis_pairs = [orthonormalize(L, [e, f]) for i, e in enumerate(L.basis()) for f in L.basis()[i + 1:]]
    random_pairs = [np.array(random_orthonormal_pair(L, root.fork(i))) for i in range(samples)]
    stack = np.array(basis_pairs + random_pairs)
    X, Y = stack[:, 0], stack[:, 1]
    values = puttmann_curvature_batch(L, Phi, X, Y)
    order = np.argsort(values, kind='stable')[:refine_top]
    refined = parallel_map(lambda k: _descend(L, Phi, X[k], Y[k], refine_steps), order)
    value, Xb, Yb = min(refined, key=lambda r: r[0])
    logger.debug('min curvature %.6e after refining %d of %d candidates', value, len(order), len(values))
    return value, (Xb, Yb)


def validate_biinvariant(L, M):
    '''
    Returns L with reference inner product h1 = <M., .>; M must be h0-self-adjoint,
    positive-definite and make h1 ad-invariant
    '''
    M = np.asarray(M, dtype=float)
    try:
        as_metric(L, M)
    except MetricError as error:
        raise StructureError(f'M is not a valid change of inner product: {error}') from error
    return with_inner_product(L, L.h0 @ M, name=f'{L.name}[M]')


def shifted_direction(L, M, Psi):
    '''
    Upsilon = I - (I - Psi) M, the direction toward the same metric as Psi but started from
    the bi-invariant metric h1 = <M., .>. It is self-adjoint for h1.
    '''
    L1 = validate_biinvariant(L, M)
    Psi = as_direction(L, Psi)
    I = np.eye(L.dim)
    return L1, Direction(I - (I - Psi.psi) @ np.asarray(M, dtype=float), L1.h0)


def scalar_shift_kappa_deviation(L, lam, Psi, X, Y, t):
    '''
    (lam/(1-(1-lam)t))^3 kappa^{Upsilon,h1}_{X,Y}(t) - kappa^{Psi,h0}_{lam X, lam Y}(lam t/(1-(1-lam)t))
    for M = lam I
    '''
    L1, Ups = shifted_direction(L, lam * np.eye(L.dim), Psi)
    X, Y = L.vector(X), L.vector(Y)
    denominator = 1.0 - (1.0 - lam) * t
    lhs = (lam / denominator) ** 3 * kappa(L1, Ups, X, Y, t)
    rhs = kappa(L, Psi, lam * X, lam * Y, lam * t / denominator)
    return float(lhs - rhs)


def biinvariant_shift_check(L, M, Psi, pair, tol=NONNEG_TOL, t_values=(0.0, 0.2, 0.5)):
    '''
    D^Upsilon_{X,Y} = D^Psi_{MX,MY} and delta^{Upsilon,h1}_{X,Y} = delta^{Psi,h0}_{MX,MY};
    for scalar M also the kappa identity at t_values
    '''
    M = np.asarray(M, dtype=float)
    L1, Ups = shifted_direction(L, M, Psi)
    Psi = as_direction(L, Psi)
    X, Y = pair.X, pair.Y
    shifted = kappa_coefficients(L1, Ups, X, Y)
    original = kappa_coefficients(L, Psi, M @ X, M @ Y)
    D_dev = float(np.abs(shifted.D - original.D).max())
    delta_dev = abs(shifted.delta - original.delta)
    candidates = [Witness('D', D_dev, tol * max(1.0, float(np.abs(original.D).max())) - D_dev, X, Y, index=pair.index),
                  Witness('delta', delta_dev, tol * max(1.0, abs(original.delta)) - delta_dev, X, Y, index=pair.index)]
    lam = float(M[0, 0])
    if np.allclose(M, lam * np.eye(L.dim), rtol=0.0, atol=1e-15):
        for t in t_values:
            dev = abs(scalar_shift_kappa_deviation(L, lam, Psi, X, Y, t))
            candidates.append(Witness('kappa', dev, 10 * tol - dev, X, Y, t=t, index=pair.index))
    return build_report('biinvariant_shift', candidates, 1, tol, 0,
                        details={'D_deviation': D_dev, 'delta_deviation': delta_dev})


def eschenburg_zero_check(L, S, t, samples, seed, tol=ZERO_PLANE_TOL):
    '''
    For the shrink family at fixed t > 0 a twisted plane is flat exactly when [X,Y] = 0 and
    [X^h,Y^h] = 0. Candidates are commuting pairs, pairs anchored in S (X in S, Y in its
    centralizer) and random planes; pairs whose bracket norms fall between tol and
    SEPARATION are left unclassified.
    '''
    Psi = shrink_direction(L, S)
    root = SeededRNG(seed)
    pairs = [(p.X, p.Y) for p in sample_commuting_pairs(L, samples, seed)]
    for i in range(samples):
        rng = root.fork(samples + i)
        if S.dim > 0 and i % 2 == 0:
            X = rng.normal(S.dim) @ S.basis
            C = centralizer_basis(L, X)
            if C.dim > 1:
                Y = rng.normal(C.dim - 1) @ C.basis[1:]
                pairs.append(tuple(orthonormalize(L, [X, Y])))
                continue
        pairs.append(random_orthonormal_pair(L, rng))

    candidates, rows, skipped = [], [], 0
    for index, (X, Y) in enumerate(pairs):
        value = kappa(L, Psi, X, Y, t)
        XY = float(L.norm(L.bracket(X, Y)))
        hh = float(L.norm(L.bracket(project(L, S, X), project(L, S, Y))))
        rows.append({'index': index, 'kappa': value, 'bracket': XY, 'projected_bracket': hh})
        if max(XY, hh) <= tol:
            candidates.append(Witness('zero_plane', value, tol - abs(value), X, Y, t=t, index=index))
        elif max(XY, hh) >= SEPARATION:
            candidates.append(Witness('curved_plane', value, value, X, Y, t=t, index=index))
        else:
            skipped += 1
    return build_report('eschenburg_zero', candidates, len(pairs), tol, seed, rows=rows,
                        details={'t': float(t), 'unclassified': skipped})


def cheeger_monotonicity_check(L, Phi, t_values, samples, seed, tol=NONNEG_TOL):
    '''
    Along the Cheeger path of a nonnegatively curved Phi, planes with kappa(0) > 0 keep
    kappa(t) > 0 for t > 0
    '''
    Psi = cheeger_direction(as_metric(L, Phi))
    root = SeededRNG(seed)
    candidates, rows = [], []
    for i in range(samples):
        X, Y = random_orthonormal_pair(L, root.fork(i))
        start = kappa(L, Psi, X, Y, 0.0)
        if start <= SEPARATION:
            continue
        for t in t_values:
            value = kappa(L, Psi, X, Y, t)
            rows.append({'index': i, 't': float(t), 'kappa0': start, 'kappa': value})
            candidates.append(Witness('cheeger', value, value + tol, X, Y, t=t, index=i))
    return build_report('cheeger_monotonicity', candidates, samples, tol, seed, rows=rows,
                        inconclusive=not candidates)
