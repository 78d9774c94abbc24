'''
so(4) = so(3) + so(3): the known nonnegatively curved families, the classifier for
directions with a singular eigenvector, the adapted block basis and the six-tuple
identities.

Canonical coordinates are (A1, A2, A3, B1, B2, B3) with A_i = (e_i, 0) and B_i = (0, e_i).
A basis passed around here is a 6 x 6 array whose rows are A1, A2, A3, B1, B2, B3 of an
adapted frame; the matrix of Psi in that frame is basis @ psi @ basis.T.
'''
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace
from enum import Enum

import numpy as np
from scipy import linalg, optimize

from curvlab.utilities.curvature import puttmann_curvature, third_derivative_commuting
from curvlab.utilities.errors import ConstraintError, DegenerateError, MetricError, StructureError
from curvlab.utilities.lie_core import Subspace, build_so3, build_so4, orthonormalize
from curvlab.utilities.metrics import Direction, MetricForm, as_direction, as_metric, direction_from_metric
from curvlab.utilities.misc import SeededRNG, parallel_map
from curvlab.utilities.reports import Witness, build_report
from curvlab.utilities.variations import min_curvature_estimate

logger = logging.getLogger(__name__)

CLASSIFIER_TOL = 1e-8
KERNEL_TOL = 1e-9 #singular values of T1 below this take the kernel branch
BISECTION_STEPS = 60
CONSTRAINT_TOL = 1e-12
IDENTITY_TOL = 1e-8
G1, G2 = slice(0, 3), slice(3, 6)

#Index pairs allowed by the block pattern (upper triangle, canonical frame order)
BLOCK_PATTERN = ((0, 0), (0, 3), (3, 3), (1, 1), (1, 4), (4, 4), (1, 2), (4, 5), (2, 2), (2, 5), (5, 5))


def _embed(u=None, v=None):
    return np.concatenate([np.zeros(3) if u is None else u, np.zeros(3) if v is None else v])


def _complement(u):
    #Orthonormal basis of u-perp in R^3, preferring canonical vectors
    return orthonormalize(build_so3(), [u] + list(np.eye(3)))[1:]


@dataclass(frozen=True)
class TorusParams:
    c: float
    d: float
    a1: float
    a2: float
    a3: float

    @property
    def block(self):
        return np.array([[self.a1, self.a3], [self.a3, self.a2]])

    def bound(self):
        return np.diag([4.0 * self.c / 3.0, 4.0 * self.d / 3.0])


def torus_matrix(p):
    '''
    diag(c, c) on A1, A2; the 2 x 2 block on tau = span{A3, B1}; diag(d, d) on B2, B3
    '''
    m = np.diag([p.c, p.c, p.a1, p.a2, p.d, p.d])
    m[2, 3] = m[3, 2] = p.a3
    return m


def torus_constraint_margin(p):
    #Smallest eigenvalue of diag(4c/3, 4d/3) - block and its eigenvector in tau coordinates
    vals, vecs = linalg.eigh(p.bound() - p.block)
    return float(vals[0]), vecs[:, 0]


def torus_metric(p, enforce=True):
    L = build_so4()
    if enforce:
        margin, vec = torus_constraint_margin(p)
        if margin < -CONSTRAINT_TOL:
            direction = _embed(np.array([0.0, 0.0, vec[0]]), np.array([vec[1], 0.0, 0.0]))
            raise ConstraintError(f'torus block exceeds the 4/3 bound by {-margin:.3e} along {direction.tolist()}',
                                  direction)
    return MetricForm(torus_matrix(p), L.h0)


def torus_direction(p):
    #As a direction the parameters are unrestricted
    return Direction(torus_matrix(p), build_so4().h0)


def torus_proof_plane(Phi, alpha, beta, basis=None):
    '''
    Curvature of the plane {alpha A1 + beta B2, A2 + B3} for a torus-form Phi (in the
    oriented frame `basis`) together with 3/4 (|w|^2_h~ - |w|^2_h), w = alpha A3 + beta B1,
    where h~ is diag(4c/3, 4d/3) on tau
    '''
    L = build_so4()
    Phi = as_metric(L, Phi)
    basis = np.eye(6) if basis is None else np.asarray(basis, dtype=float)
    A1, A2, A3, B1, B2, B3 = basis
    local = basis @ Phi.phi @ basis.T
    c, d = local[0, 0], local[4, 4]
    w = alpha * A3 + beta * B1
    bound = 4.0 / 3.0 * (c * alpha ** 2 + d * beta ** 2)
    predicted = 0.75 * (bound - float(Phi.inner(w, w)))
    value = puttmann_curvature(L, Phi, alpha * A1 + beta * B2, A2 + B3)
    return value, predicted


@dataclass(frozen=True)
class S3Params:
    a: float
    b: float
    lam: tuple

    @property
    def t(self):
        return tuple(1.0 if math.isinf(l) else l / (1.0 + l) for l in self.lam)


def so3_metric_is_nonnegative(lam, tol=1e-9, samples=200, refine_steps=30, seed=0):
    '''
    Empirical gate: diag(lam) on so(3) must show no plane with curvature below -tol.
    All-infinite triples are accepted (the degenerate limit t_i = 1).
    '''
    lam = tuple(float(l) for l in lam)
    if len(lam) != 3:
        return False
    infinite = [math.isinf(l) for l in lam]
    if all(infinite):
        return True
    if any(infinite) or min(lam) <= 0.0:
        return False
    value, _ = min_curvature_estimate(build_so3(), np.diag(lam), samples, refine_steps, seed)
    return value >= -tol


def s3_metric(p, check=True):
    '''
    Block-diagonal over V_i = span{A_i, B_i} with blocks
    1/(a+b) [[a(b + a t_i), ab(t_i - 1)], [ab(t_i - 1), b(a + b t_i)]]
    '''
    if p.a <= 0 or p.b <= 0:
        raise MetricError('s3 metric needs positive factor scales a, b')
    if check and not so3_metric_is_nonnegative(p.lam):
        raise MetricError(f'lambda triple {p.lam} is not the spectrum of a nonnegatively curved so(3) metric')
    a, b = p.a, p.b
    m = np.zeros((6, 6))
    for i, t in enumerate(p.t):
        j = 3 + i
        m[i, i] = a * (b + a * t) / (a + b)
        m[j, j] = b * (a + b * t) / (a + b)
        m[i, j] = m[j, i] = a * b * (t - 1.0) / (a + b)
    return MetricForm(m, build_so4().h0)


def s3_direction(alpha, beta, lam):
    '''
    diag(Psi_1, Psi_2, Psi_3) over V_i with Psi_i = diag(alpha, beta) - 1/(2 lambda_i) [[1,1],[1,1]]
    '''
    m = np.zeros((6, 6))
    for i, l in enumerate(lam):
        if l == 0:
            raise DegenerateError('lambda must be nonzero')
        k = 0.0 if math.isinf(l) else 1.0 / (2.0 * l)
        j = 3 + i
        m[i, i] = alpha - k
        m[j, j] = beta - k
        m[i, j] = m[j, i] = -k
    return Direction(m, build_so4().h0)


@dataclass(frozen=True)
class S3Fit:
    alpha: float
    beta: float
    k: tuple
    lam: tuple #effective lambda_i = 1/(2 k_i)
    residual: float


def fit_s3_pattern(Psi):
    '''
    Least-squares fit of diag(alpha, beta) - k_i [[1,1],[1,1]] on each V_i. The residual
    includes every entry outside the three blocks.
    '''
    Psi = as_direction(build_so4(), Psi)
    m = Psi.psi
    rows, rhs = [], []
    outside = m.copy()
    for i in range(3):
        j = 3 + i
        for (r, s), coef in (((i, i), (1, 0)), ((j, j), (0, 1)), ((i, j), (0, 0)), ((j, i), (0, 0))):
            k_coef = [0.0, 0.0, 0.0]
            k_coef[i] = -1.0
            rows.append(list(coef) + k_coef)
            rhs.append(m[r, s])
            outside[r, s] = 0.0
    A, y = np.array(rows, dtype=float), np.array(rhs)
    solution, *_ = linalg.lstsq(A, y)
    fit_residual = float(np.abs(A @ solution - y).max())
    residual = max(fit_residual, float(np.abs(outside).max()))
    alpha, beta, *k = (float(x) for x in solution)
    lam = tuple(math.inf if abs(ki) <= CLASSIFIER_TOL else 1.0 / (2.0 * ki) for ki in k)
    return S3Fit(alpha, beta, tuple(k), lam, residual)


def product_metric(Phi1, Phi2, check=True):
    '''
    Block-diagonal product of two so(3) metrics, each gated by its spectrum
    '''
    so3 = build_so3()
    Phi1, Phi2 = as_metric(so3, Phi1), as_metric(so3, Phi2)
    if check:
        for label, form in (('first', Phi1), ('second', Phi2)):
            if not so3_metric_is_nonnegative(form.eigvals):
                raise MetricError(f'{label} factor {form.eigvals.tolist()} is not nonnegatively curved')
    return MetricForm(linalg.block_diag(Phi1.phi, Phi2.phi), build_so4().h0)


def mixing_counterexample(epsilon=0.2):
    '''
    Metric whose smallest eigenvector is A1 while Phi^-1 couples A2 and B2; it fails the
    global rigidity check at X = A1, Y = B2
    '''
    inverse = np.diag([2.0, 1.0, 1.0, 1.0, 1.0, 1.0])
    inverse[1, 4] = inverse[4, 1] = epsilon
    return MetricForm(np.linalg.inv(inverse), build_so4().h0)


@dataclass(frozen=True)
class BlockParams:
    a1: float = 0.0
    a2: float = 0.0
    a3: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    b3: float = 0.0
    c1: float = 0.0
    c2: float = 0.0
    c3: float = 0.0
    lam: float = 0.0
    mu: float = 0.0

    def values(self):
        p = self
        return (p.a1, p.a3, p.a2, p.b1, p.b3, p.b2, p.lam, p.mu, p.c1, p.c3, p.c2)

    def swapped(self):
        #Relabeling A1 -> -A1, A2 <-> A3 (same for B) exchanges the b and c parameters
        return replace(self, b1=self.c1, b2=self.c2, b3=self.c3, c1=self.b1, c2=self.b2, c3=self.b3)


def block_matrix(p):
    m = np.zeros((6, 6))
    for (i, j), value in zip(BLOCK_PATTERN, p.values()):
        m[i, j] = m[j, i] = value
    return m


def block_direction(p, basis=None):
    m = block_matrix(p)
    if basis is not None:
        basis = np.asarray(basis, dtype=float)
        m = basis.T @ m @ basis
    return Direction(m, build_so4().h0)


def block_params_from(local):
    keys = ('a1', 'a3', 'a2', 'b1', 'b3', 'b2', 'lam', 'mu', 'c1', 'c3', 'c2')
    return BlockParams(**{k: float(local[i, j]) for k, (i, j) in zip(keys, BLOCK_PATTERN)})


def off_pattern(local):
    mask = np.ones((6, 6), dtype=bool)
    for i, j in BLOCK_PATTERN:
        mask[i, j] = mask[j, i] = False
    return np.where(mask, local, 0.0)


class ClassifierKind(str, Enum):
    PRODUCT = 'PRODUCT'
    TORUS_FORM = 'TORUS_FORM'
    NO_SINGULAR_EIGENVECTOR = 'NO_SINGULAR_EIGENVECTOR'


@dataclass
class ClassifierVerdict:
    kind: ClassifierKind
    singular_eigenvector: bool
    basis: np.ndarray = None
    residuals: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    constraint_margin: float = None
    constraint_satisfied: bool = None
    witness: Witness = None

    def to_dict(self):
        return {'kind': self.kind.value,
                'singular_eigenvector': self.singular_eigenvector,
                'basis': None if self.basis is None else self.basis.tolist(),
                'residuals': {k: float(v) for k, v in self.residuals.items()},
                'params': {k: float(v) for k, v in self.params.items()},
                'constraint_margin': self.constraint_margin,
                'constraint_satisfied': self.constraint_satisfied,
                'witness': None if self.witness is None else self.witness.to_dict()}


def _eigenspaces(Psi, tol):
    a, V = Psi.eigvals, Psi.eigvecs
    gap = tol * max(1.0, float(np.abs(a).max()))
    groups, start = [], 0
    for k in range(1, len(a) + 1):
        if k == len(a) or a[k] - a[k - 1] > gap:
            groups.append((float(a[start:k].mean()), V[:, start:k]))
            start = k
    return groups


def _has_singular_vector(E, tol):
    for part in (E[G1], E[G2]):
        if E.shape[1] > 3 or linalg.svdvals(part).min() <= tol:
            return True
    return False


def has_singular_eigenvector(Psi, tol=CLASSIFIER_TOL):
    Psi = as_direction(build_so4(), Psi)
    return any(_has_singular_vector(E, tol) for _, E in _eigenspaces(Psi, tol))


def _torus_frame(Psi, tol):
    '''
    Tries to put Psi in torus form: the cross block must have rank one, with the factor
    blocks scalar on the complements of its singular vectors. Returns (basis, residuals)
    or None.
    '''
    m = Psi.psi
    K = m[G2, G1]
    U, s, Vt = linalg.svd(K)
    if s[1] > tol:
        return None
    v, u = Vt[0], U[:, 0]
    W1, W2 = _complement(v), _complement(u)
    P, Q = m[G1, G1], m[G2, G2]
    residuals = {}
    for label, block, axis, W in (('g1', P, v, W1), ('g2', Q, u, W2)):
        local = W @ block @ W.T
        scalar = np.trace(local) / 2.0
        residuals[f'{label}_scalar'] = float(np.abs(local - scalar * np.eye(2)).max())
        residuals[f'{label}_mixing'] = float(np.abs(W @ block @ axis).max())
    A3, A1 = v, W1[0]
    A2 = np.cross(A3, A1)
    B1, B2 = u, W2[0]
    B3 = np.cross(B1, B2)
    basis = np.array([_embed(A1), _embed(A2), _embed(A3), _embed(v=B1), _embed(v=B2), _embed(v=B3)])
    return basis, residuals


def _torus_params(local):
    return {'c': float(local[0, 0]), 'd': float(local[4, 4]), 'a1': float(local[2, 2]),
            'a2': float(local[3, 3]), 'a3': float(local[2, 3])}


def classify_direction(Psi, tol=CLASSIFIER_TOL):
    Psi = as_direction(build_so4(), Psi)
    singular = has_singular_eigenvector(Psi, tol)
    cross = float(linalg.norm(Psi.psi[G2, G1], 2))
    if cross <= tol:
        return ClassifierVerdict(ClassifierKind.PRODUCT, singular, np.eye(6), {'cross_block': cross})
    if singular:
        frame = _torus_frame(Psi, tol)
        if frame is not None:
            basis, residuals = frame
            local = basis @ Psi.psi @ basis.T
            params = _torus_params(local)
            residuals['pattern'] = float(np.abs(local - torus_matrix(TorusParams(**params))).max())
            if max(residuals.values()) <= tol:
                return ClassifierVerdict(ClassifierKind.TORUS_FORM, singular, basis, residuals, params)
            logger.debug('singular eigenvector without torus form (residuals %s)', residuals)
    return ClassifierVerdict(ClassifierKind.NO_SINGULAR_EIGENVECTOR, singular, None, {'cross_block': cross})


def classify_metric(Phi, tol=CLASSIFIER_TOL):
    '''
    Classifies I - Phi^-1; for torus form also reads c, d and the tau block off Phi and
    measures the 4/3 constraint. A violated constraint comes with the most negative plane
    of the proof family {alpha A1 + beta B2, A2 + B3} as witness.
    '''
    L = build_so4()
    Phi = as_metric(L, Phi)
    verdict = classify_direction(direction_from_metric(Phi), tol)
    if verdict.kind != ClassifierKind.TORUS_FORM:
        return verdict
    local = verdict.basis @ Phi.phi @ verdict.basis.T
    params = TorusParams(**_torus_params(local))
    margin, vec = torus_constraint_margin(params)
    verdict.params = asdict(params)
    verdict.constraint_margin = margin
    verdict.constraint_satisfied = margin >= -tol
    if not verdict.constraint_satisfied:
        alpha, beta = vec
        value, _ = torus_proof_plane(Phi, alpha, beta, verdict.basis)
        A1, A2, _, _, B2, B3 = verdict.basis
        X, Y = alpha * A1 + beta * B2, (A2 + B3) / math.sqrt(2.0)
        X = X / L.norm(X)
        unit = puttmann_curvature(L, Phi, X, Y)
        verdict.witness = Witness('torus_proof_plane', unit, unit, X, Y)
        logger.debug('4/3 constraint violated by %.3e; proof plane curvature %.6e', -margin, value)
    return verdict


def _plane(u, v):
    return np.array([_embed(u), _embed(v=v)])


def _plane_residual(Psi, u, v):
    #|Psi U - proj(Psi U)| + |Psi V - proj(Psi V)| for the plane span{(u,0), (0,v)}
    plane = _plane(u / linalg.norm(u), v / linalg.norm(v))
    images = plane @ Psi.psi.T
    rest = images - (images @ plane.T) @ plane
    return float(linalg.norm(rest[0]) + linalg.norm(rest[1]))


def _plane_candidates(Psi):
    m = Psi.psi
    _, P = linalg.eigh(m[G1, G1])
    _, Q = linalg.eigh(m[G2, G2])
    candidates = [(P[:, i], Q[:, j]) for i in range(3) for j in range(3)]
    U, _, Vt = linalg.svd(m[G2, G1])
    candidates += [(Vt[i], U[:, i]) for i in range(3)]
    return candidates


def _sphere(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def _fibonacci_sphere(n):
    k = np.arange(n) + 0.5
    theta = np.arccos(1 - 2 * k / n)
    phi = np.pi * (1 + 5 ** 0.5) * k
    return theta, phi


def find_invariant_abelian_plane(Psi, grid=24, tol=CLASSIFIER_TOL):
    '''
    Psi-invariant plane span{(u,0), (0,v)}: eigenvector pairs of the factor blocks and
    singular pairs of the cross block first, then a grid over both spheres refined with
    Nelder-Mead. Returns a Subspace or None.
    '''
    L = build_so4()
    Psi = as_direction(L, Psi)
    scored = [(_plane_residual(Psi, u, v), u, v) for u, v in _plane_candidates(Psi)]
    best = min(scored, key=lambda s: s[0])
    if best[0] <= tol:
        return Subspace(L, _plane(best[1], best[2]))

    theta, phi = _fibonacci_sphere(grid)
    starts = sorted(((_plane_residual(Psi, _sphere(t1, p1), _sphere(t2, p2)), (t1, p1, t2, p2))
                     for t1, p1 in zip(theta, phi) for t2, p2 in zip(theta, phi)), key=lambda s: s[0])

    def objective(x):
        return _plane_residual(Psi, _sphere(x[0], x[1]), _sphere(x[2], x[3]))

    for _, start in starts[:4]:
        result = optimize.minimize(objective, np.array(start), method='Nelder-Mead',
                                   options={'xatol': 1e-12, 'fatol': 1e-14, 'maxiter': 4000})
        if result.fun <= tol:
            return Subspace(L, _plane(_sphere(result.x[0], result.x[1]), _sphere(result.x[2], result.x[3])))
    logger.debug('no invariant abelian plane (best residual %.3e)', best[0])
    return None


def invariant_abelian_planes(Psi, tol=CLASSIFIER_TOL):
    '''
    Every distinct invariant plane among the eigenvector and singular-vector candidates
    '''
    L = build_so4()
    Psi = as_direction(L, Psi)
    planes = []
    for u, v in _plane_candidates(Psi):
        if _plane_residual(Psi, u, v) > tol:
            continue
        basis = _plane(u / linalg.norm(u), v / linalg.norm(v))
        projector = basis.T @ basis
        if all(np.abs(projector - p.basis.T @ p.basis).max() > 1e-6 for p in planes):
            planes.append(Subspace(L, basis))
    return planes


@dataclass(frozen=True)
class BlockBasis:
    basis: np.ndarray
    params: BlockParams
    residual: np.ndarray
    kernel_branch: bool

    @property
    def max_residual(self):
        return float(np.abs(self.residual).max())


def _bisect_zero(F, lo=0.0, hi=math.pi / 2, steps=BISECTION_STEPS):
    #F(hi) = -F(lo), so a sign change is bracketed
    f_lo = F(lo)
    if f_lo == 0.0:
        return lo
    for _ in range(steps):
        mid = (lo + hi) / 2
        f_mid = F(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return (lo + hi) / 2


def canonical_block_basis(Psi, tol=CLASSIFIER_TOL, plane=None):
    '''
    Frame {A1,A2,A3,B1,B2,B3} in which Psi has the block pattern: span{A1,B1} is an
    invariant abelian plane, A2 is a zero of F(A) = <T1 A, T1 R(A)> on the unit circle of
    A1-perp (T1 = pi2 Psi restricted there, R the quarter turn), A3 = R(A2) and
    B2, B3 are the normalized images T1(A2), T1(A3). When T1 is singular A2 spans its
    kernel and B2 the kernel of T2 = pi1 Psi.
    '''
    L = build_so4()
    Psi = as_direction(L, Psi)
    plane = find_invariant_abelian_plane(Psi, tol=tol) if plane is None else plane
    if plane is None:
        raise StructureError('no Psi-invariant abelian plane found')
    A1 = plane.basis[0][G1]
    B1 = plane.basis[1][G2]
    if linalg.norm(A1) < 0.5:
        A1, B1 = plane.basis[1][G1], plane.basis[0][G2]
    A1, B1 = A1 / linalg.norm(A1), B1 / linalg.norm(B1)
    W1, W2 = _complement(A1), _complement(B1)
    m = Psi.psi
    T1 = m[G2, G1] @ W1.T #V1 coordinates -> g2 vectors
    T2 = m[G1, G2] @ W2.T

    def circle(theta):
        return np.array([np.cos(theta), np.sin(theta)])

    singular_values = linalg.svdvals(T1)
    kernel_branch = singular_values.min() < KERNEL_TOL
    if kernel_branch:
        _, _, vt1 = linalg.svd(T1)
        _, _, vt2 = linalg.svd(T2)
        A2, B2 = vt1[-1] @ W1, vt2[-1] @ W2
        A3 = np.cross(A1, A2)
        B3 = np.cross(B1, B2)
    else:
        theta = _bisect_zero(lambda th: float((T1 @ circle(th)) @ (T1 @ circle(th + math.pi / 2))))
        A2, A3 = circle(theta) @ W1, circle(theta + math.pi / 2) @ W1
        if np.dot(np.cross(A1, A2), A3) < 0:
            A3 = -A3
        B2 = m[G2, G1] @ A2
        B3 = m[G2, G1] @ A3
        B2, B3 = B2 / linalg.norm(B2), B3 / linalg.norm(B3)
        if np.dot(np.cross(B1, B2), B3) < 0:
            B3 = -B3
    basis = np.array([_embed(A1), _embed(A2), _embed(A3), _embed(v=B1), _embed(v=B2), _embed(v=B3)])
    local = basis @ m @ basis.T
    return BlockBasis(basis, block_params_from(local), off_pattern(local), bool(kernel_branch))


def six_tuple(params, alphas, betas):
    '''
    One sixth of the third derivative of kappa at 0 for X = sum alpha_i A_i, Y = sum beta_i B_i under block_direction(params)
    '''
    L = build_so4()
    X = _embed(np.asarray(alphas, dtype=float))
    Y = _embed(v=np.asarray(betas, dtype=float))
    return third_derivative_commuting(L, block_direction(params), X, Y)


def _relabel(tup):
    #Tuple in the relabeled frame (A1 -> -A1, A2 <-> A3) expressed in the original frame
    a1, a2, a3, b1, b2, b3 = tup
    return (-a1, a3, a2, -b1, b3, b2)


@dataclass(frozen=True)
class TupleIdentity:
    '''
    sum of coef * [tuple] equals rhs(params). branch 'b3' draws b3 = 0, 'c3' draws c3 = 0
    and evaluates through the relabeling, 'constrained' draws the c3 != 0 family
    a1=b1=c1, a2=b2=c2, lambda=mu=b3=0.
    '''
    name: str
    terms: tuple
    rhs: object
    branch: str = 'b3'


def _base_identities():
    sq = lambda x: x * x
    return [
        ('[0,1,1,1,0,0]', ((1, (0, 1, 1, 1, 0, 0)),), lambda p: sq(p.c3) * (p.a2 - p.b2) + 4 * sq(p.a3) * p.lam),
        ('[0,-1,1,1,0,0]', ((1, (0, -1, 1, 1, 0, 0)),), lambda p: sq(p.c3) * (p.a2 - p.b2) - 4 * sq(p.a3) * p.lam),
        ('[0,0,1,0,1,0]+[0,0,1,0,0,1]', ((1, (0, 0, 1, 0, 1, 0)), (1, (0, 0, 1, 0, 0, 1))),
         lambda p: sq(p.c3) * (p.b2 - p.a2)),
        ('[1,0,0,0,1,1]', ((1, (1, 0, 0, 0, 1, 1)),), lambda p: sq(p.c3) * (p.a1 - p.b1) + 4 * sq(p.a3) * p.mu),
        ('[1,0,0,0,-1,1]', ((1, (1, 0, 0, 0, -1, 1)),), lambda p: sq(p.c3) * (p.a1 - p.b1) - 4 * sq(p.a3) * p.mu),
        ('[1,0,0,0,1,0]+[1,0,0,0,0,1]', ((1, (1, 0, 0, 0, 1, 0)), (1, (1, 0, 0, 0, 0, 1))),
         lambda p: sq(p.c3) * (p.a1 - p.b1)),
        ('[0,1,0,1,0,0]', ((1, (0, 1, 0, 1, 0, 0)),), lambda p: sq(p.a3) * (p.b1 - p.c1)),
        ('[0,0,1,1,0,0]', ((1, (0, 0, 1, 1, 0, 0)),), lambda p: sq(p.a3) * (p.c1 - p.b1) + sq(p.c3) * (p.a2 - p.b2)),
        ('[1,0,0,0,1,0]', ((1, (1, 0, 0, 0, 1, 0)),), lambda p: sq(p.a3) * (p.b2 - p.c2)),
        ('[1,0,0,0,0,1]', ((1, (1, 0, 0, 0, 0, 1)),), lambda p: sq(p.a3) * (p.c2 - p.b2) + sq(p.c3) * (p.a1 - p.b1)),
    ]


def _constrained_identities():
    #[1,1,1,s1,s2,s3] = s2 a3 c3 (s3 c3 + s1 a3)
    out = []
    for s1, s2, s3 in ((1, 1, 1), (-1, 1, 1), (1, -1, 1), (1, 1, -1)):
        out.append(TupleIdentity(f'[1,1,1,{s1},{s2},{s3}]', ((1, (1, 1, 1, s1, s2, s3)),),
                                 lambda p, s1=s1, s2=s2, s3=s3: s2 * p.a3 * p.c3 * (s3 * p.c3 + s1 * p.a3),
                                 'constrained'))
    return out


SIX_TUPLE_IDENTITIES = tuple([TupleIdentity(name, terms, rhs, 'b3') for name, terms, rhs in _base_identities()]
                       + [TupleIdentity(name + ' (c3=0)', terms, rhs, 'c3') for name, terms, rhs in _base_identities()]
                       + _constrained_identities())


def _draw_params(rng, branch):
    values = dict(zip(('a1', 'a2', 'a3', 'b1', 'b2', 'b3', 'c1', 'c2', 'c3', 'lam', 'mu'), rng.uniform(-1.0, 1.0, 11)))
    if branch == 'b3':
        values['b3'] = 0.0
    elif branch == 'c3':
        values['c3'] = 0.0
    else:
        values.update(b1=values['a1'], c1=values['a1'], b2=values['a2'], c2=values['a2'], lam=0.0, mu=0.0, b3=0.0)
    return BlockParams(**values)


def evaluate_identity(identity, params):
    '''
    Returns (numeric, symbolic) for one identity at one parameter draw
    '''
    if identity.branch == 'c3':
        numeric = sum(coef * six_tuple(params, _relabel(t)[:3], _relabel(t)[3:]) for coef, t in identity.terms)
        return numeric, identity.rhs(params.swapped())
    numeric = sum(coef * six_tuple(params, t[:3], t[3:]) for coef, t in identity.terms)
    return numeric, identity.rhs(params)


def verify_th1_identities(draws, seed, tol=IDENTITY_TOL, perturbation=0.0, identities=SIX_TUPLE_IDENTITIES):
    '''
    Every identity at `draws` random parameter sets; perturbation is added to the symbolic
    side (a nonzero value must make the suite fail)
    '''
    root = SeededRNG(seed)

    def measure(job):
        k, draw = job
        identity = identities[k]
        params = _draw_params(root.fork(draw), identity.branch)
        numeric, symbolic = evaluate_identity(identity, params)
        symbolic += perturbation
        deviation = abs(numeric - symbolic)
        row = {'identity': identity.name, 'draw': draw, 'numeric': numeric, 'symbolic': symbolic}
        return row, Witness(identity.name, deviation, tol * max(1.0, abs(symbolic)) - deviation, index=draw)

    measured = parallel_map(measure, [(k, d) for k in range(len(identities)) for d in range(draws)])
    return build_report('six_tuple_identities', [w for _, w in measured], draws, tol, seed,
                        rows=[r for r, _ in measured], details={'identities': len(identities)})
