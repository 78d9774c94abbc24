'''
Unnormalized sectional curvature of left-invariant metrics and its variation along
inverse-linear paths.

puttmann_curvature is the closed four-term formula in terms of Phi; koszul_oracle builds
the Levi-Civita connection from structure constants and is kept as an independent check.
kappa(t) always refers to the twisted plane {Phi_t^-1 X, Phi_t^-1 Y}.
'''
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from curvlab.utilities.errors import CommutingError
from curvlab.utilities.lie_core import commutes
from curvlab.utilities.metrics import as_direction, as_metric, path_at

logger = logging.getLogger(__name__)


def puttmann_curvature(L, Phi, Z1, Z2):
    Phi = as_metric(L, Phi)
    return float(puttmann_curvature_batch(L, Phi, L.vector(Z1), L.vector(Z2)))


def puttmann_curvature_batch(L, Phi, Z1s, Z2s):
    '''
    Vectorized formula over stacks of vectors (shape (..., dim))
    '''
    Phi = as_metric(L, Phi)
    Z1s, Z2s = L.vector(Z1s), L.vector(Z2s)
    PZ1, PZ2 = Phi.apply(Z1s), Phi.apply(Z2s)
    Z12 = L.bracket(Z1s, Z2s)
    first = 0.5 * L.inner(L.bracket(PZ1, Z2s) + L.bracket(Z1s, PZ2), Z12)
    second = -0.75 * L.inner(Phi.apply(Z12), Z12)
    W = L.bracket(Z1s, PZ2) + L.bracket(Z2s, PZ1)
    third = 0.25 * L.inner(W, Phi.solve(W))
    fourth = -L.inner(L.bracket(Z1s, PZ1), Phi.solve(L.bracket(Z2s, PZ2)))
    return first + second + third + fourth


def levi_civita(L, Phi):
    '''
    Christoffel array G with nabla_{e_i} e_j = sum_m G[i, j, m] e_m for the left-invariant
    metric h(X, Y) = h0(Phi X, Y), from the Koszul formula on left-invariant fields
    '''
    Phi = as_metric(L, Phi)
    gram = Phi.gram
    A = np.einsum('ijk,kl->ijl', L.structure, gram) #h([e_i,e_j], e_l)
    T = 0.5 * (A - np.einsum('jli->ijl', A) + np.einsum('lij->ijl', A))
    return np.einsum('ijl,lm->ijm', T, np.linalg.inv(gram))


def koszul_oracle(L, Phi, Z1, Z2):
    '''
    h(R(Z1,Z2)Z2, Z1) with R(X,Y) = nabla_X nabla_Y - nabla_Y nabla_X - nabla_[X,Y]
    '''
    Phi = as_metric(L, Phi)
    Z1, Z2 = L.vector(Z1), L.vector(Z2)
    G = levi_civita(L, Phi)

    def nabla(X, Y):
        return np.einsum('i,j,ijm->m', X, Y, G)

    R = nabla(Z1, nabla(Z2, Z2)) - nabla(Z2, nabla(Z1, Z2)) - nabla(L.bracket(Z1, Z2), Z2)
    return float(Phi.inner(R, Z1))


def kappa(L, Psi, X, Y, t):
    '''
    Curvature of the twisted plane {(I - t Psi) X, (I - t Psi) Y} with respect to Phi_t
    '''
    Psi = as_direction(L, Psi)
    Phi_t = path_at(Psi, t)
    X, Y = L.vector(X), L.vector(Y)
    return puttmann_curvature(L, Phi_t, X - t * Psi.apply(X), Y - t * Psi.apply(Y))


def untwisted_kappa(L, Psi, X, Y, t):
    #Curvature of the fixed plane {X, Y} along the path
    Psi = as_direction(L, Psi)
    return puttmann_curvature(L, path_at(Psi, t), X, Y)


@dataclass(frozen=True)
class CurvatureCoefficients:
    alpha: float
    beta: float
    gamma: float
    delta: float
    D: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray

    def polynomial(self, t):
        return self.alpha + self.beta * t + self.gamma * t ** 2 + self.delta * t ** 3

    def evaluate(self, Psi, t):
        '''
        Closed form alpha + beta t + gamma t^2 + delta t^3 - 3/4 t^4 <Phi_t D, D>
        '''
        Phi_t = path_at(Psi, t)
        return self.polynomial(t) - 0.75 * t ** 4 * float(Phi_t.inner(self.D, self.D))

    def series(self, Psi, t, terms):
        #Polynomial part plus the first `terms` summands of -3/4 sum_n t^n <Psi^(n-4) D, D>
        h0 = Psi.h0
        total = self.polynomial(t)
        v = np.array(self.D, dtype=float)
        for n in range(4, 4 + terms):
            total -= 0.75 * t ** n * float(v @ h0 @ self.D)
            v = Psi.apply(v)
        return total

    def tail(self, Psi, t):
        return self.evaluate(Psi, t) - self.polynomial(t)


def kappa_coefficients(L, Psi, X, Y):
    Psi = as_direction(L, Psi)
    X, Y = L.vector(X), L.vector(Y)
    P = Psi.apply
    ip = L.inner
    PX, PY = P(X), P(Y)
    XY = L.bracket(X, Y)
    A = L.bracket(PX, Y) + L.bracket(X, PY)
    B = L.bracket(PX, PY)
    C = L.bracket(PX, Y) + L.bracket(PY, X)
    P1, P2, P3 = P(XY), P(P(XY)), P(P(P(XY)))
    D = P2 - P(A) + B
    PXX, PYY = L.bracket(PX, X), L.bracket(PY, Y)

    alpha = 0.25 * ip(XY, XY)
    beta = -0.75 * ip(P1, XY)
    gamma = (-0.75 * ip(P1, P1) + 1.5 * ip(P1, A) - 0.5 * ip(XY, B)
             - 0.25 * ip(A, A) + 0.25 * ip(C, C) - ip(PXX, PYY))
    delta = (-0.75 * ip(P3, XY) + 1.5 * ip(P2, A) - 1.5 * ip(P1, B)
             - 0.75 * ip(P(A), A) - 0.25 * ip(P(C), C) + ip(P(PXX), PYY) + ip(A, B))
    return CurvatureCoefficients(float(alpha), float(beta), float(gamma), float(delta), D, A, B, C)


def _require_commuting(L, X, Y):
    if not commutes(L, X, Y):
        raise CommutingError(f'X and Y do not commute (|[X,Y]| = {float(L.norm(L.bracket(X, Y))):.3e})')


def third_derivative_commuting(L, Psi, X, Y):
    '''
    One sixth of the third derivative of kappa at 0 for a commuting pair, by the five-term formula
    '''
    Psi = as_direction(L, Psi)
    X, Y = L.vector(X), L.vector(Y)
    _require_commuting(L, X, Y)
    P = Psi.apply
    ip = L.inner
    PX, PY = P(X), P(Y)
    X_PY = L.bracket(X, PY)
    PX_Y = L.bracket(PX, Y)
    value = (ip(X_PY + PX_Y, L.bracket(PX, PY))
             + ip(L.bracket(PX, X), P(L.bracket(PY, Y)))
             - ip(X_PY, P(X_PY))
             - ip(X_PY, P(PX_Y))
             - ip(PX_Y, P(PX_Y)))
    return float(value)


def untwisted_second_derivative(L, Psi, X, Y):
    Psi = as_direction(L, Psi)
    X, Y = L.vector(X), L.vector(Y)
    _require_commuting(L, X, Y)
    W = L.bracket(X, Psi.apply(Y)) + L.bracket(Psi.apply(X), Y)
    return float(L.inner(W, W))


def richardson_derivatives(f, h=1e-3):
    '''
    First, second and third derivatives of f at 0 from central differences with steps
    h and h/2, combined by one Richardson step (error O(h^4))
    '''
    def central(step):
        f0 = f(0.0)
        fp, fm = f(step), f(-step)
        fp2, fm2 = f(2 * step), f(-2 * step)
        return np.array([(fp - fm) / (2 * step),
                         (fp - 2 * f0 + fm) / step ** 2,
                         (fp2 - 2 * fp + 2 * fm - fm2) / (2 * step ** 3)])

    coarse, fine = central(h), central(h / 2)
    return tuple(float(v) for v in (4 * fine - coarse) / 3)
