'''
Randomized search for infinitesimally nonnegative directions: draw, canonicalize, filter
on shared commuting pairs, classify the survivors.
'''
import logging

import numpy as np
from scipy import linalg

from curvlab.scenarios.base import BaseSuite, SuiteResult
from curvlab.utilities.errors import ConfigError
from curvlab.utilities.lie_core import is_so4, load_algebra
from curvlab.utilities.metrics import Direction, canonical_direction
from curvlab.utilities.misc import SeededRNG
from curvlab.utilities.reports import finite_or_none
from curvlab.utilities.so4 import classify_direction, fit_s3_pattern
from curvlab.utilities.variations import infinitesimal_nonnegativity_report, sample_commuting_pairs

logger = logging.getLogger(__name__)


def draw_direction(L, rng, singular_only=False):
    psi = rng.symmetric(L.dim)
    if singular_only:
        u = np.concatenate([rng.unit_vector(3), np.zeros(3)])
        P = np.eye(L.dim) - np.outer(u, u)
        psi = P @ psi @ P + rng.normal() * np.outer(u, u)
    return canonical_direction(Direction(linalg.solve(L.h0, psi), L.h0))


class SearchSuite(BaseSuite):
    command = 'search'

    def run(self):
        c = self.config
        L = load_algebra(c.algebra or 'so4')
        singular_only = bool(c.option('singular_only', default=False))
        if singular_only and not is_so4(L):
            raise ConfigError('singular_only needs the so4 algebra')
        pairs = sample_commuting_pairs(L, int(c.option('pairs', default=100)), c.seed)
        root = SeededRNG(c.seed)
        survivors = []
        for i in range(c.samples):
            Psi = draw_direction(L, root.fork(i), singular_only)
            report = infinitesimal_nonnegativity_report(L, Psi, len(pairs), c.tol, c.seed, pairs=pairs)
            if not report.passed:
                continue
            found = {'index': i, 'margin': finite_or_none(report.margin), 'psi': Psi.psi.tolist()}
            if is_so4(L):
                verdict = classify_direction(Psi, float(c.option('classifier_tol', default=1e-8)))
                fit = fit_s3_pattern(Psi)
                found.update(kind=verdict.kind.value, singular_eigenvector=verdict.singular_eigenvector,
                             s3_residual=fit.residual, s3_pattern=fit.residual <= float(c.option('s3_tol', default=1e-6)))
            survivors.append(found)
            logger.debug('draw %d survives (margin %s)', i, found['margin'])
        logger.info('%d of %d draws survive on %d commuting pairs', len(survivors), c.samples, len(pairs))
        rows = [{k: v for k, v in s.items() if k != 'psi'} for s in survivors]
        return SuiteResult(self.document(survivors=survivors), rows)
