'''
Sweep comparing the closed curvature formula with the Koszul-formula oracle on random
(Phi, Z1, Z2).
'''
import logging

import numpy as np
from scipy import linalg

from curvlab.scenarios.base import BaseSuite, SuiteResult
from curvlab.utilities.curvature import koszul_oracle, puttmann_curvature
from curvlab.utilities.lie_core import build_so3, build_so4, load_algebra
from curvlab.utilities.metrics import MetricForm
from curvlab.utilities.misc import SeededRNG, parallel_map
from curvlab.utilities.reports import Witness, build_report

logger = logging.getLogger(__name__)


def random_metric(L, rng):
    #h0 Phi is a random SPD Gram matrix
    return MetricForm(linalg.solve(L.h0, rng.spd(L.dim)), L.h0)


def oracle_sweep(L, draws, seed, tol, vector_scale=1.0):
    root = SeededRNG(seed)

    def measure(i):
        rng = root.fork(i)
        Phi = random_metric(L, rng)
        Z1, Z2 = vector_scale * rng.normal(L.dim), vector_scale * rng.normal(L.dim)
        closed = puttmann_curvature(L, Phi, Z1, Z2)
        oracle = koszul_oracle(L, Phi, Z1, Z2)
        deviation = abs(closed - oracle) / max(1.0, abs(oracle))
        row = {'algebra': L.name, 'index': i, 'puttmann': closed, 'koszul': oracle, 'deviation': deviation}
        return row, Witness('oracle', deviation, tol - deviation, Z1, Z2, index=i)

    measured = parallel_map(measure, range(draws))
    rows = [r for r, _ in measured]
    deviation = max((r['deviation'] for r in rows), default=0.0)
    return build_report(f'oracle_{L.name}', [w for _, w in measured], draws, tol, seed, rows=rows,
                        details={'max_relative_deviation': deviation})


class OracleSuite(BaseSuite):
    command = 'oracle'

    def algebras(self):
        if self.config.algebra is None:
            return [build_so3(), build_so4()]
        return [load_algebra(self.config.algebra)]

    def run(self):
        c = self.config
        reports = [oracle_sweep(L, c.samples, c.seed, c.tol, float(c.option('vector_scale', default=1.0)))
                   for L in self.algebras()]
        deviation = max(r.details['max_relative_deviation'] for r in reports)
        for report in reports:
            logger.info(report.summary())
        logger.info('max relative deviation %.3e', deviation)
        document = self.document(reports=[r.to_dict() for r in reports], max_relative_deviation=deviation)
        rows = [row for r in reports for row in r.rows]
        return SuiteResult(document, rows, failed=not all(r.passed for r in reports))
