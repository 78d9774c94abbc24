'''
Pipeline for one metric or direction file: classify (so4 only), rigidity checks,
infinitesimal nonnegativity and a sampled curvature minimum.
'''
import logging

from curvlab.scenarios.base import BaseSuite, SuiteResult
from curvlab.utilities.errors import ConfigError, InputError
from curvlab.utilities.lie_core import is_so4, load_algebra
from curvlab.utilities.metrics import MetricForm, direction_from_metric, load_form
from curvlab.utilities.reports import Witness, build_report
from curvlab.utilities.so4 import classify_direction, classify_metric, fit_s3_pattern, invariant_abelian_planes
from curvlab.utilities.variations import (global_rigidity_check, infinitesimal_nonnegativity_report,
                                          lemma_k_check, min_curvature_estimate)

logger = logging.getLogger(__name__)


def classification(Phi, Psi, tol):
    verdict = classify_metric(Phi, tol) if Phi is not None else classify_direction(Psi, tol)
    out = verdict.to_dict()
    out['invariant_planes'] = [p.basis.tolist() for p in invariant_abelian_planes(Psi, tol)]
    fit = fit_s3_pattern(Psi)
    out['s3_fit'] = {'alpha': fit.alpha, 'beta': fit.beta, 'k': list(fit.k), 'residual': fit.residual}
    return out


def min_curvature_report(L, Phi, samples, refine_steps, tol, seed):
    value, (X, Y) = min_curvature_estimate(L, Phi, samples, refine_steps, seed)
    witness = Witness('min_curvature', value, value + tol, X, Y)
    return build_report('min_curvature', [witness], samples, tol, seed, details={'value': value})


class AnalyzeSuite(BaseSuite):
    command = 'analyze'

    def run(self):
        c = self.config
        if c.input_path is None:
            raise InputError('analyze needs --input')
        L, form, _ = load_form(c.input_path, load_algebra)
        if c.algebra is not None and c.algebra != L.name:
            raise ConfigError(f'--algebra {c.algebra} does not match the input algebra {L.name}')
        Phi = form if isinstance(form, MetricForm) else None
        Psi = direction_from_metric(Phi) if Phi is not None else form
        tol = c.tol

        classified = None
        if is_so4(L):
            classified = classification(Phi, Psi, float(c.option('classifier_tol', default=1e-8)))
            logger.info('classification: %s', classified['kind'])

        reports = [lemma_k_check(L, Psi, c.samples, tol, c.seed)]
        if Phi is not None:
            reports.append(global_rigidity_check(L, Phi, c.samples, tol, c.seed))
        nonneg = infinitesimal_nonnegativity_report(L, Psi, c.samples, tol, c.seed)
        reports.append(nonneg)
        if Phi is not None and c.option('min_curvature', default=True):
            reports.append(min_curvature_report(L, Phi, c.samples, int(c.option('refine_steps', default=40)),
                                                tol, c.seed))
        for report in reports:
            logger.info(report.summary())
        document = self.document(reports=[r.to_dict() for r in reports], classification=classified)
        return SuiteResult(document, nonneg.rows)
