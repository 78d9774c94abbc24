'''
The identity and property suites behind `curvlab verify`. Every check takes
(draws, tol, seed) and returns one AnalysisReport; draws and tol come from the run's
samples and tol scaled per suite in config.yaml.
'''
import logging
import math

import numpy as np

from curvlab.scenarios.base import BaseSuite, SuiteResult
from curvlab.scenarios.Catalog.catalog import catalog_instances
from curvlab.scenarios.Oracle.oracle import oracle_sweep
from curvlab.utilities.curvature import (kappa, kappa_coefficients, richardson_derivatives,
                                         third_derivative_commuting)
from curvlab.utilities.errors import ConfigError, ConstraintError
from curvlab.utilities.lie_core import (antisymmetry_residual, ad_invariance_residual, build_so3, build_so4,
                                        diagonal_subalgebra, factor_subspace, jacobi_residual, span)
from curvlab.utilities.metrics import (Direction, MetricForm, cheeger_direction, direction_from_metric, domain_of,
                                       path_at, shift_direction)
from curvlab.utilities.misc import SeededRNG, parallel_map
from curvlab.utilities.reports import Witness, build_report, merge_reports
from curvlab.utilities.so4 import (ClassifierKind, S3Params, TorusParams, classify_metric, fit_s3_pattern,
                                   mixing_counterexample, s3_metric, torus_metric, torus_proof_plane,
                                   verify_th1_identities)
from curvlab.utilities.variations import (abelian_enlarge_kappa, biinvariant_shift_check, cheeger_evolve,
                                          cheeger_monotonicity_check, eschenburg_zero_check,
                                          expand_direction, global_rigidity_check,
                                          infinitesimal_nonnegativity_report, lemma_k_check,
                                          max_abelian_expansion_check, min_curvature_estimate,
                                          nonabelian_enlarge_kappa, random_orthonormal_pair,
                                          sample_commuting_pairs, scalar_shift_kappa_deviation)

logger = logging.getLogger(__name__)

COEF_SCALE = 0.1 #alpha, beta, gamma of commuting pairs against tol
IDENTITY_SCALE = 10.0
FD_SCALE = 1e4 #Richardson third derivative against tol
FD_STEP = 5e-3
PATH_GRID = 20
SERIES_TERMS = 80
NEGATIVE_WITNESS = -0.07 #so3 enlarged by 1/(1 - 0.3) has a plane at 1 - 3/4 * 1/0.7
INFLATION = 1.05
INFLATED_WITNESS = -1e-3
BOUNDARY_CEILING = 1e-6


def _relative(dev, reference, tol):
    return tol * max(1.0, abs(reference)) - dev


def _flag(kind, ok, index=None):
    #Pass/fail witness for a qualitative expectation
    return Witness(kind, 1.0 if ok else 0.0, 0.0 if ok else -1.0, index=index)


def check_lie_axioms(draws, tol, seed):
    candidates = []
    for L in (build_so3(), build_so4()):
        for kind, residual in (('antisymmetry', antisymmetry_residual), ('jacobi', jacobi_residual),
                               ('ad_invariance', ad_invariance_residual)):
            value = residual(L)
            candidates.append(Witness(f'{L.name}_{kind}', value, tol - value))
    return build_report('lie_axioms', candidates, len(candidates), tol, seed)


def check_oracle(draws, tol, seed):
    return merge_reports('oracle', [oracle_sweep(L, draws, seed, tol) for L in (build_so3(), build_so4())], tol, seed)


def check_closed_form(draws, tol, seed):
    L = build_so4()
    root = SeededRNG(seed)

    def measure(i):
        rng = root.fork(i)
        Psi = Direction(rng.symmetric(L.dim), L.h0)
        X, Y = rng.normal(L.dim), rng.normal(L.dim)
        coefs = kappa_coefficients(L, Psi, X, Y)
        out = []
        for t in domain_of(Psi).grid(0.9, PATH_GRID):
            exact = kappa(L, Psi, X, Y, t)
            dev = abs(exact - coefs.evaluate(Psi, t))
            out.append(Witness('closed_form', dev, _relative(dev, exact, tol), X, Y, t=float(t), index=i))
        return out

    candidates = [w for ws in parallel_map(measure, range(draws)) for w in ws]
    return build_report('closed_form', candidates, draws, tol, seed)


def check_commuting(draws, tol, seed):
    '''
    For commuting pairs alpha, beta, gamma vanish and the third derivative of kappa at 0 is 6 delta, which must
    match the five-term formula and Richardson differences
    '''
    L = build_so4()
    root = SeededRNG(seed)
    pairs = sample_commuting_pairs(L, draws, seed)

    def measure(pair):
        Psi = Direction(root.fork(draws + pair.index).symmetric(L.dim, scale=0.3), L.h0)
        coefs = kappa_coefficients(L, Psi, pair.X, pair.Y)
        low = max(abs(coefs.alpha), abs(coefs.beta), abs(coefs.gamma))
        five = third_derivative_commuting(L, Psi, pair.X, pair.Y)
        _, _, third = richardson_derivatives(lambda t: kappa(L, Psi, pair.X, pair.Y, t), FD_STEP)
        five_dev, fd_dev = abs(five - coefs.delta), abs(third - 6 * coefs.delta)
        row = {'index': pair.index, 'delta': coefs.delta, 'five_term': five, 'richardson': third / 6}
        return row, [Witness('low_order', low, COEF_SCALE * tol - low, pair.X, pair.Y, index=pair.index),
                     Witness('five_term', five_dev, _relative(five_dev, coefs.delta, IDENTITY_SCALE * tol),
                             pair.X, pair.Y, index=pair.index),
                     Witness('richardson', fd_dev, _relative(fd_dev, 6 * coefs.delta, FD_SCALE * tol),
                             pair.X, pair.Y, index=pair.index)]

    measured = parallel_map(measure, pairs)
    return build_report('commuting', [w for _, ws in measured for w in ws], len(pairs), tol, seed,
                        rows=[r for r, _ in measured], inconclusive=not pairs)


def check_series(draws, tol, seed):
    L = build_so4()
    root = SeededRNG(seed)
    candidates = []
    for i in range(draws):
        rng = root.fork(i)
        Psi = Direction(rng.symmetric(L.dim, scale=0.5), L.h0)
        X, Y = rng.normal(L.dim), rng.normal(L.dim)
        t = 0.5 / max(Psi.op_norm(), 1e-12)
        coefs = kappa_coefficients(L, Psi, X, Y)
        exact = coefs.evaluate(Psi, t)
        dev = abs(coefs.series(Psi, t, SERIES_TERMS) - exact)
        candidates.append(Witness('series', dev, _relative(dev, exact, tol), X, Y, t=t, index=i))
    return build_report('series', candidates, draws, tol, seed)


def check_abelian_expansion(draws, tol, seed):
    '''
    so3 with the line S = span{e3} enlarged: nonnegative up to t = 1/4 (expansion 4/3),
    a negative plane at t = 0.3; the enlargement closed forms against kappa
    '''
    so3, so4 = build_so3(), build_so4()
    S = span(so3, [np.array([0.0, 0.0, 1.0])])
    reports = [max_abelian_expansion_check(so3, S, 0.25, draws, seed, tol)]
    boundary, (X, Y) = min_curvature_estimate(so3, path_at(expand_direction(so3, S), 0.25), draws, 30, seed)
    beyond, (Xn, Yn) = min_curvature_estimate(so3, path_at(expand_direction(so3, S), 0.3), draws, 30, seed)
    candidates = [Witness('boundary_min', boundary, boundary + tol, X, Y, t=0.25),
                  Witness('negative_plane', beyond, NEGATIVE_WITNESS - beyond, Xn, Yn, t=0.3)]
    root = SeededRNG(seed)
    g1 = factor_subspace(so4, 0)
    for i in range(draws):
        rng = root.fork(i)
        t = rng.uniform(-1.0, 0.9)
        X, Y = rng.normal(3), rng.normal(3)
        exact = kappa(so3, expand_direction(so3, S), X, Y, t)
        dev = abs(abelian_enlarge_kappa(so3, S, X, Y, t) - exact)
        candidates.append(Witness('abelian_closed_form', dev, _relative(dev, exact, IDENTITY_SCALE * tol),
                                  X, Y, t=t, index=i))
        X, Y = rng.normal(6), rng.normal(6)
        exact = kappa(so4, expand_direction(so4, g1), X, Y, t)
        dev = abs(nonabelian_enlarge_kappa(so4, g1, X, Y, t) - exact)
        candidates.append(Witness('nonabelian_closed_form', dev, _relative(dev, exact, IDENTITY_SCALE * tol),
                                  X, Y, t=t, index=i))
    reports.append(build_report('enlargement', candidates, draws, tol, seed,
                                details={'boundary_min': boundary, 'beyond_min': beyond}))
    return merge_reports('abelian_expansion', reports, tol, seed,
                         details={'boundary_min': boundary, 'beyond_min': beyond})


def check_cheeger(draws, tol, seed):
    root = SeededRNG(seed)
    candidates = []
    for i in range(draws):
        rng = root.fork(i)
        lam = rng.uniform(0.5, 2.0, 4)
        t = rng.uniform(0.0, 2.0)
        dev = float(np.abs(cheeger_evolve(np.diag(1.0 / lam), t) - np.diag(1.0 / (lam + t))).max())
        candidates.append(Witness('diagonal', dev, tol - dev, t=t, index=i))
        A0 = rng.spd(4)
        expected = np.linalg.inv(A0) + t * np.eye(4)
        dev = float(np.abs(np.linalg.inv(cheeger_evolve(A0, t)) - expected).max())
        candidates.append(Witness('inverse_linear', dev, _relative(dev, np.abs(expected).max(), tol), t=t, index=i))
    berger = np.diag([1.0, 1.0, 1.2])
    return merge_reports('cheeger', [build_report('cheeger_evolve', candidates, draws, tol, seed),
                                     cheeger_monotonicity_check(build_so3(), berger, (0.5, 1.0, 2.0), draws,
                                                                seed, tol)], tol, seed)


def check_reparametrization(draws, tol, seed):
    '''
    c Phi~(s) = Phi(t) for the shifted direction Psi + aI, t = s/(1 - s a), c = 1 - s a
    '''
    L = build_so4()
    root = SeededRNG(seed)
    candidates = []
    for i in range(draws):
        rng = root.fork(i)
        Psi = cheeger_direction(MetricForm(rng.spd(L.dim), L.h0))
        for a in (1.0, rng.uniform(0.2, 1.0)):
            shifted = shift_direction(Psi, a)
            for s in np.arange(1, 10) / 10:
                lhs = shifted.scale(s) * path_at(shifted.direction, s).phi
                rhs = path_at(Psi, shifted.time(s)).phi
                dev = float(np.abs(lhs - rhs).max())
                candidates.append(Witness('reparametrization', dev, _relative(dev, np.abs(rhs).max(), tol),
                                          t=float(s), index=i))
    return build_report('reparametrization', candidates, draws, tol, seed)


def check_six_tuple(draws, tol, seed, perturbation=0.0):
    return verify_th1_identities(draws, seed, tol, perturbation)


def _boundary_torus(rng):
    c, d = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
    bound = np.diag([4 * c / 3, 4 * d / 3])
    theta = rng.uniform(math.pi / 8, 3 * math.pi / 8) #keeps a3 away from 0
    n = np.array([math.cos(theta), math.sin(theta)])
    r = rng.uniform(0.1, 0.5) * min(4 * c / 3, 4 * d / 3)
    block = bound - r * np.outer(n, n)
    return TorusParams(float(c), float(d), float(block[0, 0]), float(block[1, 1]), float(block[0, 1])), n


def _inflate(p, factor):
    return TorusParams(p.c, p.d, factor * p.a1, factor * p.a2, factor * p.a3)


def check_torus_constraint(draws, tol, seed):
    '''
    Torus-form metrics on the 4/3 boundary have minimum curvature ~0; a 5% inflated block
    is rejected by torus_metric and classified with a negative proof-plane witness
    '''
    L = build_so4()
    root = SeededRNG(seed)
    candidates, rows = [], []
    for i in range(draws):
        rng = root.fork(i)
        p, n = _boundary_torus(rng)
        Phi = torus_metric(p)
        value, (X, Y) = min_curvature_estimate(L, Phi, 100, 30, seed + i)
        candidates += [Witness('boundary_low', value, value + tol, X, Y, index=i),
                       Witness('boundary_high', value, BOUNDARY_CEILING - value, X, Y, index=i)]
        for alpha, beta in (tuple(n), tuple(rng.normal(2))):
            curvature, predicted = torus_proof_plane(Phi, alpha, beta)
            dev = abs(curvature - predicted)
            candidates.append(Witness('proof_plane', dev, _relative(dev, predicted, IDENTITY_SCALE * tol), index=i))
        inflated = _inflate(p, INFLATION)
        try:
            torus_metric(inflated)
            rejected = False
        except ConstraintError:
            rejected = True
        candidates.append(_flag('constraint_error', rejected, i))
        verdict = classify_metric(torus_metric(inflated, enforce=False))
        if verdict.kind != ClassifierKind.TORUS_FORM or verdict.witness is None:
            candidates.append(_flag('inflated_classification', False, i))
            continue
        witness = verdict.witness.value
        candidates.append(Witness('inflated_witness', witness, INFLATED_WITNESS - witness,
                                  verdict.witness.X, verdict.witness.Y, index=i))
        rows.append({'index': i, 'boundary_min': value, 'inflated_witness': witness,
                     'inflated_margin': verdict.constraint_margin})
    return build_report('torus_constraint', candidates, draws, tol, seed, rows=rows)


def check_s3_consistency(draws, tol, seed):
    '''
    I - Phi^-1 of an s3 metric fits diag(1 - 1/a, 1 - 1/b) - k_i [[1,1],[1,1]] with
    effective lambda_i (a + b)/2, and has no singular eigenvector
    '''
    root = SeededRNG(seed)
    candidates = []
    for i in range(draws):
        rng = root.fork(i)
        a, b = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
        lam = tuple(float(l) for l in rng.uniform(1.0, 1.15, 3))
        Phi = s3_metric(S3Params(float(a), float(b), lam))
        fit = fit_s3_pattern(direction_from_metric(Phi))
        candidates.append(Witness('s3_fit', fit.residual, tol - fit.residual, index=i))
        expected = np.array([1 - 1 / a, 1 - 1 / b] + [l * (a + b) / 2 for l in lam])
        dev = float(np.abs(np.array([fit.alpha, fit.beta] + list(fit.lam)) - expected).max())
        candidates.append(Witness('s3_parameters', dev, _relative(dev, np.abs(expected).max(), IDENTITY_SCALE * tol),
                                  index=i))
        kind = classify_metric(Phi).kind
        candidates.append(_flag('s3_classification', kind == ClassifierKind.NO_SINGULAR_EIGENVECTOR, i))
    return build_report('s3_consistency', candidates, draws, tol, seed)


def check_shift_identities(draws, tol, seed):
    L = build_so4()
    root = SeededRNG(seed)
    reports = []
    for pair in sample_commuting_pairs(L, draws, seed):
        rng = root.fork(draws + pair.index)
        Psi = Direction(rng.symmetric(L.dim, scale=0.2), L.h0)
        m1, m2 = rng.uniform(0.5, 2.0, 2)
        M = np.diag([m1] * 3 + [m2] * 3)
        reports.append(biinvariant_shift_check(L, M, Psi, pair, tol))
        lam = rng.uniform(0.5, 1.5)
        reports.append(biinvariant_shift_check(L, lam * np.eye(L.dim), Psi, pair, tol))
        X, Y = random_orthonormal_pair(L, rng)
        candidates = []
        for t in (0.0, 0.2, 0.5):
            dev = abs(scalar_shift_kappa_deviation(L, lam, Psi, X, Y, t))
            candidates.append(Witness('kappa_noncommuting', dev, IDENTITY_SCALE * tol - dev, X, Y, t=t,
                                      index=pair.index))
        reports.append(build_report('scalar_shift', candidates, 1, tol, seed))
    return merge_reports('shift_identities', reports, tol, seed)


def check_rigidity(draws, tol, seed):
    '''
    Catalog metrics pass both rigidity checks; the mixing counterexample must fail the
    global one with a witness
    '''
    L = build_so4()
    reports = []
    for entry in catalog_instances(seed, 1):
        reports.append(lemma_k_check(L, direction_from_metric(entry.form), draws, tol, seed))
        reports.append(global_rigidity_check(L, entry.form, draws, tol, seed))
    mixing = global_rigidity_check(L, mixing_counterexample(), draws, tol, seed)
    detected = not mixing.passed and bool(mixing.witnesses)
    reports.append(build_report('mixing_counterexample', [_flag('mixing_detected', detected)], draws, tol, seed,
                                details={'margin': mixing.margin}))
    return merge_reports('rigidity', reports, tol, seed)


def check_zero_planes(draws, tol, seed):
    L = build_so4()
    return merge_reports('zero_planes', [eschenburg_zero_check(L, diagonal_subalgebra(L), 0.5, draws, seed, tol),
                                         eschenburg_zero_check(L, factor_subspace(L, 0), 0.5, draws, seed, tol)],
                         tol, seed)


def check_catalog_nonnegativity(draws, tol, seed):
    L = build_so4()
    pairs = sample_commuting_pairs(L, draws, seed)
    return merge_reports('catalog_nonnegativity',
                         [infinitesimal_nonnegativity_report(L, direction_from_metric(e.form), draws, tol, seed,
                                                             pairs=pairs)
                          for e in catalog_instances(seed, 1)], tol, seed)


CHECKS = {'lie_axioms': check_lie_axioms,
          'oracle': check_oracle,
          'closed_form': check_closed_form,
          'commuting': check_commuting,
          'series': check_series,
          'abelian_expansion': check_abelian_expansion,
          'cheeger': check_cheeger,
          'reparametrization': check_reparametrization,
          'six_tuple': check_six_tuple,
          'torus_constraint': check_torus_constraint,
          's3_consistency': check_s3_consistency,
          'shift_identities': check_shift_identities,
          'rigidity': check_rigidity,
          'zero_planes': check_zero_planes,
          'catalog_nonnegativity': check_catalog_nonnegativity}


class VerifySuite(BaseSuite):
    command = 'verify'

    def run(self):
        c = self.config
        names = list(c.option('suites', default=list(CHECKS)))
        unknown = [n for n in names if n not in CHECKS]
        if unknown:
            raise ConfigError(f'unknown verify suites {unknown}')
        reports = []
        for name in names:
            kwargs = {}
            if name == 'six_tuple':
                kwargs['perturbation'] = float(c.option('six_tuple_perturbation', default=0.0))
            report = CHECKS[name](self.budget(name), self.tolerance(name), c.seed, **kwargs)
            logger.info(report.summary())
            reports.append(report)
        rows = [{'suite': r.name, 'verdict': r.verdict.value, 'margin': r.margin, 'samples': r.samples_used,
                 'tolerance': r.tolerance} for r in reports]
        document = self.document(reports=[r.to_dict() for r in reports])
        return SuiteResult(document, rows, failed=not all(r.passed for r in reports))
