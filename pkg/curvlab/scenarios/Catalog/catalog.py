'''
Seeded instances of the known nonnegatively curved families on so(4), written one metric
file per instance.
'''
import logging
import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from curvlab.scenarios.base import BaseSuite, SuiteResult
from curvlab.utilities.errors import ConfigError
from curvlab.utilities.lie_core import build_so4
from curvlab.utilities.metrics import MetricForm, dump_form, form_document
from curvlab.utilities.misc import SeededRNG
from curvlab.utilities.so4 import S3Params, TorusParams, product_metric, s3_metric, torus_metric

logger = logging.getLogger(__name__)

FAMILY_OFFSETS = {'product': 0, 'torus': 10000, 's3': 20000}


@dataclass(frozen=True)
class CatalogEntry:
    family: str
    name: str
    form: MetricForm
    params: dict


def _rotation(rng):
    q = rng.orthogonal(3)
    return q if np.linalg.det(q) > 0 else -q


def product_instance(rng):
    #Berger-type factors diag(x, x, s x) with s <= 4/3, rotated
    factors, spectra = [], []
    for _ in range(2):
        x, s = rng.uniform(0.5, 2.0), rng.uniform(0.9, 1.25)
        spectrum = np.array([x, x, s * x])
        q = _rotation(rng)
        factors.append((q * spectrum) @ q.T)
        spectra.append([float(v) for v in spectrum])
    return product_metric(*factors), {'lambda1': spectra[0], 'lambda2': spectra[1]}


def torus_instance(rng):
    c, d = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
    bound = np.diag([4 * c / 3, 4 * d / 3])
    room = 0.5 * min(4 * c / 3, 4 * d / 3)
    r1, r2 = rng.uniform(0.0, 0.4 * room), rng.uniform(0.6 * room, room)
    theta = rng.uniform(math.pi / 8, 3 * math.pi / 8)
    q = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    block = bound - (q * [r1, r2]) @ q.T
    params = TorusParams(float(c), float(d), float(block[0, 0]), float(block[1, 1]), float(block[0, 1]))
    return torus_metric(params), asdict(params)


def s3_instance(rng):
    a, b = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
    lam = tuple(float(l) for l in rng.uniform(1.0, 1.15, 3))
    params = S3Params(float(a), float(b), lam)
    return s3_metric(params), {'a': params.a, 'b': params.b, 'lambda': list(lam)}


BUILDERS = {'product': product_instance, 'torus': torus_instance, 's3': s3_instance}


def catalog_instances(seed, per_family, families=('product', 'torus', 's3')):
    root = SeededRNG(seed)
    entries = []
    for family in families:
        if family not in BUILDERS:
            raise ConfigError(f'unknown family {family!r}; expected one of {sorted(BUILDERS)}')
        for k in range(per_family):
            form, params = BUILDERS[family](root.fork(FAMILY_OFFSETS[family] + k))
            entries.append(CatalogEntry(family, f'{family}-{k}', form, params))
    return entries


class CatalogSuite(BaseSuite):
    command = 'catalog'

    def run(self):
        c = self.config
        if c.algebra not in (None, 'so4'):
            raise ConfigError('catalog families are defined on so4 only')
        out_dir = c.out_path or c.option('out_dir', default='catalog')
        L = build_so4()
        entries = catalog_instances(c.seed, c.samples, tuple(c.option('families', default=list(BUILDERS))))
        files, names = {}, []
        for entry in entries:
            doc = form_document(L, entry.form, entry.family, entry.params)
            name = entry.name + '.json'
            files[os.path.join(out_dir, name)] = dump_form(doc)
            names.append(name)
            logger.info('%s: %s', entry.name, entry.params)
        document = self.document(files=names)
        rows = [{'file': n, 'family': e.family} for n, e in zip(names, entries)]
        index = os.path.join(out_dir, c.option('index_name', default='index.json'))
        return SuiteResult(document, rows, files=files, report_path=index)
