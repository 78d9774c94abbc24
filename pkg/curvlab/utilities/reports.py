'''
Verdicts, witnesses and the serialized report documents shared by every command.
'''
import io
import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import pandas as pd

from curvlab.utilities.errors import CurvlabError
from curvlab.utilities.misc import validate_json

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MAX_WITNESSES = 5


class Verdict(str, Enum):
    PASS = 'PASS'
    FAIL = 'FAIL'
    INCONCLUSIVE = 'INCONCLUSIVE'


def finite_or_none(value):
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _vector(v):
    return None if v is None else [float(x) for x in np.asarray(v).ravel()]


@dataclass(frozen=True)
class Witness:
    '''
    A sampled pair or plane with its measured value. slack is the distance to failure
    (negative for a violation); witnesses are ordered by it, worst first.
    '''
    kind: str
    value: float
    slack: float
    X: np.ndarray = None
    Y: np.ndarray = None
    t: float = None
    index: int = None

    def to_dict(self):
        d = {'kind': self.kind, 'value': float(self.value), 'slack': float(self.slack),
             't': finite_or_none(self.t), 'index': self.index}
        if self.X is not None:
            d['X'] = _vector(self.X)
        if self.Y is not None:
            d['Y'] = _vector(self.Y)
        return d


@dataclass
class AnalysisReport:
    name: str
    verdict: Verdict
    witnesses: list
    samples_used: int
    tolerance: float
    seed: int
    margin: float = None
    rows: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == Verdict.PASS

    def to_dict(self):
        return {'name': self.name,
                'verdict': self.verdict.value,
                'witnesses': [w.to_dict() for w in self.witnesses],
                'samples': int(self.samples_used),
                'tolerance': float(self.tolerance),
                'seed': int(self.seed),
                'margin': finite_or_none(self.margin),
                'details': self.details}

    def summary(self):
        margin = 'n/a' if finite_or_none(self.margin) is None else f'{self.margin:.3e}'
        return f'{self.name}: {self.verdict.value} (margin={margin})'


def build_report(name, candidates, samples_used, tolerance, seed, rows=None, inconclusive=False,
                 details=None, max_witnesses=MAX_WITNESSES):
    '''
    candidates holds one Witness per measured sample; those with slack < 0 fail.
    '''
    failures = [w for w in candidates if w.slack < 0]
    failures.sort(key=lambda w: (w.slack, -1 if w.index is None else w.index))
    margin = min((w.slack for w in candidates), default=None)
    if inconclusive:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.FAIL if failures else Verdict.PASS
    report = AnalysisReport(name, verdict, failures[:max_witnesses], samples_used, tolerance, seed,
                            margin, rows or [], details or {})
    logger.debug(report.summary())
    return report


def merge_reports(name, reports, tolerance, seed, details=None, max_witnesses=MAX_WITNESSES):
    '''
    One report from several sub-checks: FAIL if any failed, else INCONCLUSIVE if any was,
    margin the smallest sub-margin
    '''
    witnesses = sorted((w for r in reports for w in r.witnesses),
                       key=lambda w: (w.slack, -1 if w.index is None else w.index))
    margins = [r.margin for r in reports if finite_or_none(r.margin) is not None]
    verdicts = {r.verdict for r in reports}
    if Verdict.FAIL in verdicts:
        verdict = Verdict.FAIL
    elif Verdict.INCONCLUSIVE in verdicts or not reports:
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.PASS
    report = AnalysisReport(name, verdict, witnesses[:max_witnesses], sum(r.samples_used for r in reports),
                            tolerance, seed, min(margins, default=None),
                            [row for r in reports for row in r.rows], details or {})
    logger.debug(report.summary())
    return report


def build_document(command, config, **payload):
    doc = {'schema': SCHEMA_VERSION, 'command': command, 'config': config}
    doc.update(payload)
    return doc


def to_json(document):
    validate_json(document, 'report-schema.json', CurvlabError)
    return json.dumps(document, indent=4, sort_keys=True, allow_nan=False) + '\n'


def to_csv(rows, columns=None):
    frame = pd.DataFrame(rows, columns=columns)
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, float_format='%.17g', lineterminator='\n')
    return buffer.getvalue()
