import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import yaml
from jsonschema import Draft202012Validator as validator
from jsonschema.exceptions import ValidationError

from curvlab.utilities.errors import ConfigError

logger = logging.getLogger(__name__)

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'schema')
THREADS_ENV = 'CURVLAB_THREADS'


class objectview(object):
    '''
    Attribute view of a (nested) config dictionary. __json__ is the sorted JSON
    rendering used when the config is embedded in a report.
    '''
    def __init__(self, d):
        self.__dict__ = {key: objectview(value) if isinstance(value, dict) else value for key, value in d.items()}
        self.__json__ = json.dumps(d, indent=4, sort_keys=True)

    def to_dict(self):
        return {key: value.to_dict() if isinstance(value, objectview) else value
                for key, value in self.__dict__.items() if key != '__json__'}

    def get(self, key, default=None):
        return self.__dict__.get(key, default)


def load_yaml(path):
    try:
        with open(path, 'r') as f:
            data = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as error:
        raise ConfigError(f'cannot read config {path}: {error}') from error
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f'config {path} must be a mapping, got {type(data).__name__}')
    return data


@lru_cache(maxsize=None)
def _schema_validator(schema_name):
    with open(os.path.join(SCHEMA_DIR, schema_name)) as fp:
        return validator(schema=json.load(fp), format_checker=validator.FORMAT_CHECKER)


def validate_json(data, schema_name, error_cls):
    '''
    Validates data against one of the bundled schemas, raising error_cls on failure
    '''
    try:
        _schema_validator(schema_name).validate(data)
    except ValidationError as error:
        where = '/'.join(str(p) for p in error.absolute_path) or '<root>'
        raise error_cls(f'{schema_name}: {where}: {error.message}') from error


class SeededRNG:
    '''
    Seeded generator; every sample draws from fork(index), so results do not depend on
    evaluation order or on the number of workers.
    '''

    def __init__(self, seed, index=None):
        self._seed = int(seed)
        entropy = [self._seed] if index is None else [self._seed, int(index)]
        self._rng = np.random.default_rng(np.random.SeedSequence(entropy))

    @property
    def seed(self):
        return self._seed

    def fork(self, index):
        return SeededRNG(self._seed, index)

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._rng.uniform(low, high, size)

    def normal(self, size=None):
        return self._rng.standard_normal(size)

    def integers(self, low, high=None, size=None):
        return self._rng.integers(low, high, size)

    def unit_vector(self, dim, gram=None):
        v = self._rng.standard_normal(dim)
        gram = np.eye(dim) if gram is None else gram
        return v / np.sqrt(v @ gram @ v)

    def orthogonal(self, dim):
        q, r = np.linalg.qr(self._rng.standard_normal((dim, dim)))
        return q * np.sign(np.diag(r))

    def symmetric(self, dim, scale=1.0):
        a = self._rng.standard_normal((dim, dim)) * scale
        return (a + a.T) / 2

    def spd(self, dim, low=0.5, high=2.0):
        q = self.orthogonal(dim)
        return (q * self._rng.uniform(low, high, dim)) @ q.T


def thread_count():
    value = os.environ.get(THREADS_ENV)
    if value is None or value.strip() == '':
        return 1
    try:
        count = int(value)
    except ValueError:
        count = 0
    if count < 1:
        raise ConfigError(f'{THREADS_ENV} must be a positive integer, got {value!r}')
    return count


def parallel_map(fn, items):
    #Results come back in item order whatever the completion order
    items = list(items)
    workers = min(thread_count(), max(1, len(items)))
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def atomic_write(path, text):
    '''
    Writes text to a temporary file next to path and renames it into place, so a
    failure never leaves a partial file behind
    '''
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.' + os.path.basename(path) + '.', suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', newline='') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.debug('wrote %s', path)


RUN_KEYS = ('seed', 'samples', 'tol', 'format', 'algebra', 'options')
FORMATS = ('json', 'csv')


def merge_layer(base, layer, where):
    '''
    Overlays layer on base; keys absent from base are rejected, nested mappings merge
    '''
    merged = dict(base)
    for key, value in layer.items():
        if key not in base:
            raise ConfigError(f'unknown key {key!r} in {where}')
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f'{where}: {key!r} must be a mapping')
            merged[key] = merge_layer(base[key], value, f'{where}.{key}')
        else:
            merged[key] = value
    return merged


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int
    samples: int
    tol: float
    format: str
    algebra: str = None
    input_path: str = None
    out_path: str = None
    options: objectview = None

    def __post_init__(self):
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f'seed must be a nonnegative integer, got {self.seed!r}')
        if isinstance(self.samples, bool) or not isinstance(self.samples, int) or self.samples < 1:
            raise ConfigError(f'samples must be an integer >= 1, got {self.samples!r}')
        if isinstance(self.tol, bool) or not isinstance(self.tol, (int, float)) or not 0 < self.tol < math.inf:
            raise ConfigError(f'tol must be a positive number, got {self.tol!r}')
        if self.format not in FORMATS:
            raise ConfigError(f'format must be one of {FORMATS}, got {self.format!r}')

    @classmethod
    def from_layers(cls, command, defaults, user=None, flags=None):
        '''
        command config.yaml defaults, then the user's YAML, then command-line flags
        '''
        unknown = set(defaults) - set(RUN_KEYS)
        if unknown:
            raise ConfigError(f'{command} defaults carry unknown keys {sorted(unknown)}')
        values = merge_layer(defaults, user or {}, 'user config')
        flags = dict(flags or {})
        input_path = flags.pop('input_path', None)
        out_path = flags.pop('out_path', None)
        values = merge_layer(values, {k: v for k, v in flags.items() if v is not None}, 'flags')
        tol = values.get('tol')
        return cls(command, values.get('seed'), values.get('samples'),
                   float(tol) if isinstance(tol, (int, float)) and not isinstance(tol, bool) else tol,
                   values.get('format'), values.get('algebra'), input_path, out_path,
                   objectview(values.get('options') or {}))

    def option(self, *path, default=None):
        node = self.options
        for key in path:
            if not isinstance(node, objectview):
                return default
            node = node.get(key, default)
        return node

    def to_dict(self):
        #Embedded in reports; out_path is where the report goes, not what produced it
        return {'command': self.command, 'seed': self.seed, 'samples': self.samples, 'tol': self.tol,
                'format': self.format, 'algebra': self.algebra, 'input_path': self.input_path,
                'options': self.options.to_dict()}


def run_suite(config):
    '''
    Builds the command's suite, runs it and writes its outputs. Extra files are written
    before the report; nothing is written when the suite raises.
    '''
    from curvlab.wrapper import Wrapper

    result = Wrapper(config).run()
    for path, text in result.files.items():
        atomic_write(path, text)
    text = result.render(config.format)
    path = result.report_path or config.out_path
    if path:
        atomic_write(path, text)
    else:
        sys.stdout.write(text)
    return result
