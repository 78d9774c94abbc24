'''
main: the curvlab command line, end to end with small budgets
'''
import json
import os

import pytest
import yaml

from curvlab.main import main, parse_options
from curvlab.utilities.errors import ConfigError

QUICK_VERIFY = ['verify', '--samples', '2', '--options', 'suites=[lie_axioms,six_tuple,s3_consistency,rigidity]']


def read(path):
    with open(path, 'r') as f:
        return f.read()


@pytest.fixture
def catalog_dir(tmp_path):
    out = tmp_path / 'catalog'
    assert main(['catalog', '--samples', '1', '--out', str(out)]) == 0
    return out


def test_parse_options():
    assert parse_options(['pairs=8', 'singular_only', 'suites=[a, b]']) == {
        'pairs': 8, 'singular_only': True, 'suites': ['a', 'b']}
    with pytest.raises(ConfigError):
        parse_options(['=3'])


def test_quick_verify_passes(tmp_path):
    out = tmp_path / 'verify.json'
    assert main(QUICK_VERIFY + ['--out', str(out)]) == 0
    document = json.loads(read(out))
    assert document['command'] == 'verify'
    assert [r['name'] for r in document['reports']] == ['lie_axioms', 'six_tuple_identities', 's3_consistency', 'rigidity']
    assert all(r['verdict'] == 'PASS' for r in document['reports'])
    assert 'out_path' not in document['config']


def test_perturbed_six_tuple_fails(tmp_path):
    out = tmp_path / 'verify.json'
    argv = ['verify', '--samples', '2', '--options', 'suites=[six_tuple]', 'six_tuple_perturbation=1e-3',
            '--out', str(out)]
    assert main(argv) == 1
    document = json.loads(read(out))
    assert document['reports'][0]['verdict'] == 'FAIL'
    assert document['reports'][0]['witnesses']


def test_impossible_tolerance_fails(capsys):
    assert main(['oracle', '--algebra', 'so4', '--samples', '20', '--tol', '1e-20']) == 1
    document = json.loads(capsys.readouterr().out)
    assert document['reports'][0]['verdict'] == 'FAIL'


def test_oracle_passes(capsys):
    assert main(['oracle', '--samples', '25']) == 0
    document = json.loads(capsys.readouterr().out)
    assert [r['name'] for r in document['reports']] == ['oracle_so3', 'oracle_so4']
    assert document['max_relative_deviation'] <= 1e-9


def test_runs_are_byte_identical(tmp_path):
    first, second = tmp_path / 'a.json', tmp_path / 'b.json'
    assert main(['oracle', '--samples', '10', '--seed', '3', '--out', str(first)]) == 0
    assert main(['oracle', '--samples', '10', '--seed', '3', '--out', str(second)]) == 0
    assert read(first) == read(second)


def test_thread_count_does_not_change_results(tmp_path, monkeypatch):
    serial, threaded = tmp_path / 'serial.json', tmp_path / 'threaded.json'
    argv = ['search', '--samples', '4', '--options', 'pairs=8']
    assert main(argv + ['--out', str(serial)]) == 0
    monkeypatch.setenv('CURVLAB_THREADS', '4')
    assert main(argv + ['--out', str(threaded)]) == 0
    assert read(serial) == read(threaded)


def test_csv_format(capsys):
    assert main(['oracle', '--algebra', 'so3', '--samples', '5', '--format', 'csv']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 6
    assert ',' in lines[0]


@pytest.mark.parametrize('argv', [
    ['verify', '--samples', 'many'],
    ['verify', '--bogus'],
    ['frobnicate'],
    ['verify', '--samples', '0'],
    ['verify', '--format', 'xml'],
    ['verify', '--options', 'suites=[no_such_suite]'],
    ['verify', '--options', 'no_such_option=1'],
    ['catalog', '--options', 'families=[lens]'],
])
def test_configuration_errors(argv):
    assert main(argv) == 2


def test_user_config_layer(tmp_path):
    config = tmp_path / 'user.yaml'
    config.write_text(yaml.safe_dump({'samples': 3, 'options': {'suites': ['lie_axioms']}}))
    out = tmp_path / 'verify.json'
    assert main(['verify', '--config', str(config), '--seed', '5', '--out', str(out)]) == 0
    document = json.loads(read(out))
    assert document['config']['samples'] == 3
    assert document['config']['seed'] == 5


def test_user_config_rejects_unknown_keys(tmp_path):
    config = tmp_path / 'user.yaml'
    config.write_text(yaml.safe_dump({'budget': 3}))
    assert main(['verify', '--config', str(config)]) == 2
    assert main(['verify', '--config', str(tmp_path / 'missing.yaml')]) == 2


def test_invalid_thread_count(monkeypatch):
    monkeypatch.setenv('CURVLAB_THREADS', 'zero')
    assert main(QUICK_VERIFY) == 2


def test_catalog_writes_files(catalog_dir):
    index = json.loads(read(catalog_dir / 'index.json'))
    assert index['files'] == ['product-0.json', 'torus-0.json', 's3-0.json']
    for name in index['files']:
        doc = json.loads(read(catalog_dir / name))
        assert doc['algebra'] == 'so4'
        assert len(doc['phi']) == 6


def test_analyze_catalog_files(catalog_dir, capsys):
    kinds = {'product': 'PRODUCT', 'torus': 'TORUS_FORM', 's3': 'NO_SINGULAR_EIGENVECTOR'}
    for family, kind in kinds.items():
        capsys.readouterr()
        assert main(['analyze', '--input', str(catalog_dir / f'{family}-0.json'), '--samples', '8',
                     '--options', 'refine_steps=5']) == 0
        document = json.loads(capsys.readouterr().out)
        assert document['classification']['kind'] == kind
        verdicts = {r['name']: r['verdict'] for r in document['reports']}
        assert verdicts['infinitesimal_nonnegativity'] == 'PASS'
        assert verdicts['global_rigidity'] == 'PASS'


def test_analyze_direction_file(tmp_path, capsys):
    path = tmp_path / 'psi.json'
    path.write_text(json.dumps({'algebra': 'so3', 'psi': [[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]}))
    assert main(['analyze', '--input', str(path), '--samples', '4']) == 0
    document = json.loads(capsys.readouterr().out)
    assert document['classification'] is None
    assert [r['name'] for r in document['reports']] == ['lemma_k', 'infinitesimal_nonnegativity']


def test_analyze_algebra_mismatch(catalog_dir):
    assert main(['analyze', '--input', str(catalog_dir / 'torus-0.json'), '--algebra', 'so3']) == 2


@pytest.mark.parametrize('content', [
    None,
    'not json',
    json.dumps({'algebra': 'so3'}),
    json.dumps({'algebra': 'so3', 'phi': [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0], [0.0, 0.0, 1.0]]}),
    json.dumps({'algebra': 'so3', 'phi': [[1.0, 0.0], [0.0, 1.0]]}),
])
def test_analyze_bad_input(tmp_path, content):
    path = tmp_path / 'input.json'
    if content is not None:
        path.write_text(content)
    out = tmp_path / 'report.json'
    assert main(['analyze', '--input', str(path), '--out', str(out)]) == 2
    assert not os.path.exists(out)


def test_analyze_needs_input():
    assert main(['analyze']) == 2


def test_search(capsys):
    assert main(['search', '--samples', '3', '--options', 'pairs=8', 'singular_only']) == 0
    document = json.loads(capsys.readouterr().out)
    for survivor in document['survivors']:
        assert survivor['kind'] in ('PRODUCT', 'TORUS_FORM', 'NO_SINGULAR_EIGENVECTOR')
        assert len(survivor['psi']) == 6


def test_search_singular_only_needs_so4():
    assert main(['search', '--algebra', 'so3', '--samples', '2', '--options', 'singular_only']) == 2
