#!/usr/bin/env python3
"""CSV / JSON output helpers."""
from linear_pantograph.checks import CheckResult
from linear_pantograph.config import get_settings
from linear_pantograph.export import read_csv, read_json, resolve_output, write_csv, write_json


def test_bare_names_go_to_output_dir(tmp_path, monkeypatch):
    monkeypatch.setattr(get_settings(), 'output_dir', str(tmp_path / 'out'))
    path = resolve_output('zeros.csv')
    assert path == tmp_path / 'out' / 'zeros.csv'
    assert path.parent.is_dir()
    nested = resolve_output(tmp_path / 'a' / 'b.csv')
    assert nested == tmp_path / 'a' / 'b.csv'


def test_csv_keeps_full_precision(tmp_path):
    value = 0.1 + 0.2
    path = write_csv(tmp_path / 'v.csv', ['name', 'value'], [['x', value]])
    header, rows = read_csv(path)
    assert header == ['name', 'value']
    assert float(rows[0][1]) == value


def test_json_models_and_dicts(tmp_path):
    result = CheckResult(suite='s', name='n', measured=1e-12, threshold=1e-10, passed=True)
    assert read_json(write_json(tmp_path / 'r.json', result))['passed'] is True
    assert read_json(write_json(tmp_path / 'd.json', {'a': [1, 2]})) == {'a': [1, 2]}
