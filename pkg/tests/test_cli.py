#!/usr/bin/env python3
"""Command-line surface: JSON envelopes, CSV output and exit codes."""
import json
import math

import pytest

from linear_pantograph.cli import main, parse_builtin, parse_forcing
from linear_pantograph.export import read_csv


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured


def envelope(capsys, *argv):
    code, captured = run(capsys, *argv)
    assert code == 0, captured.err
    return json.loads(captured.out)


def test_parse_forcing():
    assert parse_forcing('1:2, -0.5:0.3') == [(1.0, 2.0), (-0.5, 0.3)]
    with pytest.raises(ValueError):
        parse_forcing('1;2')


def test_parse_builtin():
    f = parse_builtin('poly:0,1,-1')
    assert f(0.5) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        parse_builtin('basis:1')
    with pytest.raises(ValueError):
        parse_builtin('cosh:1')


def test_eval_classical_exponential(capsys):
    out = envelope(capsys, 'eval', '--fn', 'E', '--alpha', '1', '--x', '1')
    assert out['command'] == 'eval'
    assert out['results']['value'] == pytest.approx(2.718281828459045, rel=1e-15)
    assert 'value' in out['diagnostics']['error_estimates']


def test_eval_log_like(capsys):
    out = envelope(capsys, 'eval', '--fn', 'L', '--alpha', '1', '--x', '1.2')
    assert out['results']['value'] == pytest.approx(math.log(1.2), rel=1e-12)


def test_zeros_classical(capsys, tmp_path):
    csv_path = tmp_path / 'zeros.csv'
    out = envelope(capsys, 'zeros', '--alpha', '1', '--count', '3', '--family', 'rho', '--csv', str(csv_path))
    assert out['results']['rho'] == pytest.approx([math.pi, 2 * math.pi, 3 * math.pi], abs=1e-9)
    header, rows = read_csv(csv_path)
    assert header == ['family', 'n', 'zero', 'bracket_lo', 'bracket_hi']
    assert len(rows) == 3
    assert float(rows[0][3]) < float(rows[0][2]) < float(rows[0][4])


def test_solve_and_reload(capsys, tmp_path):
    out = envelope(capsys, 'solve', '--order', '2', '--alpha', '0.5', '--coeffs', '1', '-1.5',
                   '--init', '0.7', '-0.4', '--samples', '5')
    x, y = out['results']['samples'][0]
    assert x == 0.0
    assert y == pytest.approx(0.7, abs=1e-12)
    stored = tmp_path / 'solve.json'
    stored.write_text(json.dumps(out), encoding='utf-8')
    again = envelope(capsys, 'solve', '--from-json', str(stored), '--samples', '5')
    assert again['results']['samples'] == out['results']['samples']


def test_solve_with_forcing(capsys, tmp_path):
    csv_path = tmp_path / 'y.csv'
    out = envelope(capsys, 'solve', '--order', '1', '--alpha', '1', '--coeffs', '0', '--init', '0',
                   '--forcing', '1:1', '--t-end', '1', '--samples', '3', '--csv', str(csv_path))
    assert out['results']['samples'][-1][1] == pytest.approx(math.e - 1, rel=1e-12)
    _, rows = read_csv(csv_path)
    assert len(rows) == 3


def test_classify(capsys):
    out = envelope(capsys, 'classify', '--k', '1', '--alpha', '0.5', '--x0', '0.7', '--data', '2', '--zeros', '4')
    assert out['results']['variant'] == 'Unique'
    assert out['diagnostics']['condition_flags'] == ['Clear']


def test_eigen(capsys):
    out = envelope(capsys, 'eigen', '--alpha', '1', '--count', '2')
    assert [p['lambda'] for p in out['results']] == pytest.approx([-math.pi ** 2, -4 * math.pi ** 2], rel=1e-9)


def test_pde(capsys):
    out = envelope(capsys, 'pde', '--kind', 'heat', '--alpha', '1', '--beta', '1', '--modes', '2',
                   '--nx', '3', '--nt', '2')
    assert len(out['results']['grid']) == 6


def test_check_suite(capsys):
    code, captured = run(capsys, 'check', '--suite', 'degeneration')
    assert code == 0
    assert json.loads(captured.out)['results']['passed'] is True


def test_domain_error_exit_code(capsys):
    code, captured = run(capsys, 'eval', '--fn', 'E', '--alpha', '1.5', '--x', '1')
    assert code == 1
    assert captured.out == ''
    diagnostic = json.loads(captured.err.strip().splitlines()[-1])
    assert diagnostic['error'] == 'AlphaOutOfRange'


def test_usage_errors():
    with pytest.raises(SystemExit) as info:
        main(['solve', '--order', '2', '--alpha', '0.5', '--coeffs', '1', '--init', '1', '0'])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(['eval', '--fn', 'L', '--alpha', '0.5', '--x', '1.1', '--deriv', '1'])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(['classify', '--pq', '1', '2', '--alpha', '0.5', '--x0', '1', '--data', '1', '--forcing', '1:1'])
    assert info.value.code == 2
