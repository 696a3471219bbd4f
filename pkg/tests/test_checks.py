#!/usr/bin/env python3
"""Acceptance suite runner."""
import pytest

from linear_pantograph import checks
from linear_pantograph.errors import NoZeroFound


def test_degeneration_suite():
    report = checks.run_suites(['degeneration'])
    assert report.passed
    assert report.failures == []
    print(f"✓ {len(report.results)} degeneration checks")


def test_conservation_suite():
    results = checks.suite_conservation()
    assert results and all(r.passed for r in results)


def test_unknown_suite():
    with pytest.raises(ValueError):
        checks.run_suites(['nope'])


def test_suite_errors_become_failures(monkeypatch):
    def broken(alphas=None, **_):
        raise NoZeroFound('no sign change in range')

    monkeypatch.setitem(checks.SUITES, 'broken', broken)
    report = checks.run_suites(['broken'])
    assert not report.passed
    assert report.failures[0].detail.startswith('NoZeroFound')


def test_empty_report_does_not_pass():
    assert not checks.CheckReport(suites=[]).passed


@pytest.mark.slow
def test_all_suites():
    report = checks.run_suites(['all'], instances=5)
    assert report.passed, [f'{r.suite}: {r.name} {r.detail}' for r in report.failures]
