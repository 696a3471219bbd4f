import sys
sys.path.insert(0, 'src')

import pytest

from linear_pantograph.zero_finder import build_zero_table


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long acceptance sweeps')


@pytest.fixture(scope='module')
def table_half():
    return build_zero_table(0.5, 8)


@pytest.fixture(scope='module')
def table_nine():
    return build_zero_table(0.9, 8)


@pytest.fixture(scope='module')
def table_one():
    return build_zero_table(1.0, 6)
