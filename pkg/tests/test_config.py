#!/usr/bin/env python3
"""Settings come from PANTOGRAPH_* variables with validated defaults."""
import pytest
from pydantic import ValidationError

from linear_pantograph.config import Settings, get_settings


@pytest.fixture
def fresh_settings():
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def test_defaults(fresh_settings, monkeypatch):
    monkeypatch.delenv('PANTOGRAPH_REL_TOL', raising=False)
    settings = get_settings()
    assert settings.rel_tol == 1e-14
    assert settings.log_like_radius == 0.5
    assert settings.output_dir == 'results'
    assert get_settings() is settings


def test_environment_override(fresh_settings, monkeypatch):
    monkeypatch.setenv('PANTOGRAPH_REL_TOL', '1e-10')
    monkeypatch.setenv('PANTOGRAPH_PROGRESS', 'true')
    settings = get_settings()
    assert settings.rel_tol == 1e-10
    assert settings.progress is True


def test_invalid_value(monkeypatch):
    monkeypatch.setenv('PANTOGRAPH_MAX_TERMS', '1')
    with pytest.raises(ValidationError):
        Settings()
