#!/usr/bin/env python3
"""Truncated heat-like and wave-like series."""
import math

import numpy as np
import pytest

from linear_pantograph.bvp_eigen import gram_schmidt_basis
from linear_pantograph.pde_formal import (
    Normalization,
    PDEKind,
    fd_cross_check,
    heat_like_solution,
    initial_velocity_gap,
    sampled_residual,
    sample_grid,
    wave_like_solution,
)

POINTS = [(x, t) for x in (0.2, 0.5, 0.8) for t in (0.1, 0.5)]
PHI = lambda x: x * (1 - x)
PSI = lambda x: math.sin(math.pi * x)


@pytest.fixture(scope='module')
def basis_half(table_half):
    return gram_schmidt_basis(0.5, 4, table_half)


@pytest.fixture(scope='module')
def basis_one(table_one):
    return gram_schmidt_basis(1.0, 3, table_one)


def test_heat_classical(basis_one):
    u = heat_like_solution(1.0, 1.0, lambda x: math.sin(math.pi * x), 3, basis_one)
    assert u.kind is PDEKind.HEAT_LIKE
    assert u(0.3, 0.1) == pytest.approx(math.exp(-math.pi ** 2 * 0.1) * math.sin(0.3 * math.pi), abs=1e-8)
    assert fd_cross_check(u, POINTS) < 1e-5


def test_heat_residual_and_boundary(basis_half):
    u = heat_like_solution(0.5, 0.5, PHI, 3, basis_half)
    assert max(sampled_residual(u, POINTS)) < 1e-8
    for t in (0.0, 0.3):
        assert abs(u(0.0, t)) < 1e-12
        assert abs(u(1.0, t)) < 1e-8


def test_heat_flags(basis_half):
    flagged = heat_like_solution(0.5, 0.5, PHI, 4, basis_half, t_max=50.0)
    assert flagged.flags
    quiet = heat_like_solution(0.5, 1.0, PHI, 4, basis_half, t_max=50.0)
    assert quiet.flags == []


def test_wave_classical(basis_one):
    u = wave_like_solution(1.0, 1.0, lambda x: math.sin(math.pi * x), lambda x: 0.0, 3, basis_one)
    assert u(0.3, 0.4) == pytest.approx(math.cos(0.4 * math.pi) * math.sin(0.3 * math.pi), abs=1e-8)


def test_wave_corrected(basis_half):
    u = wave_like_solution(0.5, 0.7, PHI, PSI, 4, basis_half)
    assert u.normalization is Normalization.CORRECTED
    assert max(sampled_residual(u, POINTS)) < 1e-8
    assert initial_velocity_gap(u, basis_half, np.linspace(0, 1, 11)) < 1e-10


def test_wave_printed_normalization(basis_half):
    equal = wave_like_solution(0.5, 0.5, PHI, PSI, 4, basis_half, normalization='printed')
    assert max(sampled_residual(equal, POINTS)) < 1e-8
    assert initial_velocity_gap(equal, basis_half, np.linspace(0, 1, 11)) > 1e-3
    unequal = wave_like_solution(0.5, 0.7, PHI, PSI, 4, basis_half, normalization='printed')
    assert max(sampled_residual(unequal, POINTS)) > 1e-6


def test_invalid_inputs(basis_half, basis_one):
    with pytest.raises(ValueError):
        heat_like_solution(0.5, 0.5, PHI, 6, basis_half)
    with pytest.raises(ValueError):
        heat_like_solution(0.5, 0.5, PHI, 3, basis_one)
    heat = heat_like_solution(0.5, 0.5, PHI, 2, basis_half)
    with pytest.raises(ValueError):
        initial_velocity_gap(heat, basis_half, [0.5])


def test_sample_grid(basis_half):
    u = heat_like_solution(0.5, 0.5, PHI, 2, basis_half)
    grid = sample_grid(u, [0.0, 0.5, 1.0], [0.0, 1.0])
    assert len(grid) == 6
    assert grid[1][:2] == (0.5, 0.0)


def test_wave_classical_velocity(basis_one):
    u = wave_like_solution(1.0, 1.0, lambda x: 0.0, lambda x: math.sin(math.pi * x), 3, basis_one)
    expected = math.sin(0.4 * math.pi) * math.sin(0.3 * math.pi) / math.pi
    assert u(0.3, 0.4) == pytest.approx(expected, abs=1e-8)


@pytest.mark.parametrize('normalization', ['printed', 'corrected'])
def test_initial_slice_is_position_projection(basis_half, normalization):
    u = wave_like_solution(0.5, 0.7, PHI, PSI, 3, basis_half, normalization=normalization)
    for x in (0.2, 0.6):
        projected = sum(a * basis_half.f(m, x) for m, a in enumerate(u.coeffs, start=1))
        assert u(x, 0.0) == pytest.approx(projected, abs=1e-12)
