#!/usr/bin/env python3
"""Eigenpairs on [0, 1] and [−l, l], coefficient-sign certificate, sine-like expansions."""
import math

import numpy as np
import pytest

from linear_pantograph.bvp_eigen import (
    certificate_holds,
    eigen_residual,
    eigen_residual_series,
    eigenpairs_symmetric,
    eigenpairs_unit_interval,
    expand_in_sine_like,
    gram_schmidt_basis,
    mode_scale,
    negativity_certificate,
)
from linear_pantograph.core_special import SpecialFunctionKind

XS = np.linspace(0.0, 1.0, 22)[1:-1]


@pytest.fixture(scope='module')
def basis_half(table_half):
    return gram_schmidt_basis(0.5, 4, table_half)


def test_classical_eigenvalues(table_one):
    pairs = eigenpairs_unit_interval(1.0, 3, table_one)
    for n, pair in enumerate(pairs, start=1):
        assert pair.eigenvalue == pytest.approx(-(n * math.pi) ** 2, rel=1e-9)
        assert max(eigen_residual(pair, 1.0, XS)) < 1e-8


def test_unit_interval_pairs(table_half):
    pairs = eigenpairs_unit_interval(0.5, 5, table_half)
    values = [p.eigenvalue for p in pairs]
    assert all(v < 0 for v in values)
    assert all(a > b for a, b in zip(values, values[1:]))
    for pair in pairs:
        y = pair.eigenfunction
        assert abs(y(0.0)) < 1e-12
        assert abs(y(1.0)) < 1e-9
        assert max(eigen_residual(pair, 0.5, XS)) / abs(pair.eigenvalue) < 1e-8
    print(f"✓ lambda = {[round(v, 4) for v in values]}")


def test_eigenfunctions_have_unit_sup_norm(table_half):
    """The raw modes reach ~1e15 on [0, 1] at α = 0.5; eigenfunctions are scaled to sup 1."""
    pairs = eigenpairs_unit_interval(0.5, 5, table_half)
    scales = [mode_scale(SpecialFunctionKind.SIN_LIKE, 0.5, rho) for rho in table_half.rho[:5]]
    assert all(b > a for a, b in zip(scales, scales[1:]))
    assert scales[-1] > 1e6
    xs = np.linspace(0.0, 1.0, 401)
    for pair in pairs:
        peak = max(abs(pair.eigenfunction(x)) for x in xs)
        assert 0.5 < peak <= 1.0 + 1e-9
        assert abs(pair.eigenfunction(1.0)) < 1e-9


def test_series_residual(table_half, table_one):
    """y'' summed termwise agrees with the closed-form chain; a shifted λ is caught."""
    for pair in eigenpairs_unit_interval(0.5, 4, table_half):
        assert max(eigen_residual_series(pair, 0.5, XS)) / abs(pair.eigenvalue) < 1e-8
    pair = eigenpairs_unit_interval(1.0, 2, table_one)[1]
    wrong = pair.model_copy(update={'eigenvalue': pair.eigenvalue * 1.01})
    assert max(eigen_residual_series(pair, 1.0, XS)) / abs(pair.eigenvalue) < 1e-8
    assert max(eigen_residual_series(wrong, 1.0, XS)) / abs(pair.eigenvalue) > 5e-3


def test_too_few_zeros(table_half):
    with pytest.raises(ValueError):
        eigenpairs_unit_interval(0.5, 20, table_half)


def test_symmetric_classical(table_one):
    pairs = eigenpairs_symmetric(1.0, 1.0, 4, table_one)
    expected = [-(k * math.pi / 2) ** 2 for k in range(1, 5)]
    assert [p.eigenvalue for p in pairs] == pytest.approx(expected, rel=1e-9)
    assert [p.kind for p in pairs] == [SpecialFunctionKind.COS_LIKE, SpecialFunctionKind.SIN_LIKE] * 2


def test_symmetric_boundary(table_nine):
    l = 2.0
    pairs = eigenpairs_symmetric(0.9, l, 6, table_nine)
    xs = np.linspace(-l, l, 15)
    for pair in pairs:
        y = pair.eigenfunction
        assert abs(y(l)) < 1e-9 and abs(y(-l)) < 1e-9
        assert max(eigen_residual(pair, 0.9, xs)) / abs(pair.eigenvalue) < 1e-8
    with pytest.raises(ValueError):
        eigenpairs_symmetric(0.9, 0.0, 2, table_nine)


@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.9, 1.0])
def test_negativity_certificate(alpha):
    h_minus, h_plus = negativity_certificate(alpha, 200)
    assert len(h_minus) == len(h_plus) == 200
    assert certificate_holds(h_minus, h_plus)


def test_certificate_rejects_short_series():
    with pytest.raises(ValueError):
        negativity_certificate(0.5, 3)


def test_gram_schmidt(basis_half):
    H = np.asarray(basis_half.H)
    assert np.allclose(np.diag(H), 1.0)
    assert np.allclose(np.triu(H, 1), 0.0)
    assert basis_half.orthogonality_error < 1e-8
    assert np.allclose(np.diag(np.asarray(basis_half.H_hat)), 1.0)
    # e_n garde son terme de tête f_n malgré des échelles très différentes
    assert basis_half.e(2, 0.3) == pytest.approx(basis_half.f(2, 0.3) + H[1, 0] * basis_half.f(1, 0.3))
    # les f_n ne sont pas orthogonales pour α < 1
    G = np.asarray(basis_half.gram)
    assert abs(G[0, 1]) > 1e-4


def test_classical_expansion_is_fourier(table_one):
    basis = gram_schmidt_basis(1.0, 3, table_one)
    result = expand_in_sine_like(lambda x: math.sin(math.pi * x), basis)
    assert result.A == pytest.approx([1.0, 0.0, 0.0], abs=1e-8)
    # la forme développée imprimée diffère déjà pour α = 1
    assert result.printed_discrepancy > 0.5


def test_expansion_recovers_combination(basis_half):
    phi = lambda x: 0.5 * basis_half.f(1, x) + basis_half.f(2, x)
    result = expand_in_sine_like(phi, basis_half)
    assert result.A == pytest.approx([0.5, 1.0, 0.0, 0.0], abs=1e-7)
    assert result.reconstruction_error < 1e-6
    assert result.projection_residual < 1e-8
    assert result.evaluate(basis_half, 0.4) == pytest.approx(phi(0.4), abs=1e-7)


def test_expansion_of_generic_function(basis_half):
    result = expand_in_sine_like(lambda x: x * (1 - x), basis_half)
    assert result.projection_residual < 1e-8
    assert result.reconstruction_error < 0.05
    print(f"✓ printed-formula discrepancy {result.printed_discrepancy:.3e}")


@pytest.mark.slow
def test_reconstruction_error_decreases_with_N(table_half):
    errors = []
    for N in range(1, 7):
        basis = gram_schmidt_basis(0.5, N, table_half)
        errors.append(expand_in_sine_like(lambda x: x * (1 - x), basis).reconstruction_error)
    assert all(b <= a + 1e-7 for a, b in zip(errors, errors[1:]))
