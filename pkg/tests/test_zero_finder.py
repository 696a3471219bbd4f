#!/usr/bin/env python3
"""Zero tables of E, C and S and the identities they satisfy."""
import math

import pytest

from linear_pantograph import core_special, zero_finder
from linear_pantograph.core_special import SpecialFunctionKind, eval
from linear_pantograph.zero_finder import (
    build_zero_table,
    check_interlacing,
    euler_sum,
    euler_target,
    first_zero_estimate,
    negative_zeros,
)


def test_alpha_one_zeros_are_multiples_of_pi(table_one):
    for n, (rho, eta) in enumerate(zip(table_one.rho, table_one.eta), start=1):
        assert rho == pytest.approx(n * math.pi, abs=1e-9)
        assert eta == pytest.approx((n - 0.5) * math.pi, abs=1e-9)
    assert table_one.e_neg == []
    assert table_one.failures['e_neg'].startswith('NoZeroFound')
    print(f"✓ rho = {table_one.rho[:3]}")


def test_first_zero_estimate_exact_at_alpha_one():
    assert first_zero_estimate('C', 1.0) == pytest.approx(math.pi / 2)
    assert first_zero_estimate('S', 1.0) == pytest.approx(math.pi)
    with pytest.raises(ValueError):
        first_zero_estimate('E', 0.5)


def test_table_sizes_and_order(table_half):
    assert len(table_half.rho) == len(table_half.eta) == len(table_half.e_neg) == 8
    assert table_half.failures == {}
    assert all(a > b for a, b in zip(table_half.e_neg, table_half.e_neg[1:]))
    assert all(z < 0 for z in table_half.e_neg)


@pytest.mark.parametrize('family,kind', [('rho', 'S'), ('eta', 'C'), ('e_neg', 'E')])
def test_brackets_certify_sign_change(table_half, family, kind):
    for z, (a, b) in zip(table_half.family(family), table_half.brackets[family]):
        assert a <= z <= b
        assert eval(kind, 0.5, a).value * eval(kind, 0.5, b).value < 0


def test_interlacing(table_half, table_nine):
    assert check_interlacing(table_half)
    assert check_interlacing(table_nine)
    chain = zero_finder.interlacing_chain(table_half)
    assert chain[0] == pytest.approx(0.5 * table_half.eta[0])
    print(f"✓ chain starts {chain[:4]}")


def test_family_aliases(table_half):
    assert table_half.family('eneg') == table_half.e_neg
    assert table_half.family('S') == table_half.rho
    with pytest.raises(ValueError):
        table_half.family('zeta')


def test_euler_sums(table_half):
    for power in (2, 4):
        assert euler_sum(table_half, power) == pytest.approx(euler_target(0.5, power), abs=1e-8)
    assert euler_target(0.5, 2) == pytest.approx(1 / 48)
    with pytest.raises(ValueError):
        euler_target(0.5, 3)


def test_euler_sum_alpha_one_converges_slowly(table_one):
    """Σ (nπ)⁻² = 1/6; six zeros and the geometric tail only get close."""
    assert euler_sum(table_one, 2) == pytest.approx(1 / 6, abs=2e-2)


def test_derivative_vanishes_at_scaled_zeros():
    table = build_zero_table(0.5, 2)
    assert zero_finder.derivative_zero_check(table) < 1e-9


def test_integral_identity(table_half):
    assert abs(zero_finder.integral_identity_check(table_half, 1)) < 1e-8
    assert abs(zero_finder.integral_identity_check(table_half, 1, kind='S')) < 1e-8


def test_zero_relation(table_half):
    assert abs(zero_finder.zero_relation_check(table_half, 1, 20)) < 1e-9
    with pytest.raises(ValueError):
        zero_finder.zero_relation_check(table_half, 99, 20)


def test_negative_zeros_direct():
    zeros, brackets = negative_zeros(0.9, 3)
    assert len(zeros) == 3
    for z in zeros:
        sv = eval(SpecialFunctionKind.EXP_LIKE, 0.9, z)
        assert abs(sv.value) < 1e-8
    assert negative_zeros(1.0, 3) == ([], [])


def test_invalid_arguments():
    with pytest.raises(ValueError):
        build_zero_table(0.5, 0)
    with pytest.raises(ValueError):
        negative_zeros(0.5, 0)


def test_comparison_first_zero_matches_cos_like(table_half):
    """y'' = −k y(α²x), y(0)=1, y'(0)=0 is C_α(√(k/α) x)."""
    x0 = zero_finder.comparison_first_zero(0.5, 1.0)
    assert x0 == pytest.approx(table_half.eta[0] * math.sqrt(0.5), abs=1e-6)


def test_comparison_scaling():
    x0, x1 = zero_finder.comparison_scaling_check(0.5, 1.0, 4.0)
    assert x1 == pytest.approx(x0 / 2, rel=1e-6)
    with pytest.raises(ValueError):
        zero_finder.comparison_scaling_check(0.5, 4.0, 1.0)


@pytest.mark.slow
@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.7])
def test_euler_sums_twenty_zeros(alpha):
    table = build_zero_table(alpha, 20)
    assert len(table.rho) == 20 and not table.failures.get('rho')
    assert abs(euler_sum(table, 2) - alpha ** 3 / 6) < 1e-8
    assert abs(euler_sum(table, 4) - (alpha ** 6 / 36 - alpha ** 10 / 60)) < 1e-8


@pytest.mark.slow
@pytest.mark.parametrize('alpha', [0.3, 0.5, 0.7, 0.9])
def test_interlacing_fifteen_pairs(alpha):
    assert check_interlacing(build_zero_table(alpha, 15))


def test_zeros_beyond_double_range():
    """For α = 0.3, S_α exceeds the double range before ρ₂₀; the brackets are still certified."""
    table = build_zero_table(0.3, 20)
    assert len(table.rho) == 20
    assert 'rho' not in table.failures
    last = table.rho[-1]
    assert core_special.largest_term_log10('S', 0.3, last) > 308
    lo, hi = table.brackets['rho'][-1]
    assert lo < last < hi
    a = eval('S', 0.3, lo)
    b = eval('S', 0.3, hi)
    assert (a.precise < 0) != (b.precise < 0)
    assert abs(a.precise) > 10 * a.precise_error
    print(f"✓ rho_20 = {last:.6e}")
