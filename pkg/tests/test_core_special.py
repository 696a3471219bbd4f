#!/usr/bin/env python3
"""Series evaluation of E, C, S and L."""
import cmath
import math

import mpmath
import numpy as np
import pytest

from linear_pantograph import core_special
from linear_pantograph.core_special import EvalOptions, SpecialFunctionKind, eval, eval_complex, eval_derivative, eval_L
from linear_pantograph.errors import AlphaOutOfRange, OutsideValidatedDomain

E, C, S = SpecialFunctionKind.EXP_LIKE, SpecialFunctionKind.COS_LIKE, SpecialFunctionKind.SIN_LIKE


def direct_E(alpha, x, terms=80):
    with mpmath.workdps(40):
        return float(mpmath.fsum(mpmath.mpf(alpha) ** (n * (n - 1) // 2) * mpmath.mpf(x) ** n / mpmath.factorial(n)
                                 for n in range(terms)))


def test_degenerates_to_elementary_functions():
    """α = 1 gives exp, cos and sin."""
    for x in (-7.5, -1.0, 0.0, 0.3, 2.0, 9.0):
        assert eval(E, 1.0, x).value == pytest.approx(math.exp(x), rel=1e-13, abs=1e-13)
        assert eval(C, 1.0, x).value == pytest.approx(math.cos(x), abs=1e-13)
        assert eval(S, 1.0, x).value == pytest.approx(math.sin(x), abs=1e-13)
    print("✓ E_1, C_1, S_1 match exp, cos, sin")


def test_exp_like_matches_definition():
    for alpha, x in ((0.5, 1.0), (0.3, -4.0), (0.9, 2.5)):
        sv = eval(E, alpha, x)
        assert sv.value == pytest.approx(direct_E(alpha, x), rel=1e-13, abs=1e-14)
        assert sv.abs_error_estimate < 1e-12
    print("✓ E_alpha agrees with the defining series")


def test_values_at_origin():
    assert eval(E, 0.4, 0.0).value == 1.0
    assert eval(C, 0.4, 0.0).value == 1.0
    assert eval(S, 0.4, 0.0).value == 0.0


def test_cos_sin_are_real_and_imaginary_parts():
    """E_α(ix) = C_α(x) + i S_α(x)."""
    for alpha, x in ((0.5, 1.7), (0.8, -3.2)):
        z = eval_complex(alpha, 1j * x).value
        assert z.real == pytest.approx(eval(C, alpha, x).value, abs=1e-12)
        assert z.imag == pytest.approx(eval(S, alpha, x).value, abs=1e-12)
    print("✓ C and S are the parts of E on the imaginary axis")


@pytest.mark.parametrize('kind', [E, C, S])
def test_first_derivative_matches_finite_difference(kind):
    alpha, x, h = 0.6, 1.3, 1e-5
    fd = (eval(kind, alpha, x + h).value - eval(kind, alpha, x - h).value) / (2 * h)
    assert eval_derivative(kind, 1, alpha, x).value == pytest.approx(fd, abs=1e-8)


def test_derivative_chain():
    """E' = E(α·), C' = −S(α·), S' = C(α·)."""
    alpha, x = 0.7, 0.9
    assert eval_derivative(E, 1, alpha, x).value == pytest.approx(eval(E, alpha, alpha * x).value)
    assert eval_derivative(C, 1, alpha, x).value == pytest.approx(-eval(S, alpha, alpha * x).value)
    assert eval_derivative(S, 1, alpha, x).value == pytest.approx(eval(C, alpha, alpha * x).value)
    # C'' = −α C(α²x)
    assert eval_derivative(C, 2, alpha, x).value == pytest.approx(-alpha * eval(C, alpha, alpha ** 2 * x).value)


def test_large_argument_uses_extended_precision():
    sv = eval(E, 0.5, -40.0)
    assert sv.extended
    assert sv.precise is not None
    assert sv.value == pytest.approx(direct_E(0.5, -40.0, terms=200), rel=1e-10, abs=1e-12)
    print(f"✓ E_0.5(-40) = {sv.value!r} in {sv.terms_used} terms")


def test_cancellation_escalates_in_double_range():
    """Below the threshold the ladder still escalates when cancellation eats the tolerance."""
    opts = EvalOptions(high_precision_threshold=100.0)
    sv = eval(E, 1.0, -25.0, opts)
    assert sv.extended
    assert sv.value == pytest.approx(math.exp(-25.0), rel=1e-10)


def test_alpha_out_of_range():
    for alpha in (0.0, -0.5, 1.5, float('nan')):
        with pytest.raises(AlphaOutOfRange):
            eval(E, alpha, 1.0)


def test_non_finite_argument():
    with pytest.raises(ValueError):
        eval(E, 0.5, float('inf'))


def test_kind_parsing():
    assert SpecialFunctionKind.parse('sin') is S
    assert SpecialFunctionKind.parse('E') is E
    with pytest.raises(ValueError):
        SpecialFunctionKind.parse('tan')


def test_log_like_is_log_at_alpha_one():
    coeffs = core_special.log_like_coefficients(1.0, 6)
    assert coeffs[:2] == [0.0, 1.0]
    np.testing.assert_allclose(coeffs[2:5], [-1 / 2, 1 / 3, -1 / 4], rtol=1e-12)
    assert eval_L(1.0, 1.3).value == pytest.approx(math.log(1.3), abs=1e-12)


def test_log_like_inverts_exp_like():
    for alpha, v in ((0.5, 1.3), (0.8, 0.75)):
        y = eval_L(alpha, v).value
        assert eval(E, alpha, y).value == pytest.approx(v, abs=1e-12)
    print("✓ E(L(v)) = v")


def test_log_like_outside_radius():
    with pytest.raises(OutsideValidatedDomain):
        eval_L(0.5, 1.8)


def test_addition_formula():
    alpha, x, y = 0.5, 0.7, -1.2
    for kind, n in ((E, 30), (C, 15), (S, 15)):
        rhs = core_special.addition_rhs(kind, alpha, x, y, n)
        assert rhs.value == pytest.approx(eval(kind, alpha, x + y).value, abs=1e-12)


def test_addition_split_forms():
    alpha, x, y = 0.8, 1.1, 0.4
    for kind in (C, S):
        plus = core_special.addition_split(kind, alpha, x, y, 15, 1)
        minus = core_special.addition_split(kind, alpha, x, y, 15, -1)
        f = lambda u: eval(kind, alpha, u).value
        assert plus.value == pytest.approx(f(x + y) + f(x - y), abs=1e-12)
        assert minus.value == pytest.approx(f(x + y) - f(x - y), abs=1e-12)
    with pytest.raises(ValueError):
        core_special.addition_split(C, alpha, x, y, 5, 0)
    with pytest.raises(ValueError):
        core_special.addition_split(E, alpha, x, y, 5, 1)


def test_addition_split_sin_parity():
    """S is odd: S(x+y)+S(x−y) comes from the odd orders (C terms), S(x+y)−S(x−y) from the even ones."""
    alpha, x, y = 0.8, 1.1, 0.4
    s = lambda u: eval(S, alpha, u).value
    plus = core_special.addition_split(S, alpha, x, y, 15, 1).value
    minus = core_special.addition_split(S, alpha, x, y, 15, -1).value
    assert plus == pytest.approx(s(1.5) + s(0.7), abs=1e-12)
    assert minus == pytest.approx(s(1.5) - s(0.7), abs=1e-12)
    # y = 0: S(x)+S(−x) vanishes, S(x)−S(−x) = 2S(x)
    assert core_special.addition_split(S, alpha, x, 0.0, 15, 1).value == pytest.approx(0.0, abs=1e-14)
    assert core_special.addition_split(S, alpha, x, 0.0, 15, -1).value == pytest.approx(2 * s(x), abs=1e-12)
    print("✓ parité des formes scindées de S")


def test_growth_profile_increases():
    profile = core_special.growth_profile(C, 0.5, [5.0, 20.0, 60.0], samples=50)
    assert profile == sorted(profile)
    assert profile[-1] > profile[0]


def test_compensated_sum():
    acc = core_special.CompensatedSum(0.0)
    for v in (1e16, 1.0, -1e16):
        acc.add(v)
    assert acc.value == 1.0


def test_series_derivative_matches_closed_forms():
    assert core_special.series_derivative(E, 2, 1.0, 1.3) == pytest.approx(math.exp(1.3), rel=1e-13)
    assert core_special.series_derivative(C, 2, 1.0, 0.7) == pytest.approx(-math.cos(0.7), rel=1e-13)
    assert core_special.series_derivative(S, 0, 0.5, 0.0) == 0.0
    for kind in (E, C, S):
        for x in (-4.0, 0.9, 12.0, 45.0):
            closed = eval_derivative(kind, 2, 0.5, x)
            termwise = core_special.series_derivative(kind, 2, 0.5, x)
            assert termwise == pytest.approx(closed.value, rel=1e-10, abs=10 * closed.abs_error_estimate)
    with pytest.raises(ValueError):
        core_special.series_derivative('L', 1, 0.5, 0.1)


def test_extended_error_bound_stays_finite():
    """Far out the value leaves the double range; the mpmath bound is kept alongside it."""
    sv = eval(S, 0.3, 2.0e22)
    assert sv.extended
    assert core_special.largest_term_log10(S, 0.3, 2.0e22) > 308
    assert mpmath.isfinite(sv.precise_error)
    assert sv.precise_error < abs(sv.precise)
