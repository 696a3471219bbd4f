#!/usr/bin/env python3
"""Classification of initial value problems posed away from the origin."""
import numpy as np
import pytest

from linear_pantograph.config import get_settings
from linear_pantograph.errors import AmbiguousNearZero, RankAmbiguous
from linear_pantograph.general_point import (
    GateFlag,
    InfiniteFamily,
    NoSolution,
    Unique,
    classify_first_order,
    classify_first_order_forced,
    classify_jordan_pair,
    classify_second_order_same_point,
    classify_second_order_split,
    first_order_residual,
    jordan_pair_residual,
    zero_gate,
)
from linear_pantograph.pantograph_solve import apply_operator

XS = np.linspace(-2.0, 2.0, 9)
PARAMS = (-1.0, 0.5, 2.0)


def test_gate_flags(table_half):
    z0 = table_half.e_neg[0]
    assert zero_gate(0.5, z0, table_half).condition_flag is GateFlag.AT_ZERO
    assert zero_gate(0.5, 0.7, table_half).condition_flag is GateFlag.CLEAR
    report = zero_gate(0.5, complex(z0, 1.0), table_half)
    assert report.condition_flag is GateFlag.CLEAR


def test_ambiguous_gate(table_half, monkeypatch):
    monkeypatch.setattr(get_settings(), 'zero_gate_abs', 1e-3)
    x0 = table_half.e_neg[0] + 1e-5
    assert zero_gate(0.5, x0, table_half).condition_flag is GateFlag.NEAR_ZERO
    with pytest.raises(AmbiguousNearZero) as info:
        classify_first_order(0.5, 1.0, x0, 1.0, table_half)
    assert info.value.report.condition_flag is GateFlag.NEAR_ZERO


class TestFirstOrder:
    def test_unique(self, table_half):
        result = classify_first_order(0.5, 1.0, 0.7, 2.0, table_half)
        assert isinstance(result, Unique)
        assert result.scalar(0.7) == pytest.approx(2.0, abs=1e-12)
        assert first_order_residual(result.scalar, 1.0, XS) < 1e-9

    def test_family_at_zero(self, table_half):
        z0 = table_half.e_neg[0]
        result = classify_first_order(0.5, 1.0, z0, 0.0, table_half)
        assert isinstance(result, InfiniteFamily)
        assert result.free_params == 1
        for c in PARAMS:
            y = result.member([c])[0]
            assert abs(y(z0)) < 1e-9
            assert first_order_residual(y, 1.0, XS) < 1e-8
        with pytest.raises(ValueError):
            result.member([1.0, 2.0])

    def test_no_solution_at_zero(self, table_half):
        result = classify_first_order(0.5, 1.0, table_half.e_neg[0], 1.0, table_half)
        assert isinstance(result, NoSolution)
        assert result.target / result.error_estimate >= 10

    def test_origin_rejected(self, table_half):
        with pytest.raises(ValueError):
            classify_first_order(0.5, 1.0, 0.0, 1.0, table_half)


class TestForcedFirstOrder:
    @pytest.mark.parametrize('r', [2.0, 0.5])
    def test_unique(self, table_half, r):
        result = classify_first_order_forced(0.5, 1.0, (1.0, r), 0.7, 1.0, table_half)
        assert isinstance(result, Unique)
        assert result.scalar(0.7) == pytest.approx(1.0, abs=1e-12)
        assert first_order_residual(result.scalar, 1.0, XS, (1.0, r)) < 1e-8

    def test_at_zero(self, table_half):
        z0 = table_half.e_neg[0]
        forced = classify_first_order_forced(0.5, 1.0, (1.0, 2.0), 0.7, 0.0, table_half)
        # E(λz₀) = 0 : toute solution prend en z₀ la valeur de la solution particulière
        particular_at = forced.scalar(z0)
        family = classify_first_order_forced(0.5, 1.0, (1.0, 2.0), z0, particular_at, table_half)
        assert isinstance(family, InfiniteFamily)
        y = family.member([0.3])[0]
        assert first_order_residual(y, 1.0, XS, (1.0, 2.0)) < 1e-8
        blocked = classify_first_order_forced(0.5, 1.0, (1.0, 2.0), z0, particular_at + 1.0, table_half)
        assert isinstance(blocked, NoSolution)


class TestJordanPair:
    def test_unique(self, table_half):
        result = classify_jordan_pair(0.5, 1.0, 0.7, 1.0, -0.5, table_half)
        assert isinstance(result, Unique)
        y1, y2 = result.solution
        assert y1(0.7) == pytest.approx(1.0, abs=1e-12)
        assert y2(0.7) == pytest.approx(-0.5, abs=1e-12)
        assert jordan_pair_residual(result.solution, 1.0, XS) < 1e-8

    def test_second_component_blocked(self, table_half):
        result = classify_jordan_pair(0.5, 1.0, table_half.e_neg[0], 1.0, 1.0, table_half)
        assert isinstance(result, NoSolution)

    def test_family(self, table_half):
        z0 = table_half.e_neg[0]
        result = classify_jordan_pair(0.5, 1.0, z0, 1.0, 0.0, table_half)
        assert isinstance(result, InfiniteFamily)
        for c in PARAMS:
            y1, y2 = result.member([c])
            assert y1(z0) == pytest.approx(1.0, abs=1e-9)
            assert abs(y2(z0)) < 1e-9
            assert jordan_pair_residual([y1, y2], 1.0, XS) < 1e-8


class TestSecondOrder:
    def test_split_unique(self, table_half):
        alpha, p, q, t0 = 0.5, -1.5, 1.0, 0.8
        result = classify_second_order_split(alpha, p, q, t0, 1.0, 0.5, table_half)
        assert isinstance(result, Unique)
        y = result.scalar
        assert y(t0) == pytest.approx(1.0, abs=1e-10)
        assert y.derivative(t0 / alpha, 1) == pytest.approx(0.5, abs=1e-10)
        assert max(abs(apply_operator(y, [q, p], x)) for x in XS) < 1e-8

    def test_split_distinct_roots_at_zero(self, table_half):
        # racines 2 et −1 : E(−t₀) s'annule pour t₀ = −z₀
        alpha, p, q = 0.5, -0.5, -1.0
        t0 = -table_half.e_neg[0]
        family = classify_second_order_split(alpha, p, q, t0, 1.0, 2.0, table_half)
        assert isinstance(family, InfiniteFamily)
        for c in PARAMS:
            y = family.member([c])[0]
            assert y(t0) == pytest.approx(1.0, abs=1e-9)
            assert y.derivative(t0 / alpha, 1) == pytest.approx(2.0, abs=1e-9)
            assert max(abs(apply_operator(y, [q, p], x)) for x in XS) < 1e-8
        blocked = classify_second_order_split(alpha, p, q, t0, 1.0, 0.0, table_half)
        assert isinstance(blocked, NoSolution)

    def test_split_repeated_root_family(self, table_half):
        alpha, p = 0.5, 1.0
        q = 1.0 / (4 * alpha)
        lam = -p / (2 * alpha)
        t0 = table_half.e_neg[0] / lam
        result = classify_second_order_split(alpha, p, q, t0, 1.0, lam, table_half)
        assert isinstance(result, InfiniteFamily)
        for c in PARAMS:
            y = result.member([c])[0]
            assert y(t0) == pytest.approx(1.0, abs=1e-9)
            assert max(abs(apply_operator(y, [q, p], x)) for x in XS) < 1e-8

    def test_same_point_unique(self, table_half):
        alpha, p, q, t0 = 0.5, -1.5, 1.0, 0.8
        result = classify_second_order_same_point(alpha, p, q, t0, 1.0, 0.5, table_half)
        assert isinstance(result, Unique)
        assert result.scalar(t0) == pytest.approx(1.0, abs=1e-10)
        assert result.scalar.derivative(t0, 1) == pytest.approx(0.5, abs=1e-10)

    def test_same_point_singular(self, table_half):
        alpha, p = 0.5, 1.0
        t0 = table_half.e_neg[0] / (alpha * (-p / alpha))
        family = classify_second_order_same_point(alpha, p, 0.0, t0, 1.0, 0.0, table_half)
        assert isinstance(family, InfiniteFamily)
        for c in PARAMS:
            y = family.member([c])[0]
            assert y(t0) == pytest.approx(1.0, abs=1e-9)
            assert abs(y.derivative(t0, 1)) < 1e-9
        blocked = classify_second_order_same_point(alpha, p, 0.0, t0, 1.0, 1.0, table_half)
        assert isinstance(blocked, NoSolution)
        assert blocked.target / blocked.error_estimate >= 10

    def test_rank_ambiguous(self, table_half, monkeypatch):
        monkeypatch.setattr(get_settings(), 'rank_tol', 0.5)
        monkeypatch.setattr(get_settings(), 'rank_band', 1e6)
        with pytest.raises(RankAmbiguous):
            classify_second_order_same_point(0.5, -1.5, 1.0, 0.8, 1.0, 0.5, table_half)


def test_alpha_one_is_always_unique(table_one):
    results = [
        classify_first_order(1.0, 1.0, -3.0, 2.0, table_one),
        classify_second_order_split(1.0, 1.0, -2.0, 1.5, 1.0, 0.5, table_one),
        classify_second_order_same_point(1.0, 1.0, -2.0, 1.5, 1.0, 0.5, table_one),
    ]
    assert all(isinstance(r, Unique) for r in results)
