from __future__ import annotations
import cmath
import math

import numpy as np
import pytest

from nsq_lab.config import Settings
from nsq_lab.errors import BudgetExceeded, ConstraintViolation
from nsq_lab.expsums import (
    PrimeTable,
    SumKind,
    block_eval,
    build_table,
    grid_eval,
    h_alpha,
    s_alpha,
    sum_weights,
    u_alpha,
    v_alpha,
)
from nsq_lab.smoothing import CupFunction

C = 1.02


def e(x: float) -> complex:
    return cmath.exp(2j * math.pi * x)


def test_table_at_twenty(table_at):
    _, table = table_at(20.0)
    assert table.p.tolist() == [11, 13, 17, 19]
    assert np.allclose(table.pc, [p ** C for p in (11, 13, 17, 19)], rtol=1e-15)
    with pytest.raises(ValueError):
        table.pc[0] = 0.0


def test_table_budget(params_at):
    with pytest.raises(BudgetExceeded):
        build_table(params_at(1e6), settings=Settings(max_table_bytes=1000))


def test_single_prime_sums():
    table = PrimeTable.from_primes([101], X=150.0, c=C)
    assert u_alpha(table, 0.0, 1) == pytest.approx(e(math.sqrt(101)) * math.log(101), abs=1e-12)
    cup = CupFunction.build(Y=0.3, r=5, Delta=0.06)
    for alpha in (0.0, 0.37, -1.2):
        expected = e(alpha * 101 ** C) * math.log(101)
        assert h_alpha(table, alpha, cup) == pytest.approx(expected, abs=1e-12)


def test_s_matches_naive_sum(table_at):
    _, table = table_at(300.0)
    for alpha in (0.0, 0.013, 0.5, -2.7):
        naive = sum(e(alpha * int(p) ** C) * math.log(int(p)) for p in table.p)
        assert s_alpha(table, alpha) == pytest.approx(naive, abs=1e-9)
    assert table.s0() == pytest.approx(math.fsum(math.log(int(p)) for p in table.p))


def test_u_with_zero_shift_is_s(table_at):
    _, table = table_at(500.0)
    assert u_alpha(table, 0.21, 0) == s_alpha(table, 0.21)


def test_h_on_restricted_tables(table_at):
    params, table = table_at(2000.0)
    cup = CupFunction.from_params(params)
    inside = table.restrict(table.sqrt_dist <= cup.Y - cup.Delta)
    outside = table.restrict(table.sqrt_dist >= cup.Y)
    assert h_alpha(inside, 0.3, cup) == pytest.approx(s_alpha(inside, 0.3), abs=1e-10)
    assert h_alpha(outside, 0.3, cup) == 0.0


def test_v_is_h_minus_mean_within_tail(table_at):
    params, table = table_at(2000.0)
    cup = CupFunction.from_params(params)
    for alpha in (0.0, 0.11, -0.7):
        v, tail = v_alpha(table, alpha, cup)
        gap = abs(h_alpha(table, alpha, cup) - cup.mean * s_alpha(table, alpha) - v)
        assert gap <= tail + 1e-9 * table.s0()


def test_sum_weights_needs_cup(table_at):
    _, table = table_at(100.0)
    with pytest.raises(ConstraintViolation):
        sum_weights(table, SumKind.V)
    cup = CupFunction.build(Y=0.3, r=4)
    with pytest.raises(ConstraintViolation):
        sum_weights(table, SumKind.V, cup=cup, m_max=0)


def test_grid_is_independent_of_workers(table_at):
    params, table = table_at(3000.0)
    cup = CupFunction.from_params(params)
    alphas = np.linspace(-params.P, params.P, 33)
    for kind in SumKind:
        one = grid_eval(table, kind, alphas, m=3, cup=cup, threads=1)
        many = grid_eval(table, kind, alphas, m=3, cup=cup, threads=4)
        assert np.array_equal(one, many)


def test_block_eval_matches_pointwise(table_at):
    _, table = table_at(3000.0)
    alphas = np.linspace(-1.0, 1.0, 17)
    w, shift = sum_weights(table, SumKind.U, m=2)
    block = block_eval(table, alphas, w, shift, max_elements=1000)
    pointwise = grid_eval(table, SumKind.U, alphas, m=2)
    assert np.allclose(block, pointwise, atol=1e-9 * table.s0(), rtol=0.0)


@pytest.mark.slow
def test_decomposition_at_random_points(table_at):
    params, table = table_at(10000.0)
    cup = CupFunction.from_params(params)
    rng = np.random.default_rng(2024)
    alphas = rng.uniform(-params.P, params.P, 100)
    h = grid_eval(table, SumKind.H, alphas, cup=cup)
    s = grid_eval(table, SumKind.S, alphas)
    v = grid_eval(table, SumKind.V, alphas, cup=cup)
    _, tail = v_alpha(table, 0.0, cup)
    gaps = np.abs(h - cup.mean * s - v)
    assert np.all(gaps <= tail + 1e-9 * table.s0())


def test_restricted_table_records_filter(table_at):
    _, table = table_at(1000.0)
    near = table.restrict(table.sqrt_dist < 0.2, filter_Y=0.2)
    assert table.filter_Y is None
    assert near.filter_Y == 0.2
    assert np.all(near.sqrt_dist < 0.2)
    assert near.restrict(near.p > 700).filter_Y == 0.2
