from __future__ import annotations
import json
import math

import mpmath
import numpy as np
import pytest

from nsq_lab.core import (
    Params,
    derive_params,
    divisor_count,
    divisor_count_table,
    factorize,
    mangoldt,
    mangoldt_table,
    mobius,
    mobius_table,
    power_c,
    power_c_array,
    power_c_mp,
    sieve_primes,
    smoothing_order,
    sqrt_distance,
    sqrt_frac,
    sqrt_frac_array,
)
from nsq_lab.errors import ConstraintViolation

N_E20 = 2.0 * math.exp(20.4)


def eratosthenes(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags)


def test_derived_constants_at_e20():
    p = derive_params(1.02, 1.028, 0.001, N_E20, clamp_y=True)
    assert p.X == pytest.approx(math.exp(20.0), rel=1e-12)
    assert p.r == 20
    assert p.eps == pytest.approx(math.exp(-0.16), rel=1e-9)
    assert p.eps == pytest.approx(0.852144, abs=1e-6)
    assert p.Y == 0.4
    assert p.Delta == pytest.approx(0.08)
    assert p.M == pytest.approx(20 / 0.08)
    assert p.P == pytest.approx(2.0 / p.eps)


def test_derived_y_above_ceiling_needs_clamp():
    with pytest.raises(ConstraintViolation, match="Y < 0.45"):
        derive_params(1.02, 1.028, 0.001, N_E20)


def test_formula_y_is_kept_when_small():
    p = derive_params(1.0001, 1.0002, 1e-6, 2.0 * math.exp(100.0 * 1.0001))
    assert p.Y == pytest.approx(p.formula_y())
    assert 0.0 < p.Y < 0.45


@pytest.mark.parametrize(
    "kwargs, constraint",
    [
        ({"c": 1.0}, "1 < c"),
        ({"tau": 1.01}, "c < tau"),
        ({"tau": 1.03}, "tau < 35/34"),
        ({"delta": 0.0}, "delta > 0"),
        ({"mu": 0.5}, "mu > 1/2"),
        ({"N": 5.0}, "N/2 > e^c"),
        ({"N": 2.0 * 7.5 ** 1.02}, "X > 8"),
    ],
)
def test_input_constraints_are_named(kwargs, constraint):
    args = {"c": 1.02, "tau": 1.028, "delta": 0.001, "N": 2.0 * 1000 ** 1.02, "mu": 2.0}
    args.update(kwargs)
    with pytest.raises(ConstraintViolation) as exc:
        derive_params(args["c"], args["tau"], args["delta"], args["N"], args["mu"], Y_override=0.3)
    assert exc.value.constraint == constraint
    assert constraint in str(exc.value)


def test_override_y_at_ceiling_rejected():
    with pytest.raises(ConstraintViolation):
        derive_params(1.02, 1.028, 0.001, 2000.0, Y_override=0.45, clamp_y=True)


def test_params_document_is_checked_on_load(params_at):
    p = params_at(1000.0)
    assert Params.from_json(p.to_json()) == p
    doc = json.loads(p.to_json())
    doc["r"] = p.r - 1
    with pytest.raises(ConstraintViolation, match="Params document"):
        Params.from_json(json.dumps(doc))
    doc = json.loads(p.to_json())
    doc["extra"] = 1
    with pytest.raises(ConstraintViolation):
        Params.from_json(json.dumps(doc))


def test_statement_tolerances(params_at):
    p = params_at(1000.0)
    assert p.theorem_eps() == pytest.approx(p.N ** (-(p.tau - p.c) / p.c) * math.log(p.N))
    assert p.theorem_y() > 0.0


def test_smoothing_order_snaps_near_integers():
    assert smoothing_order(math.exp(20.0)) == 20
    assert smoothing_order(math.exp(20.0) * (1 - 1e-9)) == 19
    assert smoothing_order(150.0) == 5


# ----------------------- sieve -----------------------

def test_sieve_small_ranges():
    assert sieve_primes(10, 30).tolist() == [11, 13, 17, 19, 23, 29]
    assert sieve_primes(1, 2).tolist() == [2]
    assert sieve_primes(10, 20).tolist() == [11, 13, 17, 19]


def test_sieve_count_half_million_to_million():
    primes = sieve_primes(500_000, 1_000_000)
    assert primes.size == 78498 - 41538
    oracle = eratosthenes(1_000_000)
    assert np.array_equal(primes, oracle[oracle > 500_000])


def test_sieve_segment_size_does_not_matter():
    a = sieve_primes(10_000, 20_000, segment_size=97)
    b = sieve_primes(10_000, 20_000)
    assert np.array_equal(a, b)
    assert np.all(np.diff(a) > 0)


def test_sieve_bad_ranges():
    with pytest.raises(ConstraintViolation):
        sieve_primes(30, 10)
    with pytest.raises(OverflowError):
        sieve_primes(1 << 62, (1 << 62) + 10)


# ----------------------- arithmetic -----------------------

def test_arithmetic_examples():
    assert mangoldt(8) == pytest.approx(math.log(2))
    assert mangoldt(12) == 0.0
    assert mangoldt(13) == pytest.approx(math.log(13))
    assert (mobius(1), mobius(12), mobius(30)) == (1, 0, -1)
    assert (divisor_count(1), divisor_count(12), divisor_count(97)) == (1, 6, 2)
    assert factorize(360) == {2: 3, 3: 2, 5: 1}
    with pytest.raises(ConstraintViolation):
        factorize(0)
    with pytest.raises(ConstraintViolation):
        divisor_count(0)


def test_large_arguments():
    p, q = 1_000_003, 999_983
    assert factorize(p * q) == {q: 1, p: 1}
    assert mobius(p * q) == 1
    assert mangoldt(p ** 3) == pytest.approx(math.log(p))
    assert divisor_count(p ** 2 * q) == 6
    assert factorize(1) == {} and mangoldt(1) == 0.0


def test_tables_agree_with_scalars():
    n = 500
    mu = mobius_table(n)
    lam = mangoldt_table(n)
    tau = divisor_count_table(n)
    for k in range(1, n + 1):
        assert mu[k] == mobius(k)
        assert lam[k] == pytest.approx(mangoldt(k))
        assert tau[k] == divisor_count(k)


def test_sum_of_mangoldt_over_divisors_is_log():
    lam = mangoldt_table(360)
    assert math.fsum(lam[d] for d in range(1, 361) if 360 % d == 0) == pytest.approx(math.log(360))


# ----------------------- roots and powers -----------------------

def test_sqrt_distance_examples():
    assert sqrt_distance(4) == 0.0
    assert sqrt_distance(2) == pytest.approx(0.4142136, abs=1e-7)
    assert sqrt_distance(101) == pytest.approx(0.0498756, abs=1e-7)


def test_sqrt_frac_array_near_large_squares():
    k = 10_000_000
    n = np.array([k * k - 1, k * k + 1, k * k + k, 2, 101, 12_345_678_901], dtype=np.int64)
    got = sqrt_frac_array(n)
    for value, m in zip(got, n.tolist()):
        with mpmath.workdps(40):
            root = mpmath.sqrt(m)
            exact = float(root - mpmath.floor(root))
        assert value == pytest.approx(exact, abs=1e-14)
        assert value == pytest.approx(sqrt_frac(m), abs=1e-15)


def test_power_c_examples():
    assert power_c(7, 1.0) == 7.0
    assert power_c(4, 1.5) == 8.0
    assert power_c(3, 1.02) == pytest.approx(3.0663778, abs=1e-7)
    assert float(power_c_mp(3, 1.02)) == pytest.approx(power_c(3, 1.02), rel=1e-15)
    assert power_c_array(np.array([3, 4]), 1.5)[1] == 8.0
    with pytest.raises(OverflowError):
        power_c_array(np.array([10 ** 15]), 30.0)
