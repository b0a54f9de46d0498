from __future__ import annotations
import itertools
import math
from dataclasses import replace

import mpmath
import numpy as np
import pytest

from nsq_lab.config import DEFAULT_SETTINGS
from nsq_lab.core import derive_params, sqrt_distance
from nsq_lab.errors import ConstraintViolation, VerificationFailure
from nsq_lab.expsums import PrimeTable, build_table
from nsq_lab.smoothing import CupFunction, SelbergMinorant
from nsq_lab.solver import (
    YMode,
    check_permutation_closure,
    find_triples,
    gamma_weight,
    i1_direct,
    i_direct,
    i_quadrature,
    main_term_split,
    orderings,
    scaling_study,
    unordered_counts,
    verify_report,
)

C = 1.02
WITNESS_N = 3.0 * 101 ** C


@pytest.fixture
def witness():
    params = derive_params(C, 1.028, 0.001, WITNESS_N, Y_override=0.06)
    return params, build_table(params)


def brute_force(table, N, eps, Y):
    primes = [int(p) for p in table.p if sqrt_distance(int(p)) < Y]
    hits = set()
    for t in itertools.product(primes, repeat=3):
        if abs(math.fsum(p ** C for p in t) - N) < eps:
            hits.add(t)
    return hits


def test_witness_triple(witness):
    params, table = witness
    report = find_triples(table, params.N, params.eps, params.Y, params=params)
    assert report.triples == [(101, 101, 101)]
    assert report.count == 1
    assert report.filtered_primes == 1
    assert report.gamma == pytest.approx(math.log(101) ** 3)
    assert gamma_weight(report) == pytest.approx(math.log(101) ** 3)
    assert abs(report.deviations()[0]) < 1e-9
    assert report.params["Y"] == 0.06


@pytest.mark.parametrize("X", [120.0, 300.0])
def test_enumeration_matches_brute_force(params_at, X):
    params = params_at(X, Y=0.3)
    table = build_table(params)
    report = find_triples(table, params.N, params.eps, params.Y)
    assert set(report.triples) == brute_force(table, params.N, params.eps, params.Y)
    assert len(report.triples) == report.count
    check_permutation_closure(report)
    assert verify_report(report) == []
    assert report.gamma == pytest.approx(gamma_weight(report), rel=1e-12)


def test_empty_filter(params_at):
    params = params_at(300.0, Y=1e-6)
    report = find_triples(build_table(params), params.N, params.eps, params.Y)
    assert report.count == 0 and report.gamma == 0.0
    assert gamma_weight(report) == 0.0


def test_budget_switches_to_counts(params_at):
    params = params_at(300.0)
    table = build_table(params)
    full = find_triples(table, params.N, params.eps, params.Y)
    assert full.count > 0
    capped = find_triples(table, params.N, params.eps, params.Y, budget=0)
    assert capped.count_only and capped.triples == []
    assert capped.count == full.count
    assert capped.gamma == full.gamma
    assert capped.summary()["unordered_triples"] is None


def test_threads_do_not_change_results(params_at):
    params = params_at(300.0)
    table = build_table(params)
    one = find_triples(table, params.N, params.eps, params.Y)
    four = find_triples(table, params.N, params.eps, params.Y, replace(DEFAULT_SETTINGS, threads=4))
    assert one.triples == four.triples
    assert one.gamma == four.gamma


def test_solver_rejects_bad_window(witness):
    params, table = witness
    with pytest.raises(ConstraintViolation):
        find_triples(table, params.N, 0.0, params.Y)
    with pytest.raises(ConstraintViolation):
        find_triples(table, params.N, 1.0, 0.5)


def test_orderings_and_unordered_counts():
    assert orderings((3, 5, 7)) == 6
    assert orderings((3, 3, 7)) == 3
    assert orderings((5, 5, 5)) == 1


def test_unordered_counts(params_at):
    params = params_at(300.0)
    report = find_triples(build_table(params), params.N, params.eps, params.Y)
    counts = unordered_counts(report)
    assert sum(counts.values()) == report.count
    assert all(key == tuple(sorted(key)) for key in counts)


def test_listed_triples_are_reverified(params_at):
    params = params_at(300.0)
    report = find_triples(build_table(params), params.N, params.eps, params.Y)
    assert report.count > 0
    assert report.verified == report.count
    assert report.summary()["verified_triples"] == report.count


def test_verification_catches_bad_triples(witness, monkeypatch):
    params, table = witness
    report = find_triples(table, params.N, params.eps, params.Y)
    report.triples.append((103, 107, 109))
    assert verify_report(report) == [(103, 107, 109)]
    assert verify_report(report, triples=[(101, 101, 101)]) == []
    monkeypatch.setattr("nsq_lab.solver.inside_exact", lambda *args, **kwargs: False)
    with pytest.raises(VerificationFailure):
        find_triples(table, params.N, params.eps, params.Y)


def test_large_reports_verify_a_sample(params_at):
    params = params_at(300.0)
    table = build_table(params)
    full = find_triples(table, params.N, params.eps, params.Y)
    sampled = find_triples(table, params.N, params.eps, params.Y, replace(DEFAULT_SETTINGS, verify_limit=5))
    assert sampled.triples == full.triples
    assert full.count > 5
    assert 0 < sampled.verified < full.verified


def numpy_oracle(table, N, eps, Y, c):
    """Full cube of table sums; ties within 1e-6 of the window edge go to mpmath."""
    keep = np.array([int(p) for p in table.p if sqrt_distance(int(p)) < Y], dtype=np.int64)
    if keep.size == 0:
        return set()
    pc = keep.astype(np.float64) ** c
    dev = pc[:, None, None] + pc[None, :, None] + pc[None, None, :] - N
    hits = set()
    for i, j, k in np.argwhere(np.abs(dev) <= eps + 1e-6).tolist():
        t = (int(keep[i]), int(keep[j]), int(keep[k]))
        d = float(dev[i, j, k])
        if abs(abs(d) - eps) > 1e-6:
            inside = abs(d) < eps
        else:
            with mpmath.workdps(50):
                inside = abs(mpmath.fsum(mpmath.mpf(q) ** mpmath.mpf(c) for q in t) - mpmath.mpf(N)) < eps
        if inside:
            hits.add(t)
    return hits


@pytest.mark.slow
def test_enumeration_matches_oracle_on_random_configs(params_at):
    rng = np.random.default_rng(2024)
    for _ in range(50):
        X = float(rng.uniform(60.0, 2000.0))
        c = float(rng.uniform(1.005, 1.025))
        params = params_at(X, c=c)
        table = build_table(params)
        N = float(rng.uniform(3.0 * (X / 2.0) ** c, 3.0 * X ** c))
        eps = float(rng.uniform(0.1, 5.0))
        Y = float(rng.uniform(0.02, 0.44))
        report = find_triples(table, N, eps, Y)
        mismatch = set(report.triples) ^ numpy_oracle(table, N, eps, Y, c)
        assert mismatch <= set(report.boundary_flags), (X, c, N, eps, Y)
        assert report.verified == report.count


# ----------------------- counting integrals -----------------------

def test_single_prime_i1(witness):
    params, _ = witness
    table = PrimeTable.from_primes([101], params.X, params.c)
    cup = CupFunction.from_params(params)
    A = SelbergMinorant(params.mu)
    result = i1_direct(table, cup, A, params)
    chi = cup.chi_eval(math.sqrt(101))
    expected = A.minorant_eval(0.0) / params.eps * chi ** 3 * math.log(101) ** 3
    assert result.value == pytest.approx(expected, rel=1e-9)
    assert result.terms == 1


def test_i_dominates_i1_on_positive_parts(params_at):
    params = params_at(300.0)
    table = build_table(params)
    A = SelbergMinorant(params.mu)
    cup = CupFunction.from_params(params)
    i1 = i1_direct(table, cup, A, params)
    i_all = i_direct(table, A, params)
    assert 0.0 <= i1.positive <= i_all.positive
    assert i1.value <= i1.gamma / params.eps + i1.truncation


def test_direct_and_quadrature_agree(params_at):
    params = params_at(100.0)
    table = build_table(params)
    A = SelbergMinorant(params.mu)
    direct = i_direct(table, A, params)
    value, err = i_quadrature(table, A, params)
    assert value == pytest.approx(direct.value, abs=direct.truncation + err + 1e-6 * abs(direct.value))


def test_main_term_split_report(params_at):
    params = params_at(200.0)
    table = build_table(params)
    report = main_term_split(table, CupFunction.from_params(params), SelbergMinorant(params.mu), params, 65)
    assert report.lhs >= 0.0
    assert report.ok
    assert {"I1", "I", "max_V", "int_S2", "int_V2"} <= set(report.parameters)


# ----------------------- scaling -----------------------

def test_scaling_study_fixed_y():
    study = scaling_study(C, 1.028, 0.001, 2.0, [2.0 * x ** C for x in (200.0, 300.0, 400.0, 600.0)],
                          y_mode=YMode.FIXED, Y0=0.3)
    assert len(study.rows) == 4
    assert study.predictor_slope == pytest.approx(3.0 - 1.028, abs=1e-9)
    assert all(row.ratio == pytest.approx(row.gamma / row.predictor) for row in study.rows)
    assert math.isfinite(study.slope)


def test_scaling_study_needs_four_points_and_y():
    grid = [2.0 * x ** C for x in (200.0, 300.0, 400.0, 500.0)]
    with pytest.raises(ConstraintViolation):
        scaling_study(C, 1.028, 0.001, 2.0, grid[:3], Y0=0.3)
    with pytest.raises(ConstraintViolation):
        scaling_study(C, 1.028, 0.001, 2.0, grid, y_mode=YMode.FIXED)


def test_scaling_integrals_use_the_override_eps():
    grid = [2.0 * x ** C for x in (200.0, 300.0, 400.0, 600.0)]
    study = scaling_study(C, 1.028, 0.001, 2.0, grid, y_mode=YMode.FIXED, Y0=0.3,
                          eps_override=0.5, with_integrals=True)
    row = study.rows[0]
    assert row.eps == 0.5
    params = derive_params(C, 1.028, 0.001, grid[0], 2.0, Y_override=0.3)
    table = build_table(params)
    i1 = i1_direct(table, CupFunction.from_params(params), SelbergMinorant(2.0), params, eps=0.5)
    assert i1.eps == 0.5
    assert row.i1_ratio == pytest.approx(i1.value / (0.3 ** 3 * params.X ** (3.0 - C)), rel=1e-12)
    default = i1_direct(table, CupFunction.from_params(params), SelbergMinorant(2.0), params)
    assert default.eps == params.eps != 0.5


@pytest.mark.slow
def test_scaling_tracks_predictor_on_geometric_grid():
    c = 1.01
    grid = [2.0 * (2e4 * 2.0 ** k) ** c for k in range(4)]
    study = scaling_study(c, 1.02, 0.001, 2.0, grid, y_mode=YMode.FIXED, Y0=0.25,
                          settings=replace(DEFAULT_SETTINGS, threads=8))
    assert study.rows[0].X == pytest.approx(2e4) and study.rows[-1].X == pytest.approx(1.6e5)
    assert all(row.triples > 0 for row in study.rows)
    assert abs(study.slope - study.predictor_slope) <= 0.25
    assert study.spread() < 10.0
