from __future__ import annotations
import math

import numpy as np
import pytest

from nsq_lab.util import (
    compensated_sum,
    cosine_series,
    fit_loglog_slope,
    kahan_sum_axis,
    oscillatory_quad,
    panel_count,
)


def test_cosine_series_blocking_matches_direct_sum():
    rng = np.random.default_rng(3)
    t = rng.uniform(-1.0, 1.0, 50)
    m = np.arange(1, 5001, dtype=np.float64)
    coeffs = 1.0 / m ** 2
    direct = np.cos(2.0 * math.pi * np.outer(t, m)) @ coeffs
    blocked = cosine_series(t, coeffs, t_block=7, m_block=64)
    assert np.allclose(blocked, direct, rtol=0.0, atol=1e-12)
    assert np.array_equal(blocked, cosine_series(t, coeffs, t_block=7, m_block=64))


def test_cosine_series_known_values():
    # sum 1/m^2 cos(2 pi m t) = pi^2 (t^2 - t + 1/6) on [0, 1]
    t = np.array([0.0, 0.25, 0.5])
    m = np.arange(1, 200_001, dtype=np.float64)
    got = cosine_series(t, 1.0 / m ** 2)
    exact = math.pi ** 2 * (t * t - t + 1.0 / 6.0)
    assert np.allclose(got, exact, atol=1e-5)
    assert np.array_equal(cosine_series(t, np.empty(0)), np.zeros(3))


def test_oscillatory_quad_against_closed_form():
    f = 37.3
    value, err = oscillatory_quad(lambda x: np.cos(2.0 * math.pi * f * x), 0.0, 2.5, f)
    assert value == pytest.approx(math.sin(2.0 * math.pi * f * 2.5) / (2.0 * math.pi * f), abs=1e-10)
    assert err < 1e-8
    assert oscillatory_quad(np.cos, 1.0, 1.0, 1.0) == (0.0, 0.0)


def test_panel_count():
    assert panel_count(0.0, 2.0, 8.0, 1.0) == 16
    assert panel_count(0.0, 2.0, 8.0, 0.25) == 64
    assert panel_count(0.0, 1e-9, 1.0, 1.0) == 1


def test_compensated_sums_recover_cancelled_terms():
    values = [1e16, 1.0, -1e16] * 4
    assert compensated_sum(values) == 4.0
    rows = np.array([[1e16, 2.0], [1.0, 3.0], [-1e16, -5.0]])
    assert kahan_sum_axis(rows, axis=0).tolist() == [1.0, 0.0]


def test_loglog_slope():
    xs = [10.0, 100.0, 1000.0]
    assert fit_loglog_slope(xs, [3.0 * x ** 1.5 for x in xs]) == pytest.approx(1.5)
    assert math.isnan(fit_loglog_slope([1.0], [1.0]))
