from __future__ import annotations

import pytest

from nsq_lab.core import derive_params
from nsq_lab.expsums import build_table

C = 1.02
TAU = 1.028
DELTA = 0.001


@pytest.fixture
def params_at():
    """Params whose range top is X, with Y fixed (default 0.3)."""

    def make(X: float, Y: float = 0.3, c: float = C, tau: float = TAU, mu: float = 2.0):
        return derive_params(c, tau, DELTA, 2.0 * X ** c, mu, Y_override=Y)

    return make


@pytest.fixture
def table_at(params_at):
    def make(X: float, **kw):
        params = params_at(X, **kw)
        return params, build_table(params)

    return make
