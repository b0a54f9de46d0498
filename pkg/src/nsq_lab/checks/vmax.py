"""Shift length Q and the max |V| scan."""
from __future__ import annotations
import logging
import math
from typing import Optional

import numpy as np

from ..config import DEFAULT_SETTINGS, Settings
from ..core import Params, extended_context
from ..errors import ConstraintViolation, DegenerateParameter
from ..expsums import PrimeTable, SumKind, grid_eval
from ..models import BoundReport, ConstantPolicy
from ..smoothing import CupFunction

log = logging.getLogger("nsq.checks.vmax")


def q_value(P: float, X: float, c: float, dps: int = DEFAULT_SETTINGS.extended_dps) -> int:
    """floor(P^{-3/4} X^{(9-6c)/8}), floored in extended precision."""
    ctx = extended_context(dps)
    value = ctx.power(ctx.mpf(P), ctx.mpf(-3) / 4) * ctx.power(ctx.mpf(X), (9 - 6 * ctx.mpf(c)) / 8)
    return int(ctx.floor(value))


def q_choice(params: Params, settings: Settings = DEFAULT_SETTINGS) -> int:
    Q = q_value(params.P, params.X, params.c, settings.extended_dps)
    if Q < 1:
        raise DegenerateParameter("Q >= 1", f"P={params.P:.6g}, X={params.X:.6g}")
    if Q > math.sqrt(params.X):
        log.warning("Q=%d exceeds X^(1/2)=%.6g", Q, math.sqrt(params.X))
    return Q


def q_report(params: Params, settings: Settings = DEFAULT_SETTINGS) -> BoundReport:
    """Q against the envelope X^{1/2}; a degenerate Q is reported rather than raised."""
    try:
        Q = q_choice(params, settings)
    except DegenerateParameter as dp:
        log.warning("%s", dp)
        return BoundReport.judge(
            "q-choice", 0.0, math.sqrt(params.X), ConstantPolicy.EXACT,
            parameters={"X": params.X, "P": params.P, "Q": 0}, message=str(dp),
        )
    return BoundReport.judge(
        "q-choice", float(Q), math.sqrt(params.X), ConstantPolicy.EXACT,
        parameters={"X": params.X, "P": params.P, "Q": Q},
    )


def vmax_rhs(X: float, P: float, M: float, c: float) -> float:
    terms = (
        M ** 0.5 * X ** (7.0 / 12.0),
        M ** (1.0 / 6.0) * X ** 0.75,
        X ** (11.0 / 12.0),
        P ** (1.0 / 16.0) * X ** ((2.0 * c + 29.0) / 32.0),
        P ** (-3.0 / 16.0) * M ** 0.25 * X ** ((33.0 - 6.0 * c) / 32.0),
        P ** (-1.0 / 16.0) * M ** (1.0 / 12.0) * X ** ((31.0 - 2.0 * c) / 32.0),
    )
    return math.fsum(terms)


def symmetric_grid(P: float, points: int) -> np.ndarray:
    grid = np.linspace(-P, P, points)
    return np.unique(np.concatenate([grid, [0.0]]))


def vmax_scan(
    table: PrimeTable,
    cup: CupFunction,
    P: float,
    grid_points: int,
    m_max: Optional[int] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> BoundReport:
    """max |V| over a grid on [-P, P] (always containing 0) against the six-term bound."""
    if grid_points < 2:
        raise ConstraintViolation("grid_points >= 2", f"grid_points={grid_points}")
    order = cup.analysis_order if m_max is None else m_max
    alphas = symmetric_grid(P, grid_points)
    values = np.abs(grid_eval(table, SumKind.V, alphas, cup=cup, m_max=order, threads=settings.threads))
    at = int(np.argmax(values))
    lhs = float(values[at])
    rhs = vmax_rhs(table.X, P, cup.r / cup.Delta, table.c)
    envelope = 2.0 * float(np.sum(np.abs(cup.coefficients(order)))) * table.s0() + table.s0() * cup.tail_at(order)
    return BoundReport.judge(
        "vmax",
        lhs,
        rhs,
        ConstantPolicy.MEASURED,
        parameters={
            "X": table.X,
            "P": P,
            "points": int(alphas.size),
            "m_max": order,
            "argmax_alpha": float(alphas[at]),
            "v_at_zero": float(values[np.searchsorted(alphas, 0.0)]),
            "abs_envelope": envelope,
        },
    )
