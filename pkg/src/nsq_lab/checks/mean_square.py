"""Mean squares of S and V over [-P, P]: closed pair sums cross-checked by quadrature."""
from __future__ import annotations
import logging
import math
from typing import Dict, Optional, Tuple

import numpy as np

from ..config import DEFAULT_SETTINGS, Settings
from ..errors import ConstraintViolation, VerificationFailure
from ..expsums import PrimeTable, SumKind, block_eval, sum_weights
from ..models import BoundReport, ConstantPolicy
from ..smoothing import CupFunction
from ..util import chunked_sum, oscillatory_quad, panel_count

log = logging.getLogger("nsq.checks.l2")

# Kronrod nodes per panel in scipy quad_vec
_GK_NODES = 21


def pair_integral(pc: np.ndarray, w: np.ndarray, P: float, block: int = 1024) -> float:
    """Integral over [-P, P] of |sum_p w_p e(alpha pc_p)|^2, via the sinc kernel.

    Equals sum_{p1,p2} w1 w2 sin(2 pi P (pc1 - pc2)) / (pi (pc1 - pc2)), with
    diagonal terms 2P w^2.
    """
    rows = []
    for start in range(0, pc.size, block):
        diff = pc[start:start + block, None] - pc[None, :]
        kernel = 2.0 * P * np.sinc(2.0 * P * diff)
        rows.append(w[start:start + block] * (kernel @ w))
    if not rows:
        return 0.0
    return chunked_sum(np.concatenate(rows))


def quadrature_integral(
    table: PrimeTable,
    w: np.ndarray,
    P: float,
    settings: Settings = DEFAULT_SETTINGS,
) -> Optional[Tuple[float, float]]:
    """(integral, error) by panelled scipy quadrature, or None when over `settings.quad_budget`."""
    if len(table) == 0:
        return 0.0, 0.0
    max_freq = float(table.pc.max() - table.pc.min()) if len(table) > 1 else 0.0
    max_freq = max(max_freq, 1.0 / P)
    work = _GK_NODES * panel_count(0.0, P, max_freq, settings.quad_panel_cycles) * len(table)
    if work > settings.quad_budget:
        log.info("quadrature skipped: %.3g node-prime evaluations over budget", work)
        return None

    def integrand(alpha: np.ndarray) -> np.ndarray:
        return np.abs(block_eval(table, alpha, w)) ** 2

    value, err = oscillatory_quad(
        integrand, 0.0, P, max_freq,
        cycles_per_panel=settings.quad_panel_cycles, rel_tol=settings.quad_rel_tol,
    )
    # |S|^2 is even in alpha
    return 2.0 * value, 2.0 * err


def _compare(closed: float, quad: Optional[Tuple[float, float]], settings: Settings) -> Dict[str, object]:
    if quad is None:
        return {"quadrature": None, "quad_rel_diff": None}
    q, _ = quad
    rel = abs(closed - q) / max(abs(closed), abs(q), 1e-300)
    if closed == 0.0 and q == 0.0:
        rel = 0.0
    if rel > settings.quad_agreement:
        raise VerificationFailure(
            f"closed form {closed!r} and quadrature {q!r} disagree (relative {rel:.3g})"
        )
    return {"quadrature": q, "quad_rel_diff": rel}


def l2_s_integral(
    table: PrimeTable,
    P: float,
    settings: Settings = DEFAULT_SETTINGS,
    quadrature: bool = True,
) -> BoundReport:
    """Integral of |S(alpha)|^2 over [-P, P] against P X log^3 X."""
    if not P > 0.0:
        raise ConstraintViolation("P > 0", f"P={P}")
    w, _ = sum_weights(table, SumKind.S)
    closed = pair_integral(table.pc, w, P)
    params: Dict[str, object] = {"X": table.X, "P": P, "primes": len(table)}
    if quadrature:
        params.update(_compare(closed, quadrature_integral(table, w, P, settings), settings))
    rhs = P * table.X * math.log(table.X) ** 3
    return BoundReport.judge("l2-S", closed, rhs, ConstantPolicy.MEASURED, parameters=params)


def l2_v_integral(
    table: PrimeTable,
    cup: CupFunction,
    P: float,
    m_max: Optional[int] = None,
    settings: Settings = DEFAULT_SETTINGS,
    quadrature: bool = True,
) -> BoundReport:
    """Integral of |V(alpha)|^2 over [-P, P] against P X log^5 X.

    The factors e(m sqrt p) do not depend on alpha, so V is a single sum with
    real amplitudes log p * w_p and the same kernel applies.
    """
    if not P > 0.0:
        raise ConstraintViolation("P > 0", f"P={P}")
    order = cup.analysis_order if m_max is None else m_max
    params: Dict[str, object] = {"X": table.X, "P": P, "primes": len(table), "m_max": order}
    if order == 0:
        w = np.zeros(len(table))
    else:
        w, _ = sum_weights(table, SumKind.V, cup=cup, m_max=order)
    closed = pair_integral(table.pc, w, P)
    if quadrature:
        params.update(_compare(closed, quadrature_integral(table, w, P, settings), settings))
    rhs = P * table.X * math.log(table.X) ** 5
    return BoundReport.judge("l2-V", closed, rhs, ConstantPolicy.MEASURED, parameters=params)
