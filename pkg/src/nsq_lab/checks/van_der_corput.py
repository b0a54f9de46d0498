"""Van der Corput k-th derivative test and the Weyl-van der Corput shift inequality."""
from __future__ import annotations
import logging
import math
from typing import Callable, List, Optional

import numpy as np

from ..config import DEFAULT_SETTINGS, Settings
from ..errors import ConstraintViolation, RegimeError
from ..models import BoundReport, ConstantPolicy, Section
from ..util import TWO_PI, chunked_sum_complex, finite_difference, reduce_phase
from .base import interior_samples

log = logging.getLogger("nsq.checks.vdc")

Phase = Callable[[np.ndarray], np.ndarray]


def vdc_rhs(length: float, k: int, lam: float) -> float:
    K = 2 ** (k - 1)
    e = 1.0 / (2 * K - 2)
    return length * lam ** e + length ** (1.0 - 2.0 / K) * lam ** (-e)


def check_regime(
    derivative: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    spread: float = DEFAULT_SETTINGS.regime_spread,
) -> tuple[float, float]:
    """Sample |f^(k)| on 64 interior points; raise unless min > 0 and max/min <= spread."""
    xs = np.asarray(interior_samples(a, b, 64))
    mags = np.abs(np.asarray(derivative(xs), dtype=np.float64))
    lo, hi = float(mags.min()), float(mags.max())
    if lo == 0.0 or not np.isfinite(hi):
        raise RegimeError("|f^(k)| bounded away from 0", f"min |f^(k)| = {lo}")
    if hi / lo > spread:
        raise RegimeError(f"|f^(k)| varies by at most a factor {spread:g}", f"max/min = {hi / lo:.3g}")
    return lo, hi


def vdc_check(
    phase: Phase,
    a: float,
    b: float,
    k: int,
    lam: float,
    derivative: Optional[Phase] = None,
    settings: Settings = DEFAULT_SETTINGS,
) -> BoundReport:
    """|sum_{a<n<=b} e(f(n))| against (b-a) lam^{1/(2K-2)} + (b-a)^{1-2/K} lam^{-1/(2K-2)}, K = 2^{k-1}.

    Without an explicit `derivative`, |f^(k)| is sampled by a central
    difference quotient for the regime check.
    """
    if k not in (2, 3):
        raise ConstraintViolation("k in {2, 3}", f"k={k}")
    if not b > a:
        raise ConstraintViolation("a < b", f"a={a}, b={b}")
    if not lam > 0.0:
        raise RegimeError("lambda > 0", f"lambda={lam}")
    if derivative is None:
        h = max((b - a) / 1000.0, 1e-3)

        def derivative(x: np.ndarray) -> np.ndarray:
            return finite_difference(phase, x, k, h)

    lo, hi = check_regime(derivative, a, b, settings.regime_spread)
    n = np.arange(math.floor(a) + 1, math.floor(b) + 1, dtype=np.float64)
    lhs = abs(chunked_sum_complex(np.exp(1j * TWO_PI * reduce_phase(phase(n))), settings.chunk_size))
    rhs = vdc_rhs(b - a, k, lam)
    return BoundReport.judge(
        f"vdc-k{k}",
        lhs,
        rhs,
        ConstantPolicy.MEASURED,
        parameters={"a": a, "b": b, "k": k, "lambda": lam, "fk_min": lo, "fk_max": hi},
    )


def weyl_vdc_check(seq: np.ndarray, Q: int, slack: float = 1e-9) -> BoundReport:
    """|sum a(n)|^2 <= (1 + L/Q) sum_{|q|<Q} (1 - |q|/Q) sum_n a(n+q) conj a(n)."""
    if Q < 1:
        raise ConstraintViolation("Q >= 1", f"Q={Q}")
    a = np.asarray(seq, dtype=np.complex128).ravel()
    L = a.size
    lhs = abs(chunked_sum_complex(a)) ** 2
    r0 = float(np.vdot(a, a).real)
    shifted = [(1.0 - q / Q) * np.vdot(a[: L - q], a[q:]).real for q in range(1, min(Q, L))]
    total = math.fsum([r0] + [2.0 * s for s in shifted])
    rhs = (1.0 + L / Q) * max(total, 0.0)
    return BoundReport.judge(
        "weyl-vdc",
        lhs,
        rhs,
        ConstantPolicy.EXACT,
        parameters={"length": L, "Q": Q},
        slack=slack,
    )


class VanDerCorputChecks:
    """Reference phases for the k = 2 and k = 3 tests plus random shift-inequality trials."""

    def __init__(self, settings: Settings = DEFAULT_SETTINGS, seed: int = 0, trials: int = 50) -> None:
        self.settings = settings
        self.seed = seed
        self.trials = trials

    def run_section(self) -> Section:
        s = Section(title="Van der Corput")
        s.extend(self._derivative_tests())
        s.extend(self._shift_inequality())
        return s

    def _derivative_tests(self) -> List[BoundReport]:
        beta = 0.31
        quad = vdc_check(
            lambda x: beta * x * x, 0.0, 1000.0, 2, 2.0 * beta,
            derivative=lambda x: np.full_like(x, 2.0 * beta), settings=self.settings,
        )
        cubic = vdc_check(
            lambda x: 1e-6 * x ** 3, 0.0, 100.0, 3, 6e-6,
            derivative=lambda x: np.full_like(x, 6e-6), settings=self.settings,
        )
        return [quad, cubic]

    def _shift_inequality(self) -> List[BoundReport]:
        rng = np.random.default_rng(self.seed)
        out: List[BoundReport] = []
        for _ in range(self.trials):
            L = int(rng.integers(1, 200))
            a = rng.normal(size=L) + 1j * rng.normal(size=L)
            out.append(weyl_vdc_check(a, int(rng.integers(1, L + 1))))
        return out
