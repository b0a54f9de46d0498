"""Derivatives of f(d, l) = alpha (dl)^c + m sqrt(dl) and which term dominates."""
from __future__ import annotations
import math
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ..errors import ConstraintViolation

ALPHA_DOMINANT_RATIO = 10.0
SQRT_DOMINANT_RATIO = 0.1


class Dominance(str, Enum):
    ALPHA = "alpha-dominant"
    SQRT = "sqrt-dominant"
    MIXED = "mixed"


@dataclass(frozen=True)
class PhaseProbe:
    alpha: float
    m: int
    d: int
    c: float
    l_lo: float
    l_hi: float
    q: int = 0

    def __post_init__(self) -> None:
        if self.d < 1:
            raise ConstraintViolation("d >= 1", f"d={self.d}")
        if not 0.0 < self.l_lo < self.l_hi:
            raise ConstraintViolation("0 < l_lo < l_hi", f"l=({self.l_lo}, {self.l_hi}]")

    @property
    def l_mid(self) -> float:
        return 0.5 * (self.l_lo + self.l_hi)

    def phase(self, l, d: Optional[int] = None):
        n = (self.d if d is None else d) * np.asarray(l, dtype=np.float64)
        return self.alpha * n ** self.c + self.m * np.sqrt(n)

    def gamma1(self, l, d: Optional[int] = None):
        d = self.d if d is None else d
        n = d * np.asarray(l, dtype=np.float64)
        return d * d * self.alpha * self.c * (self.c - 1.0) * n ** (self.c - 2.0)

    def gamma2(self, l, d: Optional[int] = None):
        d = self.d if d is None else d
        n = d * np.asarray(l, dtype=np.float64)
        return 0.25 * self.m * d * d * n ** -1.5

    def second(self, l, d: Optional[int] = None):
        """d^2 f / dl^2 = gamma1 - gamma2."""
        return self.gamma1(l, d) - self.gamma2(l, d)

    def third(self, l, d: Optional[int] = None):
        d = self.d if d is None else d
        n = d * np.asarray(l, dtype=np.float64)
        c = self.c
        return d ** 3 * (self.alpha * c * (c - 1.0) * (c - 2.0) * n ** (c - 3.0) + 0.375 * self.m * n ** -2.5)

    def shifted_second(self, l):
        """Second l-derivative of g(l) = f(d+q, l) - f(d, l)."""
        return self.second(l, self.d + self.q) - self.second(l)

    def shifted_third(self, l):
        return self.third(l, self.d + self.q) - self.third(l)

    def curvature_residual(self, l) -> float:
        """(c-2) f'' - l f''' - ((1-2c)/8) m d^2 (dl)^{-3/2}; zero in exact arithmetic."""
        n = self.d * float(l)
        target = (1.0 - 2.0 * self.c) / 8.0 * self.m * self.d ** 2 * n ** -1.5
        return float((self.c - 2.0) * self.second(l) - l * self.third(l) - target)

    def third_derivative_root(self) -> Optional[float]:
        """The l in (l_lo, l_hi] where f''' vanishes, if any."""
        denom = 8.0 * self.alpha * self.c * (self.c - 1.0) * (self.c - 2.0)
        if denom == 0.0 or self.m == 0:
            return None
        base = -3.0 * self.m / denom
        if base <= 0.0:
            return None
        l = base ** (1.0 / (self.c - 0.5)) / self.d
        return l if self.l_lo < l <= self.l_hi else None


@dataclass(frozen=True)
class PhaseRegime:
    gamma1: float
    gamma2: float
    ratio: float
    dominance: Dominance
    third: float
    shifted_second: float
    curvature_residual: float
    third_root: Optional[float]

    def as_dict(self) -> Dict[str, Any]:
        out = asdict(self)
        out["dominance"] = self.dominance.value
        return out


def classify(ratio: float) -> Dominance:
    if ratio >= ALPHA_DOMINANT_RATIO:
        return Dominance.ALPHA
    if ratio <= SQRT_DOMINANT_RATIO:
        return Dominance.SQRT
    return Dominance.MIXED


def phase_regime(probe: PhaseProbe) -> PhaseRegime:
    """|gamma1/gamma2| at the middle of the l-range and the resulting class."""
    l = probe.l_mid
    g1 = float(probe.gamma1(l))
    g2 = float(probe.gamma2(l))
    if g2 == 0.0:
        ratio = 0.0 if g1 == 0.0 else math.inf
    else:
        ratio = abs(g1 / g2)
    return PhaseRegime(
        gamma1=g1,
        gamma2=g2,
        ratio=ratio,
        dominance=classify(ratio),
        third=float(probe.third(l)),
        shifted_second=float(probe.shifted_second(l)),
        curvature_residual=probe.curvature_residual(l),
        third_root=probe.third_derivative_root(),
    )
