"""Run parameters and the elementary arithmetic every other module consumes."""
from __future__ import annotations
import logging
import math
from functools import lru_cache
from typing import Dict, Optional

import mpmath
import numpy as np
import sympy
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from .config import DEFAULT_SETTINGS, Settings
from .errors import ConstraintViolation

log = logging.getLogger("nsq.core")

TAU_CEILING = 35.0 / 34.0
Y_EXPONENT = 17.0 / 48.0
Y_CEILING = 0.45
MAX_SIEVE = 1 << 62
_REL_CHECK = 1e-14


def extended_context(dps: int = 30) -> mpmath.ctx_mp.MPContext:
    """A private mpmath context, so precision changes never leak across threads."""
    ctx = mpmath.MPContext()
    ctx.dps = dps
    return ctx


def smoothing_order(X: float) -> int:
    """floor(log X), reading a log within 1e-12 of an integer as that integer."""
    lx = math.log(X)
    k = round(lx)
    return int(k) if abs(lx - k) < 1e-12 else math.floor(lx)


def _close(a: float, b: float, rel: float = _REL_CHECK) -> bool:
    return abs(a - b) <= rel * max(abs(a), abs(b)) + 4 * np.finfo(float).tiny


class Params(BaseModel):
    """All derived constants of one run.

    X = (N/2)^{1/c}, eps = X^{c-tau}, r = floor(log X), Y from the exponent
    formula unless overridden, Delta = Y/5, M = r/Delta, P = mu/eps.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    c: float
    tau: float
    delta: float
    N: float
    X: float
    eps: float
    r: int
    Y: float
    Delta: float
    M: float
    mu: float
    P: float

    @model_validator(mode="after")
    def _consistent(self) -> "Params":
        _check_inputs(self.c, self.tau, self.delta, self.N, self.mu)
        if not _close(self.X, (self.N / 2.0) ** (1.0 / self.c), 1e-12):
            raise ValueError("X != (N/2)^(1/c)")
        if self.r != smoothing_order(self.X):
            raise ValueError("r != floor(log X)")
        if not _close(self.eps, self.X ** (self.c - self.tau)):
            raise ValueError("eps != X^(c-tau)")
        if not (0.0 < self.Y < Y_CEILING):
            raise ValueError("Y < 0.45")
        if not _close(self.Delta, self.Y / 5.0):
            raise ValueError("Delta != Y/5")
        if not _close(self.M, self.r / self.Delta):
            raise ValueError("M != r/Delta")
        if not _close(self.P, self.mu / self.eps):
            raise ValueError("P != mu/eps")
        return self

    @classmethod
    def from_json(cls, text: str) -> "Params":
        try:
            return cls.model_validate_json(text)
        except ValidationError as ve:
            raise ConstraintViolation("Params document", str(ve.errors())) from ve

    def to_json(self) -> str:
        return self.model_dump_json(indent=2)

    def snapshot(self) -> Dict[str, float]:
        return self.model_dump()

    def formula_y(self) -> float:
        """Y as the exponent formula gives it, ignoring any override or clamp."""
        return self.X ** (-Y_EXPONENT * (TAU_CEILING - self.tau) + self.delta)

    def theorem_eps(self) -> float:
        """The statement's own tolerance N^{-(tau-c)/c} log N."""
        return self.N ** (-(self.tau - self.c) / self.c) * math.log(self.N)

    def theorem_y(self) -> float:
        """The statement's own threshold N^{-(17/(48c))(35/34-tau)+delta}."""
        return self.N ** (-(Y_EXPONENT / self.c) * (TAU_CEILING - self.tau) + self.delta)


def _check_inputs(c: float, tau: float, delta: float, N: float, mu: float) -> None:
    if not c > 1.0:
        raise ConstraintViolation("1 < c", f"c={c}")
    if not c < tau:
        raise ConstraintViolation("c < tau", f"c={c}, tau={tau}")
    if not tau < TAU_CEILING:
        raise ConstraintViolation("tau < 35/34", f"tau={tau}")
    if not delta > 0.0:
        raise ConstraintViolation("delta > 0", f"delta={delta}")
    if not mu > 0.5:
        raise ConstraintViolation("mu > 1/2", f"mu={mu}")
    if not N / 2.0 > math.exp(c):
        raise ConstraintViolation("N/2 > e^c", f"N={N}")
    if not (N / 2.0) ** (1.0 / c) > 8.0:
        raise ConstraintViolation("X > 8", f"N={N}")


def derive_params(
    c: float,
    tau: float,
    delta: float,
    N: float,
    mu: float = 2.0,
    Y_override: Optional[float] = None,
    clamp_y: bool = False,
    settings: Settings = DEFAULT_SETTINGS,
) -> Params:
    """Derive every run constant from (c, tau, delta, N, mu).

    A derived Y at or above the ceiling is an error unless `clamp_y` is set,
    in which case it is lowered to `settings.y_clamp`. An override at or
    above the ceiling is always an error.
    """
    _check_inputs(c, tau, delta, N, mu)
    X = (N / 2.0) ** (1.0 / c)
    eps = X ** (c - tau)
    r = smoothing_order(X)
    ceiling = min(settings.y_ceiling, Y_CEILING)
    if Y_override is not None:
        Y = float(Y_override)
        if not 0.0 < Y < ceiling:
            raise ConstraintViolation("Y < 0.45", f"override Y={Y}")
    else:
        Y = X ** (-Y_EXPONENT * (TAU_CEILING - tau) + delta)
        if Y >= ceiling:
            if not clamp_y:
                raise ConstraintViolation("Y < 0.45", f"derived Y={Y:.6g}")
            log.warning("derived Y=%.6g clamped to %.3g", Y, settings.y_clamp)
            Y = settings.y_clamp
    Delta = Y / 5.0
    return Params(
        c=c, tau=tau, delta=delta, N=N, X=X, eps=eps, r=r,
        Y=Y, Delta=Delta, M=r / Delta, mu=mu, P=mu / eps,
    )


# ----------------------- sieving -----------------------

@lru_cache(maxsize=32)
def _base_primes(limit: int) -> tuple[int, ...]:
    if limit < 2:
        return ()
    is_prime = np.ones(limit + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if is_prime[p]:
            is_prime[p * p::p] = False
    return tuple(np.flatnonzero(is_prime).tolist())


def sieve_primes(lo: int, hi: int, segment_size: int = DEFAULT_SETTINGS.segment_size) -> np.ndarray:
    """Primes p with lo < p <= hi, increasing, by a segmented sieve."""
    if lo < 0 or hi <= lo:
        raise ConstraintViolation("0 <= lo < hi", f"lo={lo}, hi={hi}")
    if hi > MAX_SIEVE:
        raise OverflowError(f"hi={hi} exceeds the sieving range 2^62")
    base = _base_primes(math.isqrt(hi))
    parts = []
    start = lo + 1
    while start <= hi:
        stop = min(start + segment_size, hi + 1)
        mask = np.ones(stop - start, dtype=bool)
        if start < 2:
            mask[: 2 - start] = False
        for p in base:
            pp = p * p
            if pp >= stop:
                break
            first = max(pp, -(-start // p) * p)
            mask[first - start::p] = False
        parts.append(np.flatnonzero(mask).astype(np.int64) + start)
        start = stop
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


# ----------------------- arithmetic functions -----------------------

def factorize(n: int) -> Dict[int, int]:
    """Prime factorisation {p: e} of n >= 1."""
    if n < 1:
        raise ConstraintViolation("n >= 1", f"n={n}")
    return {int(p): int(e) for p, e in sympy.factorint(int(n)).items()}


def mangoldt(n: int) -> float:
    fac = factorize(n)
    if len(fac) != 1:
        return 0.0
    (p,) = fac
    return math.log(p)


def mobius(n: int) -> int:
    fac = factorize(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def divisor_count(n: int) -> int:
    if n < 1:
        raise ConstraintViolation("n >= 1", f"n={n}")
    return int(sympy.divisor_count(int(n)))


def mobius_table(n_max: int) -> np.ndarray:
    """mu(n) for 0 <= n <= n_max (entry 0 unused)."""
    mu = np.ones(n_max + 1, dtype=np.int64)
    mu[0] = 0
    for p in sieve_primes(1, max(n_max, 2)).tolist() if n_max >= 2 else []:
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu


def mangoldt_table(n_max: int) -> np.ndarray:
    """Lambda(n) for 0 <= n <= n_max."""
    lam = np.zeros(n_max + 1, dtype=np.float64)
    if n_max < 2:
        return lam
    for p in sieve_primes(1, n_max).tolist():
        log_p = math.log(p)
        pk = p
        while pk <= n_max:
            lam[pk] = log_p
            pk *= p
    return lam


def divisor_count_table(n_max: int) -> np.ndarray:
    tau = np.zeros(n_max + 1, dtype=np.int64)
    for d in range(1, n_max + 1):
        tau[d::d] += 1
    return tau


# ----------------------- square roots and powers -----------------------

_HALF_BAND = 1e-6


def sqrt_frac(n: int, dps: int = DEFAULT_SETTINGS.extended_dps) -> float:
    """Fractional part of sqrt(n).

    Uses (n - s^2)/(sqrt(n) + s) with s = isqrt(n), which has no cancellation;
    values within 1e-6 of 1/2 are recomputed in extended precision.
    """
    if n < 1:
        raise ConstraintViolation("n >= 1", f"n={n}")
    s = math.isqrt(n)
    rem = n - s * s
    if rem == 0:
        return 0.0
    frac = rem / (math.sqrt(n) + s)
    if abs(frac - 0.5) < _HALF_BAND:
        ctx = extended_context(dps)
        frac = float(ctx.sqrt(n) - s)
    return frac


def sqrt_distance(n: int, dps: int = DEFAULT_SETTINGS.extended_dps) -> float:
    """||sqrt(n)||, the distance from sqrt(n) to the nearest integer."""
    frac = sqrt_frac(n, dps)
    return min(frac, 1.0 - frac)


def sqrt_frac_array(n: np.ndarray, dps: int = DEFAULT_SETTINGS.extended_dps) -> np.ndarray:
    """Vectorized `sqrt_frac` for positive integer arrays below 2^52."""
    n = np.asarray(n, dtype=np.int64)
    root = np.sqrt(n.astype(np.float64))
    s = np.floor(root).astype(np.int64)
    s -= (s * s > n).astype(np.int64)
    s += ((s + 1) * (s + 1) <= n).astype(np.int64)
    frac = (n - s * s).astype(np.float64) / (root + s)
    for i in np.flatnonzero(np.abs(frac - 0.5) < _HALF_BAND):
        frac[i] = sqrt_frac(int(n[i]), dps)
    return frac


def power_c(n: int, c: float) -> float:
    """n^c in double precision (libm pow, within 1 ulp)."""
    if n < 1 or not c > 0.0:
        raise ConstraintViolation("n >= 1 and c > 0", f"n={n}, c={c}")
    try:
        return math.pow(float(n), c)
    except OverflowError as oe:
        raise OverflowError(f"{n}^{c} exceeds the double range") from oe


def power_c_mp(n: int, c: float, dps: int = DEFAULT_SETTINGS.extended_dps) -> mpmath.mpf:
    """n^c with c read exactly from its double, at `dps` digits."""
    ctx = extended_context(dps)
    return ctx.power(ctx.mpf(int(n)), ctx.mpf(c))


def power_c_array(n: np.ndarray, c: float) -> np.ndarray:
    with np.errstate(over="raise"):
        try:
            return np.power(np.asarray(n, dtype=np.float64), c)
        except FloatingPointError as fe:
            raise OverflowError("n^c exceeds the double range") from fe
