"""Smoothed indicator of the set ||t|| < Y and the band-limited interval minorant.

`CupFunction` is the periodisation of the indicator of [-a, a] convolved r
times with a box of width Delta/r; its cumulative kernel is the Irwin-Hall
distribution, which gives an exact evaluation path independent of the
Fourier series. `SelbergMinorant` is the Beurling-Selberg minorant of the
indicator of [-1, 1] whose transform is supported in [-mu, mu].
"""
from __future__ import annotations
import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.special import binom, factorial, polygamma

from .config import DEFAULT_SETTINGS, Settings
from .core import Y_CEILING, Params
from .errors import ConstraintViolation
from .util import DBL_EPS, TWO_PI, cosine_series, kahan_sum_axis, reduce_phase

log = logging.getLogger("nsq.smoothing")

ArrayLike = Union[float, np.ndarray]


def _out(values: np.ndarray, like: ArrayLike) -> ArrayLike:
    return float(values) if np.ndim(like) == 0 else values


def cup_tail(r: int, Delta: float, order: int) -> float:
    """Bound on sum_{|m| > order} |g(m)|, from |g(m)| <= (1/(pi m)) (r/(pi m Delta))^r."""
    if order <= 0:
        return math.inf
    log_tail = (
        math.log(2.0 / math.pi)
        + r * math.log(r / (math.pi * Delta))
        - r * math.log(order)
        - math.log(r)
    )
    return math.exp(log_tail) if log_tail < 700.0 else math.inf


def _order_for_tail(r: int, Delta: float, tol: float, cap: int) -> int:
    log_m = (math.log(2.0 / math.pi) + r * math.log(r / (math.pi * Delta)) - math.log(r * tol)) / r
    order = max(1, int(math.ceil(math.exp(min(log_m, 50.0)))))
    while order > 1 and cup_tail(r, Delta, order - 1) <= tol:
        order -= 1
    while cup_tail(r, Delta, order) > tol and order < cap:
        order += 1
    return min(order, cap)


@dataclass(frozen=True)
class CupFunction:
    Y: float
    Delta: float
    r: int
    a: float
    M_trunc: int
    tail_bound: float

    def __post_init__(self) -> None:
        if self.r < 1:
            raise ConstraintViolation("r >= 1", f"r={self.r}")
        if not 0.0 < self.Delta < self.Y < Y_CEILING:
            raise ConstraintViolation("0 < Delta < Y < 0.45", f"Y={self.Y}, Delta={self.Delta}")

    @classmethod
    def build(
        cls,
        Y: float,
        r: int,
        Delta: Optional[float] = None,
        M_trunc: Optional[int] = None,
        settings: Settings = DEFAULT_SETTINGS,
    ) -> "CupFunction":
        """Construct the cup for (Y, r); Delta defaults to Y/5.

        Without an explicit `M_trunc` the smallest order whose tail bound is
        at most `settings.cup_tail_tol` is used, capped at
        `settings.max_fourier_order`.
        """
        if r < 1:
            raise ConstraintViolation("r >= 1", f"r={r}")
        Delta = Y / 5.0 if Delta is None else Delta
        if not 0.0 < Delta < Y:
            raise ConstraintViolation("0 < Delta < Y < 0.45", f"Y={Y}, Delta={Delta}")
        if M_trunc is None:
            M_trunc = _order_for_tail(r, Delta, settings.cup_tail_tol, settings.max_fourier_order)
            if cup_tail(r, Delta, M_trunc) > settings.cup_tail_tol:
                log.warning("Fourier order capped at %d; tail %.3g", M_trunc, cup_tail(r, Delta, M_trunc))
        if M_trunc < 0:
            raise ConstraintViolation("M_trunc >= 0", f"M_trunc={M_trunc}")
        return cls(
            Y=Y, Delta=Delta, r=r, a=Y - Delta / 2.0,
            M_trunc=int(M_trunc), tail_bound=cup_tail(r, Delta, M_trunc),
        )

    @classmethod
    def from_params(cls, params: Params, settings: Settings = DEFAULT_SETTINGS) -> "CupFunction":
        return cls.build(params.Y, params.r, params.Delta, settings=settings)

    @property
    def mean(self) -> float:
        return 2.0 * self.a

    @property
    def analysis_order(self) -> int:
        """ceil(r/Delta), the truncation used for V(alpha)."""
        return int(math.ceil(self.r / self.Delta))

    def tail_at(self, order: int) -> float:
        return cup_tail(self.r, self.Delta, order)

    # ---------- Fourier side ----------

    def fourier_coeff(self, m: ArrayLike) -> ArrayLike:
        """g(m) = sin(2 pi m a)/(pi m) * sinc(m Delta/r)^r, g(0) = 2a."""
        mm = np.abs(np.asarray(m, dtype=np.float64))
        two_ma = 2.0 * mm * self.a
        g = 2.0 * self.a * np.sinc(two_ma) * np.sinc(mm * self.Delta / self.r) ** self.r
        integral = (mm != 0) & (np.abs(two_ma - np.rint(two_ma)) <= 4.0 * DBL_EPS * two_ma)
        g = np.where(integral, 0.0, g)
        return _out(g, m)

    def coefficient_bound(self, m: ArrayLike) -> ArrayLike:
        mm = np.abs(np.asarray(m, dtype=np.float64))
        with np.errstate(divide="ignore"):
            base = 1.0 / (math.pi * mm)
            bound = base * np.minimum(1.0, (self.r / (math.pi * mm * self.Delta)) ** self.r)
        return _out(bound, m)

    def coefficients(self, order: Optional[int] = None) -> np.ndarray:
        """g(1), ..., g(order)."""
        order = self.M_trunc if order is None else order
        return np.asarray(self.fourier_coeff(np.arange(1, order + 1)), dtype=np.float64)

    def chi_via_series(self, t: ArrayLike, order: Optional[int] = None) -> ArrayLike:
        """9Y/5 + 2 sum_{m<=order} g(m) cos(2 pi m t)."""
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64)).ravel()
        order = self.M_trunc if order is None else order
        out = self.mean + 2.0 * cosine_series(tt, self.coefficients(order))
        return _out(out.reshape(np.shape(t)) if np.ndim(t) else out[0], t)

    # ---------- exact side ----------

    def kernel_cdf(self, y: np.ndarray) -> np.ndarray:
        """Cumulative distribution of the r-fold box kernel on [-Delta/2, Delta/2]."""
        r = self.r
        x = np.clip(r * np.asarray(y, dtype=np.float64) / self.Delta + r / 2.0, 0.0, float(r))
        upper = x > r / 2.0
        xs = np.where(upper, r - x, x)
        k = np.arange(r + 1, dtype=np.float64)
        coef = ((-1.0) ** k) * binom(r, k) / factorial(r)
        terms = coef[:, None] * np.clip(xs[None, :] - k[:, None], 0.0, None) ** r
        cdf = np.clip(kahan_sum_axis(terms, axis=0), 0.0, 1.0)
        return np.where(upper, 1.0 - cdf, cdf)

    def chi_eval(self, t: ArrayLike) -> ArrayLike:
        """chi(t) in [0, 1], exact piecewise-polynomial evaluation."""
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64)).ravel()
        dist = np.abs(reduce_phase(tt))
        chi = self.kernel_cdf(dist + self.a) - self.kernel_cdf(dist - self.a)
        chi = np.clip(chi, 0.0, 1.0)
        chi[dist <= self.Y - self.Delta] = 1.0
        chi[dist >= self.Y] = 0.0
        return _out(chi.reshape(np.shape(t)) if np.ndim(t) else chi[0], t)


def beurling(z: ArrayLike, k_trunc: int = DEFAULT_SETTINGS.minorant_k_trunc) -> ArrayLike:
    """Beurling's entire function B(z), majorising sgn(z) with transform in [-1, 1]."""
    zz = np.atleast_1d(np.asarray(z, dtype=np.float64))
    out = np.empty_like(zz)
    sin2 = np.sin(np.pi * zz) ** 2 / np.pi ** 2
    near = np.abs(zz) < k_trunc + 1

    zn = zz[near]
    acc = 2.0 * zn * np.sinc(zn) ** 2
    for n in range(-k_trunc, k_trunc + 1):
        acc += (1.0 if n >= 0 else -1.0) * np.sinc(zn - n) ** 2
    acc += sin2[near] * (polygamma(1, k_trunc + 1 - zn) - polygamma(1, k_trunc + 1 + zn))
    out[near] = acc

    pos = ~near & (zz > 0)
    zp = zz[pos]
    out[pos] = 1.0 + sin2[pos] * (2.0 / zp - 2.0 * polygamma(1, 1.0 + zp))
    neg = ~near & (zz < 0)
    zq = zz[neg]
    out[neg] = -1.0 + sin2[neg] * (2.0 / zq + 2.0 * polygamma(1, -zq))
    return _out(out.reshape(np.shape(z)) if np.ndim(z) else out[0], z)


@dataclass(frozen=True)
class SelbergMinorant:
    """A(x) <= indicator of [-1, 1], with A-hat(t) = 0 for |t| >= mu and integral 2 - 1/mu."""

    mu: float = 2.0
    K_trunc: int = DEFAULT_SETTINGS.minorant_k_trunc

    def __post_init__(self) -> None:
        if not self.mu > 0.5:
            raise ConstraintViolation("mu > 1/2", f"mu={self.mu}")
        if self.K_trunc < 1:
            raise ConstraintViolation("K_trunc >= 1", f"K_trunc={self.K_trunc}")

    @property
    def integral(self) -> float:
        return 2.0 - 1.0 / self.mu

    def minorant_eval(self, x: ArrayLike) -> ArrayLike:
        xx = np.asarray(x, dtype=np.float64)
        value = -0.5 * (
            np.asarray(beurling(self.mu * (-1.0 - xx), self.K_trunc))
            + np.asarray(beurling(self.mu * (xx - 1.0), self.K_trunc))
        )
        return _out(value, x)

    def minorant_ft(self, t: ArrayLike) -> ArrayLike:
        """A-hat(t) in closed form; exactly 0 for |t| >= mu."""
        tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
        s = np.abs(tt) / self.mu
        inside = s < 1.0
        out = np.zeros_like(tt)
        si = s[inside]
        ti = tt[inside]
        j = (1.0 - si) * np.cos(np.pi * si) / np.sinc(si) + si
        out[inside] = 2.0 * j * np.sinc(2.0 * ti) - (1.0 - si) * np.cos(TWO_PI * ti) / self.mu
        return _out(out.reshape(np.shape(t)) if np.ndim(t) else out[0], t)

    def envelope(self, x: ArrayLike) -> ArrayLike:
        """Certified |A(x)| bound, valid for |x| > 1 + 1/mu."""
        xx = np.abs(np.asarray(x, dtype=np.float64))
        with np.errstate(divide="ignore"):
            env = 4.0 / (3.0 * np.pi ** 2 * self.mu ** 2 * (xx - 1.0) ** 2)
        return _out(env, x)

    def tail_mass(self, L: float) -> float:
        """Bound on the integral of |A| over |x| > L (L > 1 + 1/mu)."""
        return 8.0 / (3.0 * math.pi ** 2 * self.mu ** 2 * (L - 1.0))

    def window(self, settings: Settings = DEFAULT_SETTINGS) -> float:
        """Half-width L beyond which |A| stays below `minorant_cutoff` * A(0)."""
        if settings.minorant_window is not None:
            return max(float(settings.minorant_window), 1.0 + 1.0 / self.mu)
        peak = float(self.minorant_eval(0.0))
        L = 1.0 + math.sqrt(4.0 / (3.0 * math.pi ** 2 * self.mu ** 2 * settings.minorant_cutoff * peak))
        return max(L, 1.0 + 1.0 / self.mu)
