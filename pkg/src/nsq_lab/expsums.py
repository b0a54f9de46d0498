"""Exponential sums over the primes in (X/2, X]."""
from __future__ import annotations
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_SETTINGS, Settings
from .core import Params, power_c_array, sieve_primes, sqrt_frac_array
from .errors import BudgetExceeded, ConstraintViolation
from .smoothing import CupFunction
from .util import TWO_PI, chunked_sum_complex, cosine_series, reduce_phase

log = logging.getLogger("nsq.expsums")

# float64 columns per entry plus the sieve segment
_BYTES_PER_ENTRY = 6 * 8


class SumKind(str, Enum):
    S = "S"
    U = "U"
    H = "H"
    V = "V"


def _frozen(a: np.ndarray, dtype) -> np.ndarray:
    out = np.array(a, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class PrimeTable:
    """Primes X/2 < p <= X with log p, p^c, frac(sqrt p) and ||sqrt p||."""

    X: float
    c: float
    p: np.ndarray
    logp: np.ndarray
    pc: np.ndarray
    sqrt_frac: np.ndarray
    sqrt_dist: np.ndarray
    chunk_size: int = field(default=DEFAULT_SETTINGS.chunk_size)
    filter_Y: Optional[float] = None

    @classmethod
    def from_primes(
        cls,
        primes: Iterable[int],
        X: float,
        c: float,
        chunk_size: int = DEFAULT_SETTINGS.chunk_size,
    ) -> "PrimeTable":
        p = np.asarray(sorted(set(int(q) for q in primes)), dtype=np.int64)
        frac = sqrt_frac_array(p) if p.size else np.empty(0)
        return cls(
            X=float(X),
            c=float(c),
            p=_frozen(p, np.int64),
            logp=_frozen(np.log(p.astype(np.float64)), np.float64),
            pc=_frozen(power_c_array(p, c), np.float64),
            sqrt_frac=_frozen(frac, np.float64),
            sqrt_dist=_frozen(np.minimum(frac, 1.0 - frac), np.float64),
            chunk_size=chunk_size,
        )

    def __len__(self) -> int:
        return int(self.p.size)

    def restrict(self, keep: np.ndarray, filter_Y: Optional[float] = None) -> "PrimeTable":
        """Sub-table of the entries selected by a boolean mask.

        `filter_Y` records the ||sqrt p|| < Y filter that produced the mask;
        without it the parent's filter, if any, is carried over.
        """
        keep = np.asarray(keep, dtype=bool)
        return PrimeTable(
            X=self.X, c=self.c,
            p=_frozen(self.p[keep], np.int64),
            logp=_frozen(self.logp[keep], np.float64),
            pc=_frozen(self.pc[keep], np.float64),
            sqrt_frac=_frozen(self.sqrt_frac[keep], np.float64),
            sqrt_dist=_frozen(self.sqrt_dist[keep], np.float64),
            chunk_size=self.chunk_size,
            filter_Y=self.filter_Y if filter_Y is None else float(filter_Y),
        )

    def s0(self) -> float:
        return s_alpha(self, 0.0).real


def estimate_table_bytes(X: float) -> int:
    half = X / 2.0
    count = 1.3 * half / max(math.log(max(half, 3.0)), 1.0) + 16
    return int(count * _BYTES_PER_ENTRY)


def build_table(
    params: Params,
    settings: Settings = DEFAULT_SETTINGS,
) -> PrimeTable:
    need = estimate_table_bytes(params.X)
    if need > settings.max_table_bytes:
        raise BudgetExceeded(
            f"prime table for X={params.X:.6g} needs about {need} bytes "
            f"(budget {settings.max_table_bytes})"
        )
    lo = int(math.floor(params.X / 2.0))
    hi = int(math.floor(params.X))
    primes = sieve_primes(lo, hi, settings.segment_size)
    table = PrimeTable.from_primes(primes, params.X, params.c, settings.chunk_size)
    log.debug("built table X=%.6g entries=%d", params.X, len(table))
    return table


# ----------------------- single-point sums -----------------------

def _phase_sum(table: PrimeTable, alpha: float, weights: np.ndarray, shift: Optional[np.ndarray]) -> complex:
    theta = reduce_phase(alpha * table.pc)
    if shift is not None:
        theta = reduce_phase(theta + shift)
    terms = weights * np.exp(1j * TWO_PI * theta)
    return chunked_sum_complex(terms, table.chunk_size)


def cup_weights(table: PrimeTable, cup: CupFunction, m_max: int) -> np.ndarray:
    """w_p = sum_{0<|m|<=m_max} g(m) e(m sqrt p), real since g is even."""
    return 2.0 * cosine_series(table.sqrt_frac, cup.coefficients(m_max))


def sum_weights(
    table: PrimeTable,
    kind: SumKind,
    m: int = 0,
    cup: Optional[CupFunction] = None,
    m_max: Optional[int] = None,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Per-prime amplitude and extra phase so that sum = sum amp_p e(alpha p^c + shift_p)."""
    kind = SumKind(kind)
    if kind is SumKind.S:
        return table.logp, None
    if kind is SumKind.U:
        return table.logp, (None if m == 0 else reduce_phase(m * table.sqrt_frac))
    if cup is None:
        raise ConstraintViolation(f"{kind.value} needs a CupFunction")
    if kind is SumKind.H:
        return table.logp * np.asarray(cup.chi_eval(table.sqrt_frac)), None
    order = cup.analysis_order if m_max is None else m_max
    if order < 1:
        raise ConstraintViolation("m_max >= 1", f"m_max={order}")
    return table.logp * cup_weights(table, cup, order), None


def s_alpha(table: PrimeTable, alpha: float) -> complex:
    """S(alpha) = sum e(alpha p^c) log p."""
    return _phase_sum(table, alpha, table.logp, None)


def u_alpha(table: PrimeTable, alpha: float, m: int) -> complex:
    """U(alpha, m) = sum e(alpha p^c + m sqrt p) log p, with e(m sqrt p) = e(m frac sqrt p)."""
    w, shift = sum_weights(table, SumKind.U, m=m)
    return _phase_sum(table, alpha, w, shift)


def h_alpha(table: PrimeTable, alpha: float, cup: CupFunction) -> complex:
    w, _ = sum_weights(table, SumKind.H, cup=cup)
    return _phase_sum(table, alpha, w, None)


def v_alpha(
    table: PrimeTable, alpha: float, cup: CupFunction, m_max: Optional[int] = None
) -> Tuple[complex, float]:
    """V(alpha) truncated at m_max, and the certified truncation tail S(0) * sum_{|m|>m_max}|g(m)|."""
    order = cup.analysis_order if m_max is None else m_max
    w, _ = sum_weights(table, SumKind.V, cup=cup, m_max=order)
    return _phase_sum(table, alpha, w, None), table.s0() * cup.tail_at(order)


# ----------------------- grids -----------------------

def grid_eval(
    table: PrimeTable,
    kind: SumKind,
    alphas: Sequence[float],
    m: int = 0,
    cup: Optional[CupFunction] = None,
    m_max: Optional[int] = None,
    threads: int = 1,
) -> np.ndarray:
    """Pointwise values over `alphas`; identical bits for any worker count."""
    weights, shift = sum_weights(table, kind, m=m, cup=cup, m_max=m_max)
    alphas = [float(a) for a in alphas]
    if threads <= 1 or len(alphas) < 2:
        values = [_phase_sum(table, a, weights, shift) for a in alphas]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(lambda a: _phase_sum(table, a, weights, shift), alphas))
    return np.asarray(values, dtype=np.complex128)


def block_eval(
    table: PrimeTable,
    alphas: np.ndarray,
    weights: np.ndarray,
    shift: Optional[np.ndarray] = None,
    max_elements: int = 1 << 22,
) -> np.ndarray:
    """Vectorized sum over many alphas at once (matrix product, used by quadrature)."""
    alphas = np.asarray(alphas, dtype=np.float64).ravel()
    out = np.empty(alphas.size, dtype=np.complex128)
    if len(table) == 0:
        out[:] = 0.0
        return out
    step = max(1, max_elements // len(table))
    for start in range(0, alphas.size, step):
        theta = reduce_phase(np.outer(alphas[start:start + step], table.pc))
        if shift is not None:
            theta = reduce_phase(theta + shift[None, :])
        out[start:start + step] = np.exp(1j * TWO_PI * theta) @ weights
    return out
