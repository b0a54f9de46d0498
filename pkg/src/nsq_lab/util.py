from __future__ import annotations
import math
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import integrate

TWO_PI = 2.0 * math.pi
DBL_EPS = float(np.finfo(np.float64).eps)


def reduce_phase(theta: np.ndarray | float) -> np.ndarray | float:
    """Return theta - round(theta), the representative in [-1/2, 1/2]."""
    return theta - np.rint(theta)


def neumaier_add(total: float, comp: float, value: float) -> tuple[float, float]:
    t = total + value
    if abs(total) >= abs(value):
        comp += (total - t) + value
    else:
        comp += (value - t) + total
    return t, comp


def compensated_sum(values: Iterable[float]) -> float:
    """Neumaier-compensated sum in the given order."""
    total = 0.0
    comp = 0.0
    for v in values:
        total, comp = neumaier_add(total, comp, float(v))
    return total + comp


def kahan_sum_axis(terms: np.ndarray, axis: int = 0) -> np.ndarray:
    """Vectorized Neumaier summation of `terms` along `axis`.

    Every slice along the other axes is summed in index order, so the result
    does not depend on array layout.
    """
    arr = np.moveaxis(np.asarray(terms), axis, 0)
    total = np.zeros(arr.shape[1:], dtype=arr.dtype)
    comp = np.zeros_like(total)
    for row in arr:
        t = total + row
        big = np.abs(total) >= np.abs(row)
        comp += np.where(big, (total - t) + row, (row - t) + total)
        total = t
    return total + comp


def chunked_sum(values: np.ndarray, chunk_size: int = 4096) -> float:
    """Deterministic sum: exactly rounded per chunk, chunks combined in order."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        return 0.0
    partials = [math.fsum(v[i:i + chunk_size]) for i in range(0, v.size, chunk_size)]
    return compensated_sum(partials)


def chunked_sum_complex(values: np.ndarray, chunk_size: int = 4096) -> complex:
    v = np.asarray(values, dtype=np.complex128).ravel()
    return complex(chunked_sum(v.real, chunk_size), chunked_sum(v.imag, chunk_size))


def finite_difference(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray | float, k: int, h: float
) -> np.ndarray:
    """Central k-th difference quotient of f at x with step h."""
    x = np.asarray(x, dtype=np.float64)
    acc = np.zeros_like(x)
    for j in range(k + 1):
        acc = acc + (-1) ** j * math.comb(k, j) * f(x + (k / 2.0 - j) * h)
    return acc / h ** k


def cosine_series(
    t: np.ndarray,
    coeffs: np.ndarray,
    t_block: int = 512,
    m_block: int = 2048,
) -> np.ndarray:
    """sum_{m=1}^{len(coeffs)} coeffs[m-1] cos(2 pi m t) for every t.

    Work is blocked over both t and m, so memory stays at t_block * m_block.
    Each m block is summed pairwise and the block partials are combined in
    order with compensation.
    """
    tt = np.asarray(t, dtype=np.float64).ravel()
    g = np.asarray(coeffs, dtype=np.float64)
    out = np.zeros(tt.size)
    if g.size == 0 or tt.size == 0:
        return out
    m = np.arange(1, g.size + 1, dtype=np.float64)
    for ts in range(0, tt.size, t_block):
        seg = tt[ts:ts + t_block]
        partials = []
        for ms in range(0, g.size, m_block):
            phase = reduce_phase(np.outer(m[ms:ms + m_block], seg))
            partials.append(np.sum(g[ms:ms + m_block, None] * np.cos(TWO_PI * phase), axis=0))
        out[ts:ts + t_block] = kahan_sum_axis(np.stack(partials), axis=0)
    return out


def panel_count(a: float, b: float, max_freq: float, cycles_per_panel: float) -> int:
    width = cycles_per_panel / max(max_freq, 1e-300)
    return max(1, int(math.ceil((b - a) / width)))


def oscillatory_quad(
    func: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    max_freq: float,
    cycles_per_panel: float = 1.0,
    rel_tol: float = 1e-11,
    limit: int = 200,
) -> tuple[float, float]:
    """Integrate a real oscillatory function over [a, b].

    [a, b] is cut into equal panels at most `cycles_per_panel / max_freq`
    wide. `scipy.integrate.quad_vec` integrates over the panel-local
    offset, with one vectorized call of `func` evaluating every panel at
    once. Returns (integral, error bound).
    """
    if b <= a:
        return 0.0, 0.0
    n = panel_count(a, b, max_freq, cycles_per_panel)
    width = (b - a) / n
    starts = a + width * np.arange(n)

    def panels(u: float) -> np.ndarray:
        return np.asarray(func(starts + u), dtype=np.float64)

    values, err = integrate.quad_vec(panels, 0.0, width, epsrel=rel_tol, norm="max", limit=limit)
    return chunked_sum(np.asarray(values)), float(err) * n


def fit_loglog_slope(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Least-squares slope of log y against log x over positive pairs."""
    pairs = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len(pairs) < 2:
        return float("nan")
    lx = np.log([p[0] for p in pairs])
    ly = np.log([p[1] for p in pairs])
    slope, _ = np.polyfit(lx, ly, 1)
    return float(slope)
