"""Prime triples with |p1^c + p2^c + p3^c - N| < eps and the counting integrals.

All triple sums are enumerated the same way: the table is sorted by p (so p^c
is increasing), and for each ordered pair (p1, p2) the admissible p3 form a
contiguous run found by binary search. Candidates within the adjudication
band of the window edge are decided in extended precision and flagged.
"""
from __future__ import annotations
import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .config import DEFAULT_SETTINGS, Settings
from .core import Params, derive_params, extended_context
from .errors import ConstraintViolation, VerificationFailure
from .expsums import PrimeTable, SumKind, block_eval, build_table, grid_eval, sum_weights
from .checks.mean_square import pair_integral
from .checks.vmax import symmetric_grid
from .models import BoundReport, ConstantPolicy
from .smoothing import CupFunction, SelbergMinorant
from .util import compensated_sum, fit_loglog_slope, oscillatory_quad

log = logging.getLogger("nsq.solver")

_P1_CHUNK = 64
_Y_BAND = 1e-12

Triple = Tuple[int, int, int]


@dataclass
class TripleReport:
    triples: List[Triple]
    sums: List[float]
    gamma: float
    count: int
    N: float
    eps: float
    Y: float
    c: float
    params: Dict[str, Any] = field(default_factory=dict)
    boundary_flags: List[Triple] = field(default_factory=list)
    count_only: bool = False
    filtered_primes: int = 0
    verified: int = 0

    def deviations(self) -> List[float]:
        return [s - self.N for s in self.sums]

    def summary(self) -> Dict[str, Any]:
        return {
            "gamma": self.gamma,
            "ordered_triples": self.count,
            "unordered_triples": None if self.count_only else len(unordered_counts(self)),
            "count_only": self.count_only,
            "filtered_primes": self.filtered_primes,
            "verified_triples": self.verified,
            "boundary_flags": [list(t) for t in self.boundary_flags],
            "N": self.N,
            "eps": self.eps,
            "Y": self.Y,
        }


@dataclass
class WindowSum:
    """A triple sum of p-weights times eps^-1 A((sum p^c - N)/eps) over a window."""

    value: float
    positive: float
    negative: float
    window: float
    truncation: float
    terms: int
    gamma: float
    eps: float

    def as_dict(self) -> Dict[str, Any]:
        return dict(self.__dict__)


# ----------------------- enumeration -----------------------

def y_filter(table: PrimeTable, Y: float, dps: int = DEFAULT_SETTINGS.extended_dps) -> np.ndarray:
    """Mask of ||sqrt p|| < Y, with entries at the edge decided in extended precision."""
    mask = table.sqrt_dist < Y
    edge = np.flatnonzero(np.abs(table.sqrt_dist - Y) <= _Y_BAND)
    if edge.size:
        ctx = extended_context(dps)
        for i in edge:
            root = ctx.sqrt(int(table.p[i]))
            dist = abs(root - ctx.nint(root))
            mask[i] = bool(dist < ctx.mpf(Y))
    return mask


def _exact_deviation(triple: Triple, c: float, N: float, dps: int):
    ctx = extended_context(dps)
    cc = ctx.mpf(c)
    total = ctx.fsum(ctx.power(ctx.mpf(p), cc) for p in triple)
    return ctx, total - ctx.mpf(N)


def inside_exact(triple: Triple, c: float, N: float, eps: float, dps: int = DEFAULT_SETTINGS.extended_dps) -> bool:
    ctx, dev = _exact_deviation(triple, c, N, dps)
    return bool(abs(dev) < ctx.mpf(eps))


@dataclass
class _Chunk:
    i: np.ndarray
    j: np.ndarray
    k: np.ndarray
    dev: np.ndarray


def _window_chunk(pc: np.ndarray, N: float, half: float, rows: range) -> _Chunk:
    """All (i, j, k) with i in rows and |pc_i + pc_j + pc_k - N| <= half."""
    n = pc.size
    parts_i, parts_j, parts_k = [], [], []
    for i in rows:
        s = pc[i] + pc
        k_lo = np.searchsorted(pc, (N - half) - s, side="left")
        k_hi = np.searchsorted(pc, (N + half) - s, side="right")
        counts = np.maximum(k_hi - k_lo, 0)
        total = int(counts.sum())
        if total == 0:
            continue
        j = np.repeat(np.arange(n), counts)
        offsets = np.repeat(np.cumsum(counts) - counts, counts)
        k = k_lo[j] + (np.arange(total) - offsets)
        parts_i.append(np.full(total, i, dtype=np.int64))
        parts_j.append(j)
        parts_k.append(k)
    if not parts_i:
        empty = np.empty(0, dtype=np.int64)
        return _Chunk(empty, empty, empty, np.empty(0))
    i_all = np.concatenate(parts_i)
    j_all = np.concatenate(parts_j)
    k_all = np.concatenate(parts_k)
    dev = (pc[i_all] + pc[j_all]) + pc[k_all] - N
    return _Chunk(i_all, j_all, k_all, dev)


def _map_chunks(n: int, fn: Callable[[range], Any], threads: int) -> List[Any]:
    rows = [range(s, min(s + _P1_CHUNK, n)) for s in range(0, n, _P1_CHUNK)]
    if threads <= 1 or len(rows) < 2:
        return [fn(r) for r in rows]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, rows))


# ----------------------- triples -----------------------

def find_triples(
    table: PrimeTable,
    N: float,
    eps: float,
    Y: float,
    settings: Settings = DEFAULT_SETTINGS,
    params: Optional[Params] = None,
    budget: Optional[int] = None,
) -> TripleReport:
    """Ordered triples of table primes with ||sqrt p_i|| < Y and |sum p_i^c - N| < eps."""
    if not eps > 0.0:
        raise ConstraintViolation("eps > 0", f"eps={eps}")
    if not 0.0 < Y < settings.y_ceiling:
        raise ConstraintViolation("Y < 0.45", f"Y={Y}")
    budget = settings.triple_budget if budget is None else budget
    sub = table.restrict(y_filter(table, Y, settings.extended_dps), filter_Y=Y)
    report = TripleReport(
        triples=[], sums=[], gamma=0.0, count=0, N=N, eps=eps, Y=Y, c=table.c,
        params=params.snapshot() if params is not None else {}, filtered_primes=len(sub),
    )
    if len(sub) == 0:
        log.warning("no prime in (%.6g, %.6g] has ||sqrt p|| < %.6g", table.X / 2.0, table.X, Y)
        return report

    band = settings.adjudication_rel * abs(N)
    pc, p, logp = sub.pc, sub.p, sub.logp
    dps = settings.extended_dps

    def work(rows: range):
        ch = _window_chunk(pc, N, eps + band, rows)
        keep = np.abs(ch.dev) < eps - band
        edge = np.flatnonzero(~keep & (np.abs(ch.dev) <= eps + band))
        flags: List[Triple] = []
        for e in edge:
            t = (int(p[ch.i[e]]), int(p[ch.j[e]]), int(p[ch.k[e]]))
            if inside_exact(t, table.c, N, eps, dps):
                keep[e] = True
            flags.append(t)
        sel = np.flatnonzero(keep)
        weights = logp[ch.i[sel]] * logp[ch.j[sel]] * logp[ch.k[sel]]
        partial = math.fsum(weights.tolist())
        if sel.size > budget:
            return sel.size, partial, None, None, flags
        trip = np.stack([p[ch.i[sel]], p[ch.j[sel]], p[ch.k[sel]]], axis=1)
        return sel.size, partial, trip, ch.dev[sel] + N, flags

    results = _map_chunks(len(sub), work, settings.threads)
    partials = []
    stored = 0
    for count, partial, trip, sums, flags in results:
        report.count += count
        partials.append(partial)
        report.boundary_flags.extend(flags)
        if report.count_only:
            continue
        if trip is None or stored + count > budget:
            report.count_only = True
            report.triples.clear()
            report.sums.clear()
            continue
        report.triples.extend((int(a), int(b), int(c)) for a, b, c in trip.tolist())
        report.sums.extend(float(s) for s in sums)
        stored += count
    report.gamma = compensated_sum(partials)
    if report.count_only:
        log.warning("more than %d triples; reporting counts only", budget)
    else:
        _verify(report, settings)
    log.info("N=%.6g eps=%.4g Y=%.4g: %d ordered triples, gamma=%.6g", N, eps, Y, report.count, report.gamma)
    return report


def gamma_weight(report: TripleReport) -> float:
    """Sum over the listed ordered triples of log p1 log p2 log p3."""
    if report.count_only:
        return report.gamma
    return math.fsum(math.log(a) * math.log(b) * math.log(c) for a, b, c in report.triples)


def orderings(triple: Triple) -> int:
    """Number of distinct orderings of a multiset triple: 6, 3 or 1."""
    return math.factorial(3) // math.prod(math.factorial(k) for k in Counter(triple).values())


def unordered_counts(report: TripleReport) -> Dict[Triple, int]:
    counts: Dict[Triple, int] = {}
    for t in report.triples:
        key = tuple(sorted(t))
        counts[key] = counts.get(key, 0) + 1
    return counts


def check_permutation_closure(report: TripleReport) -> None:
    """Each unordered solution must appear in all of its distinct orderings."""
    for key, seen in unordered_counts(report).items():
        if seen != orderings(key):
            raise VerificationFailure(f"triple {key} listed {seen} times, expected {orderings(key)}")


def verify_report(
    report: TripleReport,
    dps: int = DEFAULT_SETTINGS.extended_dps,
    triples: Optional[Sequence[Triple]] = None,
) -> List[Triple]:
    """Triples failing the extended-precision re-check (empty when all hold).

    Checks `triples` when given, otherwise every listed triple.
    """
    ctx = extended_context(dps)
    near: Dict[int, bool] = {}
    bad = []
    for t in report.triples if triples is None else triples:
        if not inside_exact(t, report.c, report.N, report.eps, dps):
            bad.append(t)
            continue
        for q in t:
            if q not in near:
                root = ctx.sqrt(q)
                near[q] = bool(abs(root - ctx.nint(root)) < ctx.mpf(report.Y))
            if not near[q]:
                bad.append(t)
                break
    return bad


def _verify(report: TripleReport, settings: Settings) -> None:
    """Permutation closure plus the extended-precision re-check.

    Above `settings.verify_limit` triples only an evenly strided sample and
    the boundary-flagged triples are re-checked.
    """
    check_permutation_closure(report)
    listed = report.triples
    if len(listed) <= settings.verify_limit:
        chosen: List[Triple] = list(listed)
    else:
        stride = -(-len(listed) // settings.verify_limit)
        kept = set(listed)
        chosen = listed[::stride] + [t for t in report.boundary_flags if t in kept]
    bad = verify_report(report, settings.extended_dps, chosen)
    if bad:
        raise VerificationFailure(f"{len(bad)} reported triples fail the exact re-check, first {bad[0]}")
    report.verified = len(chosen)
    log.debug("re-verified %d of %d triples", len(chosen), len(listed))


# ----------------------- counting integrals -----------------------

def _window_sum(
    table: PrimeTable,
    weights: np.ndarray,
    minorant: SelbergMinorant,
    params: Params,
    settings: Settings,
    eps: Optional[float] = None,
) -> WindowSum:
    eps = params.eps if eps is None else eps
    if not eps > 0.0:
        raise ConstraintViolation("eps > 0", f"eps={eps}")
    L = minorant.window(settings)
    nz = weights != 0.0
    sub = table.restrict(nz)
    w = weights[nz]
    total_w = float(np.sum(np.abs(w)))
    trunc = total_w ** 3 * float(minorant.envelope(L)) / eps
    if len(sub) == 0:
        return WindowSum(0.0, 0.0, 0.0, L, trunc, 0, 0.0, eps)
    pc, logp = sub.pc, sub.logp
    N = params.N

    def work(rows: range):
        ch = _window_chunk(pc, N, eps * L, rows)
        a = np.asarray(minorant.minorant_eval(ch.dev / eps), dtype=np.float64)
        terms = w[ch.i] * w[ch.j] * w[ch.k] * a / eps
        inside = np.abs(ch.dev) < eps
        logs = logp[ch.i[inside]] * logp[ch.j[inside]] * logp[ch.k[inside]]
        return (
            math.fsum(terms[terms > 0].tolist()),
            math.fsum(terms[terms < 0].tolist()),
            int(terms.size),
            math.fsum(logs.tolist()),
        )

    results = _map_chunks(len(sub), work, settings.threads)
    pos = compensated_sum(r[0] for r in results)
    neg = compensated_sum(r[1] for r in results)
    return WindowSum(
        value=pos + neg,
        positive=pos,
        negative=neg,
        window=L,
        truncation=trunc,
        terms=sum(r[2] for r in results),
        gamma=compensated_sum(r[3] for r in results),
        eps=eps,
    )


def i1_direct(
    table: PrimeTable,
    cup: CupFunction,
    minorant: SelbergMinorant,
    params: Params,
    settings: Settings = DEFAULT_SETTINGS,
    eps: Optional[float] = None,
) -> WindowSum:
    """I1 = sum prod chi(sqrt p_j) log p_j eps^-1 A((sum p_j^c - N)/eps), checked against eps^-1 Gamma.

    `gamma` on the result is Gamma(X) over the primes with chi > 0, i.e.
    ||sqrt p|| < Y.
    """
    chi = np.asarray(cup.chi_eval(table.sqrt_frac), dtype=np.float64)
    result = _window_sum(table, chi * table.logp, minorant, params, settings, eps)
    bound = result.gamma / result.eps + result.truncation
    if result.value > bound * (1.0 + 1e-12):
        raise VerificationFailure(f"I1={result.value!r} exceeds eps^-1 Gamma + truncation = {bound!r}")
    return result


def i_direct(
    table: PrimeTable,
    minorant: SelbergMinorant,
    params: Params,
    settings: Settings = DEFAULT_SETTINGS,
    eps: Optional[float] = None,
) -> WindowSum:
    """I, the same window sum with chi = 1."""
    return _window_sum(table, np.array(table.logp, dtype=np.float64), minorant, params, settings, eps)


def i_quadrature(
    table: PrimeTable,
    minorant: SelbergMinorant,
    params: Params,
    settings: Settings = DEFAULT_SETTINGS,
) -> Tuple[float, float]:
    """I as the integral of S(alpha)^3 e(-N alpha) A-hat(eps alpha) over [-P, P]."""
    w, _ = sum_weights(table, SumKind.S)
    P = params.P
    spread = max(abs(3.0 * float(table.pc.min()) - params.N), abs(3.0 * float(table.pc.max()) - params.N))
    max_freq = max(spread, 1.0 / P)

    def integrand(alpha: np.ndarray) -> np.ndarray:
        s = block_eval(table, alpha, w)
        twist = np.exp(-2j * np.pi * ((alpha * params.N) - np.rint(alpha * params.N)))
        return np.real(s ** 3 * twist) * np.asarray(minorant.minorant_ft(params.eps * alpha))

    value, err = oscillatory_quad(
        integrand, 0.0, P, max_freq,
        cycles_per_panel=settings.quad_panel_cycles, rel_tol=settings.quad_rel_tol,
    )
    # integrand is conjugate-symmetric in alpha
    return 2.0 * value, 2.0 * err


def main_term_split(
    table: PrimeTable,
    cup: CupFunction,
    minorant: SelbergMinorant,
    params: Params,
    grid_points: int = 257,
    settings: Settings = DEFAULT_SETTINGS,
) -> BoundReport:
    """|I1 - (9Y/5)^3 I| against the cross-term envelopes built from max|V|, int|S|^2, int|V|^2."""
    i1 = i1_direct(table, cup, minorant, params, settings)
    i_all = i_direct(table, minorant, params, settings)
    k = cup.mean
    P = params.P
    w_s, _ = sum_weights(table, SumKind.S)
    w_v, _ = sum_weights(table, SumKind.V, cup=cup, m_max=cup.M_trunc)
    s2 = pair_integral(table.pc, w_s, P)
    v2 = pair_integral(table.pc, w_v, P)
    alphas = symmetric_grid(P, grid_points)
    vmax = float(np.max(np.abs(grid_eval(table, SumKind.V, alphas, cup=cup, m_max=cup.M_trunc,
                                         threads=settings.threads))))
    ahat = float(np.max(np.abs(minorant.minorant_ft(np.linspace(0.0, minorant.mu, 1025)))))
    env = (
        3.0 * k * k * vmax * s2,
        3.0 * k * vmax * math.sqrt(s2 * v2),
        vmax * v2,
    )
    lhs = abs(i1.value - k ** 3 * i_all.value)
    rhs = ahat * math.fsum(env) + i1.truncation + k ** 3 * i_all.truncation
    return BoundReport.judge(
        "main-term-split",
        lhs,
        rhs,
        ConstantPolicy.MEASURED,
        parameters={
            "X": table.X,
            "I1": i1.value,
            "I": i_all.value,
            "mean": k,
            "max_V": vmax,
            "int_S2": s2,
            "int_V2": v2,
            "env_S2": env[0],
            "env_SV": env[1],
            "env_V2": env[2],
        },
    )


# ----------------------- scaling -----------------------

class YMode(str, Enum):
    FORMULA = "formula"
    FIXED = "fixed"


@dataclass(frozen=True)
class ScalingRow:
    X: float
    eps: float
    Y: float
    gamma: float
    predictor: float
    ratio: float
    triples: int
    i1_ratio: Optional[float] = None


@dataclass
class ScalingStudy:
    rows: List[ScalingRow]
    slope: float
    predictor_slope: float

    def spread(self) -> float:
        ratios = [r.ratio for r in self.rows if r.ratio > 0]
        return max(ratios) / min(ratios) if ratios else math.inf


def scaling_study(
    c: float,
    tau: float,
    delta: float,
    mu: float,
    N_grid: Sequence[float],
    y_mode: YMode = YMode.FIXED,
    Y0: Optional[float] = None,
    eps_override: Optional[float] = None,
    with_integrals: bool = False,
    settings: Settings = DEFAULT_SETTINGS,
) -> ScalingStudy:
    """Gamma(X) against eps Y^3 X^{3-c} over a grid of N, with fitted log-log slopes."""
    if len(N_grid) < 4:
        raise ConstraintViolation("at least 4 grid points", f"got {len(N_grid)}")
    y_mode = YMode(y_mode)
    if y_mode is YMode.FIXED and Y0 is None:
        raise ConstraintViolation("fixed Y mode needs Y0")
    rows: List[ScalingRow] = []
    for N in N_grid:
        params = derive_params(
            c, tau, delta, N, mu,
            Y_override=Y0 if y_mode is YMode.FIXED else None,
            clamp_y=y_mode is YMode.FORMULA,
            settings=settings,
        )
        eps = params.eps if eps_override is None else eps_override
        table = build_table(params, settings=settings)
        report = find_triples(table, params.N, eps, params.Y, settings, params)
        predictor = eps * params.Y ** 3 * params.X ** (3.0 - c)
        i1_ratio = None
        if with_integrals:
            cup = CupFunction.from_params(params, settings)
            i1 = i1_direct(table, cup, SelbergMinorant(mu, settings.minorant_k_trunc), params, settings, eps)
            i1_ratio = i1.value / (params.Y ** 3 * params.X ** (3.0 - c))
        rows.append(ScalingRow(
            X=params.X, eps=eps, Y=params.Y, gamma=report.gamma, predictor=predictor,
            ratio=report.gamma / predictor, triples=report.count, i1_ratio=i1_ratio,
        ))
    xs = [r.X for r in rows]
    return ScalingStudy(
        rows=rows,
        slope=fit_loglog_slope(xs, [r.gamma for r in rows]),
        predictor_slope=fit_loglog_slope(xs, [r.predictor for r in rows]),
    )
