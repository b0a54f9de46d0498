from __future__ import annotations
import logging
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, Any, Dict, Iterator, List, Optional

import numpy as np
import typer
from rich.console import Console

from .artifacts import ArtifactWriter
from .config_service import RunConfig, load_run_config
from .core import sieve_primes
from .errors import LabError
from .expsums import SumKind, build_table, grid_eval, u_alpha
from .models import Section
from .reporter import Reporter
from .smoothing import CupFunction, SelbergMinorant
from .solver import (
    YMode,
    find_triples,
    i1_direct,
    i_direct,
    scaling_study,
    unordered_counts,
)
from .suites.all import BoundSuite
from .vaughan import decompose, u2_envelope, verify_against_u

app = typer.Typer(add_completion=False, no_args_is_help=True)

log = logging.getLogger("nsq.cli")

ConfigOpt = Annotated[Optional[Path], typer.Option("--config", help="JSON run config; flags override it.")]
COpt = Annotated[Optional[float], typer.Option("--c", help="Exponent c in (1, 35/34).")]
TauOpt = Annotated[Optional[float], typer.Option("--tau")]
DeltaOpt = Annotated[Optional[float], typer.Option("--delta")]
NOpt = Annotated[Optional[float], typer.Option("--N", help="Target N.")]
XOpt = Annotated[Optional[float], typer.Option("--X", help="Range top X; N = 2 X^c.")]
MuOpt = Annotated[Optional[float], typer.Option("--mu", help="Support of the minorant transform.")]
YOpt = Annotated[Optional[float], typer.Option("--Y", help="Fix Y instead of the exponent formula.")]
ClampOpt = Annotated[Optional[bool], typer.Option("--clamp-y/--no-clamp-y", help="Lower a derived Y >= 0.45 to 0.4.")]
EpsOpt = Annotated[Optional[float], typer.Option("--eps-override", help="Use this eps instead of X^(c-tau).")]
ThreadsOpt = Annotated[Optional[int], typer.Option("--threads", min=1)]
OutOpt = Annotated[Optional[str], typer.Option("--out", help="Artifact directory; stdout when absent.")]
FormatOpt = Annotated[Optional[str], typer.Option("--format", help="csv or json.")]
PointsOpt = Annotated[Optional[int], typer.Option("--points", min=1)]


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging.")) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
        force=True,
    )


def _reporter() -> Reporter:
    return Reporter(Console(stderr=True))


@contextmanager
def _guard(reporter: Reporter) -> Iterator[None]:
    try:
        yield
    except LabError as e:
        reporter.error(str(e))
        raise typer.Exit(code=e.exit_code)
    except OverflowError as e:
        reporter.error(f"numeric range exceeded: {e}")
        raise typer.Exit(code=2)


def _config(config: Optional[Path], **flags: Any) -> RunConfig:
    return load_run_config(config, flags)


def _emit(writer: ArtifactWriter, text: str) -> None:
    if writer.out is None:
        typer.echo(text, nl=False)


@app.command("params")
def params_cmd(
    config: ConfigOpt = None, c: COpt = None, tau: TauOpt = None, delta: DeltaOpt = None,
    N: NOpt = None, X: XOpt = None, mu: MuOpt = None, Y: YOpt = None, clamp_y: ClampOpt = None,
    out: OutOpt = None,
):
    """Derive and print every run constant."""
    reporter = _reporter()
    with _guard(reporter):
        cfg = _config(config, c=c, tau=tau, delta=delta, N=N, X=X, mu=mu, Y=Y, clamp_y=clamp_y, out=out)
        params = cfg.params(cfg.settings())
        cup = CupFunction.from_params(params)
        derived = {
            "formula_y": params.formula_y(),
            "theorem_eps": params.theorem_eps(),
            "theorem_y": params.theorem_y(),
            "analysis_order": cup.analysis_order,
            "fourier_truncation": cup.M_trunc,
            "fourier_tail": cup.tail_bound,
        }
        reporter.mapping("Params", {**params.snapshot(), **derived})
        writer = ArtifactWriter(cfg.out, params.snapshot())
        _emit(writer, writer.document("params", {"derived": derived}))


@app.command("sieve")
def sieve_cmd(
    lo: int = typer.Option(..., "--lo", help="Exclusive lower end."),
    hi: int = typer.Option(..., "--hi", help="Inclusive upper end."),
    count_only: bool = typer.Option(False, "--count-only"),
    out: OutOpt = None,
    fmt: FormatOpt = None,
):
    """Primes in (lo, hi] by the segmented sieve."""
    reporter = _reporter()
    with _guard(reporter):
        cfg = _config(None, out=out, format=fmt)
        primes = sieve_primes(lo, hi, cfg.settings().segment_size)
        writer = ArtifactWriter(cfg.out, {"lo": lo, "hi": hi})
        if count_only:
            _emit(writer, writer.document("sieve", {"count": int(primes.size)}))
            return
        _emit(writer, writer.rows("sieve", ["p"], [[int(p)] for p in primes], cfg.format))


@app.command("chi-dump")
def chi_dump_cmd(
    config: ConfigOpt = None, c: COpt = None, tau: TauOpt = None, delta: DeltaOpt = None,
    N: NOpt = None, X: XOpt = None, mu: MuOpt = None, Y: YOpt = None, clamp_y: ClampOpt = None,
    points: PointsOpt = None, m_max: Optional[int] = typer.Option(None, "--m-max", min=1),
    out: OutOpt = None, fmt: FormatOpt = None,
):
    """The cup function on [0, 1): exact convolution against its truncated Fourier series."""
    reporter = _reporter()
    with _guard(reporter):
        cfg = _config(config, c=c, tau=tau, delta=delta, N=N, X=X, mu=mu, Y=Y, clamp_y=clamp_y,
                      points=points, m_max=m_max, out=out, format=fmt)
        params = cfg.params(cfg.settings())
        cup = CupFunction.from_params(params, cfg.settings())
        order = cup.M_trunc if cfg.m_max is None else cfg.m_max
        t = np.linspace(0.0, 1.0, cfg.points, endpoint=False)
        exact = np.asarray(cup.chi_eval(t), dtype=np.float64)
        series = np.asarray(cup.chi_via_series(t, order), dtype=np.float64)
        rows = [[float(a), float(b), float(s), float(abs(b - s))] for a, b, s in zip(t, exact, series)]
        reporter.mapping("chi", {
            "mean": cup.mean, "order": order, "tail": cup.tail_at(order),
            "max_gap": float(np.max(np.abs(exact - series))) if rows else 0.0,
        })
        writer = ArtifactWriter(cfg.out, params.snapshot())
        _emit(writer, writer.rows("chi", ["t", "chi", "series", "gap"], rows, cfg.format))


@app.command("expsum")
def expsum_cmd(
    config: ConfigOpt = None, c: COpt = None, tau: TauOpt = None, delta: DeltaOpt = None,
    N: NOpt = None, X: XOpt = None, mu: MuOpt = None, Y: YOpt = None, clamp_y: ClampOpt = None,
    kind: Optional[str] = typer.Option(None, "--kind", help="S, U, H or V."),
    alpha_min: Optional[float] = typer.Option(None, "--alpha-min"),
    alpha_max: Optional[float] = typer.Option(None, "--alpha-max"),
    points: PointsOpt = None,
    m: Optional[int] = typer.Option(None, "--m"),
    m_max: Optional[int] = typer.Option(None, "--m-max", min=1),
    threads: ThreadsOpt = None, out: OutOpt = None, fmt: FormatOpt = None,
):
    """S, U, H or V over an alpha grid (default [-P, P])."""
    reporter = _reporter()
    with _guard(reporter):
        cfg = _config(config, c=c, tau=tau, delta=delta, N=N, X=X, mu=mu, Y=Y, clamp_y=clamp_y,
                      kind=kind, alpha_min=alpha_min, alpha_max=alpha_max, points=points, m=m,
                      m_max=m_max, threads=threads, out=out, format=fmt)
        settings = cfg.settings()
        params = cfg.params(settings)
        table = build_table(params, settings=settings)
        lo, hi = cfg.alpha_range(params.P)
        alphas = np.linspace(lo, hi, cfg.points)
        sum_kind = SumKind(cfg.kind)
        cup = CupFunction.from_params(params, settings) if sum_kind in (SumKind.H, SumKind.V) else None
        values = grid_eval(table, sum_kind, alphas, m=cfg.m, cup=cup, m_max=cfg.m_max, threads=settings.threads)
        rows = [[float(a), float(v.real), float(v.imag), float(abs(v))] for a, v in zip(alphas, values)]
        reporter.mapping(f"{sum_kind.value}(alpha)", {
            "primes": len(table), "points": len(rows), "max_abs": max((r[3] for r in rows), default=0.0),
        })
        writer = ArtifactWriter(cfg.out, params.snapshot())
        _emit(writer, writer.rows(f"expsum_{sum_kind.value}", ["alpha", "re", "im", "abs"], rows, cfg.format))


@app.command("vaughan-check")
def vaughan_cmd(
    config: ConfigOpt = None, c: COpt = None, tau: TauOpt = None, delta: DeltaOpt = None,
    N: NOpt = None, X: XOpt = None, mu: MuOpt = None, Y: YOpt = None, clamp_y: ClampOpt = None,
    alpha: Optional[float] = typer.Option(None, "--alpha"),
    m: Optional[int] = typer.Option(None, "--m"),
    threads: ThreadsOpt = None, out: OutOpt = None,
):
    """Split U(alpha, m) into its four bilinear pieces and reconcile with the direct sum."""
    reporter = _reporter()
    with _guard(reporter):
        cfg = _config(config, c=c, tau=tau, delta=delta, N=N, X=X, mu=mu, Y=Y, clamp_y=clamp_y,
                      alpha=alpha, m=m, threads=threads, out=out)
        settings = cfg.settings()
        params = cfg.params(settings)
        table = build_table(params, settings=settings)
        pieces = decompose(table, cfg.alpha, cfg.m, threads=settings.threads)
        direct = u_alpha(table, cfg.alpha, cfg.m)
        gap = verify_against_u(table, pieces, cfg.alpha, cfg.m)
        payload: Dict[str, Any] = {
            "alpha": cfg.alpha,
            "m": cfg.m,
            "pieces": pieces.as_dict(),
            "U_direct": {"re": direct.real, "im": direct.imag, "abs": abs(direct)},
            "reconstruction_gap": gap,
            "discrepancy": pieces.identity_discrepancy(),
            "U2_envelope": u2_envelope(params.X),
        }
        reporter.mapping("Vaughan", {
            "|U1|": abs(pieces.u1), "|U2|": abs(pieces.u2), "|U3|": abs(pieces.u3), "|U4|": abs(pieces.u4),
            "|U|": abs(direct), "gap": gap, "discrepancy": payload["discrepancy"],
        })
        writer = ArtifactWriter(cfg.out, params.snapshot())
        _emit(writer, writer.document("vaughan", payload))


def _section_rows(sections: List[Section]) -> tuple[List[str], List[List[Any]]]:
    flat = [(sec.title, r.as_row()) for sec in sections for r in sec.results]
    header: List[str] = ["section"]
    for _, row in flat:
        for key in row:
            if key not in header:
                header.append(key)
    rows = [[title] + [row.get(k) for k in header[1:]] for title, row in flat]
    return header, rows


@app.command("bounds")
def bounds_cmd(
    config: ConfigOpt = None, c: COpt = None, tau: TauOpt = None, delta: DeltaOpt = None,
    N: NOpt = None, X: XOpt = None, mu: MuOpt = None, Y: YOpt = None, clamp_y: ClampOpt = None,
    lemma: Optional[str] = typer.Option(None, "--lemma", help="vdc, weyl, l2s, l2v, vmax or regime."),
    x_grid: Optional[List[float]] = typer.Option(None, "--x-grid", help="Repeat for each X."),
    n_grid: Optional[List[float]] = typer.Option(None, "--n-grid", help="Repeat for each N."),
    points: PointsOpt = None,
    threads: ThreadsOpt = None, out: OutOpt = None, fmt: FormatOpt = None,
):
    """Check one lemma numerically across a grid of X; exit 4 on a violated bound."""
    reporter = _reporter()
    with _guard(reporter):
        cfg = _config(config, c=c, tau=tau, delta=delta, N=N, X=X, mu=mu, Y=Y, clamp_y=clamp_y,
                      lemma=lemma, X_grid=x_grid or None, N_grid=n_grid or None, points=points,
                      threads=threads, out=out, format=fmt)
        settings = cfg.settings()
        if cfg.lemma in ("vdc", "weyl") and cfg.N is None and cfg.X is None and not (cfg.N_grid or cfg.X_grid):
            grid = []
        else:
            grid = [cfg.params_for(n, settings) for n in cfg.grid_N()]
        sections = BoundSuite(settings, points=cfg.points).run(grid, (cfg.lemma,))
        for sec in sections:
            reporter.section(sec)
        reporter.summary(sections)
        header, rows = _section_rows(sections)
        writer = ArtifactWriter(cfg.out, grid[0].snapshot() if grid else None)
        _emit(writer, writer.rows(f"bounds_{cfg.lemma}", header, rows, cfg.format))
        code = reporter.summary_exit_code(sections)
    if code:
        raise typer.Exit(code=code)


@app.command("solve")
def solve_cmd(
    config: ConfigOpt = None, c: COpt = None, tau: TauOpt = None, delta: DeltaOpt = None,
    N: NOpt = None, X: XOpt = None, mu: MuOpt = None, Y: YOpt = None, clamp_y: ClampOpt = None,
    eps_override: EpsOpt = None,
    budget_triples: Optional[int] = typer.Option(None, "--budget-triples", min=0),
    with_integrals: Optional[bool] = typer.Option(None, "--with-integrals/--no-integrals"),
    threads: ThreadsOpt = None, out: OutOpt = None,
):
    """Enumerate ordered prime triples near squares with |p1^c+p2^c+p3^c - N| < eps."""
    reporter = _reporter()
    with _guard(reporter):
        cfg = _config(config, c=c, tau=tau, delta=delta, N=N, X=X, mu=mu, Y=Y, clamp_y=clamp_y,
                      eps_override=eps_override, budget_triples=budget_triples,
                      with_integrals=with_integrals, threads=threads, out=out)
        settings = cfg.settings()
        params = cfg.params(settings)
        eps = params.eps if cfg.eps_override is None else cfg.eps_override
        table = build_table(params, settings=settings)
        report = find_triples(table, params.N, eps, params.Y, settings, params)
        summary = report.summary()
        if cfg.with_integrals:
            minorant = SelbergMinorant(params.mu, settings.minorant_k_trunc)
            cup = CupFunction.from_params(params, settings)
            summary["I1"] = i1_direct(table, cup, minorant, params, settings, eps).as_dict()
            summary["I"] = i_direct(table, minorant, params, settings, eps).as_dict()
        reporter.mapping("Triples", {
            "ordered": report.count,
            "unordered": None if report.count_only else len(unordered_counts(report)),
            "gamma": report.gamma,
            "eps": eps,
            "Y": params.Y,
        })
        writer = ArtifactWriter(cfg.out, params.snapshot())
        rows = [[a, b, c3, s, s - params.N] for (a, b, c3), s in zip(report.triples, report.sums)]
        if writer.out is not None:
            writer.table("triples", ["p1", "p2", "p3", "sum", "deviation"], rows)
        _emit(writer, writer.document("summary", summary))


@app.command("scaling")
def scaling_cmd(
    config: ConfigOpt = None, c: COpt = None, tau: TauOpt = None, delta: DeltaOpt = None,
    mu: MuOpt = None, Y: YOpt = None,
    x_grid: Optional[List[float]] = typer.Option(None, "--x-grid", help="Repeat for each X."),
    n_grid: Optional[List[float]] = typer.Option(None, "--n-grid", help="Repeat for each N."),
    y_mode: Optional[str] = typer.Option(None, "--y-mode", help="fixed or formula."),
    eps_override: EpsOpt = None,
    with_integrals: Optional[bool] = typer.Option(None, "--with-integrals/--no-integrals"),
    threads: ThreadsOpt = None, out: OutOpt = None, fmt: FormatOpt = None,
):
    """Gamma(X) against eps Y^3 X^(3-c) over a grid, with fitted log-log slopes."""
    reporter = _reporter()
    with _guard(reporter):
        cfg = _config(config, c=c, tau=tau, delta=delta, mu=mu, Y=Y, X_grid=x_grid or None,
                      N_grid=n_grid or None, y_mode=y_mode, eps_override=eps_override,
                      with_integrals=with_integrals, threads=threads, out=out, format=fmt)
        settings = cfg.settings()
        study = scaling_study(
            cfg.c, cfg.tau, cfg.delta, cfg.mu, cfg.grid_N(),
            y_mode=YMode(cfg.y_mode), Y0=cfg.Y, eps_override=cfg.eps_override,
            with_integrals=cfg.with_integrals, settings=settings,
        )
        header = ["X", "eps", "Y", "gamma", "predictor", "ratio", "triples", "i1_ratio"]
        rows = [[r.X, r.eps, r.Y, r.gamma, r.predictor, r.ratio, r.triples, r.i1_ratio] for r in study.rows]
        fits = {
            "slope": study.slope,
            "predictor_slope": study.predictor_slope,
            "ratio_spread": study.spread(),
        }
        reporter.mapping("Scaling", fits)
        if not math.isfinite(study.slope):
            log.warning("no triples anywhere on the grid; slope undefined")
        writer = ArtifactWriter(cfg.out, {"c": cfg.c, "tau": cfg.tau, "delta": cfg.delta, "mu": cfg.mu,
                                          "y_mode": cfg.y_mode, "Y": cfg.Y})
        _emit(writer, writer.rows("scaling", header, rows, cfg.format))
        if writer.out is not None:
            writer.document("scaling_fit", fits)
