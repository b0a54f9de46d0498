from __future__ import annotations
import logging
from typing import Callable, Dict, List, Sequence

from ..checks.base import SectionedCheck
from ..checks.mean_square import l2_s_integral, l2_v_integral
from ..checks.phase import PhaseProbe, phase_regime
from ..checks.van_der_corput import VanDerCorputChecks
from ..checks.vmax import q_report, vmax_scan
from ..config import DEFAULT_SETTINGS, Settings
from ..core import Params
from ..expsums import PrimeTable, build_table
from ..models import BoundReport, ConstantPolicy, Section
from ..smoothing import CupFunction

log = logging.getLogger("nsq.suite")

LEMMAS = ("vdc", "weyl", "l2s", "l2v", "vmax", "regime")


def ratio_spread(reports: Sequence[BoundReport]) -> float:
    ratios = [r.ratio for r in reports if r.ratio > 0.0]
    if len(ratios) < 2:
        return 1.0
    return max(ratios) / min(ratios)


class BoundSuite:
    """
    Lemma checks over a grid of X:
      - Van der Corput derivative tests and the shift inequality (X-free)
      - mean squares of S and V
      - max |V| scan and the shift length Q
      - phase regime diagnostics at the middle of each range
    """

    def __init__(self, settings: Settings = DEFAULT_SETTINGS, points: int = 257) -> None:
        self.settings = settings
        self.points = points
        self._tables: Dict[float, PrimeTable] = {}

    def _table(self, params: Params) -> PrimeTable:
        if params.X not in self._tables:
            self._tables[params.X] = build_table(params, settings=self.settings)
        return self._tables[params.X]

    def run(self, params_grid: Sequence[Params], lemmas: Sequence[str] = LEMMAS) -> List[Section]:
        sections: List[Section] = []
        if "vdc" in lemmas or "weyl" in lemmas:
            checker: SectionedCheck = VanDerCorputChecks(self.settings)
            vdc = checker.run_section()
            keep = [r for r in vdc.results
                    if ("vdc" in lemmas and r.rule.startswith("vdc")) or ("weyl" in lemmas and r.rule == "weyl-vdc")]
            sections.append(Section(title=vdc.title, results=keep))

        per_x: Dict[str, Callable[[Params], List[BoundReport]]] = {
            "l2s": self._l2s,
            "l2v": self._l2v,
            "vmax": self._vmax,
            "regime": self._regime,
        }
        for lemma, fn in per_x.items():
            if lemma not in lemmas:
                continue
            sec = Section(title=lemma)
            for params in params_grid:
                sec.extend(fn(params))
            if len(params_grid) > 1 and lemma != "regime":
                sec.notes.append(f"ratio max/min across X: {ratio_spread([r for r in sec.results if r.rule == sec.results[0].rule]):.4g}")
            sections.append(sec)
        return sections

    def _l2s(self, params: Params) -> List[BoundReport]:
        table = self._table(params)
        return [l2_s_integral(table, params.P, self.settings)]

    def _l2v(self, params: Params) -> List[BoundReport]:
        table = self._table(params)
        cup = CupFunction.from_params(params, self.settings)
        return [l2_v_integral(table, cup, params.P, settings=self.settings)]

    def _vmax(self, params: Params) -> List[BoundReport]:
        table = self._table(params)
        cup = CupFunction.from_params(params, self.settings)
        return [vmax_scan(table, cup, params.P, self.points, settings=self.settings), q_report(params, self.settings)]

    def _regime(self, params: Params) -> List[BoundReport]:
        """phase_regime at a representative (alpha, m, d) recorded as ratio rows."""
        d = 2
        probe = PhaseProbe(
            alpha=params.P / 2.0, m=max(1, int(params.M) // 2), d=d, c=params.c,
            l_lo=params.X / (2.0 * d), l_hi=params.X / d, q=1,
        )
        regime = phase_regime(probe)
        row = BoundReport.judge(
            "phase-regime", abs(regime.gamma1), abs(regime.gamma2),
            ConstantPolicy.MEASURED, parameters={"X": params.X, **regime.as_dict()},
        )
        return [row]
