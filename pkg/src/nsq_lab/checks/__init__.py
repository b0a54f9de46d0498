from __future__ import annotations

from .mean_square import l2_s_integral, l2_v_integral
from .phase import Dominance, PhaseProbe, PhaseRegime, phase_regime
from .van_der_corput import VanDerCorputChecks, vdc_check, weyl_vdc_check
from .vmax import q_choice, q_report, q_value, vmax_scan

__all__ = [
    "Dominance",
    "PhaseProbe",
    "PhaseRegime",
    "VanDerCorputChecks",
    "l2_s_integral",
    "l2_v_integral",
    "phase_regime",
    "q_choice",
    "q_report",
    "q_value",
    "vdc_check",
    "vmax_scan",
    "weyl_vdc_check",
]
