from __future__ import annotations
from dataclasses import dataclass, replace
from typing import Optional


@dataclass(frozen=True)
class Settings:
    """Immutable configuration for numerical tolerances, budgets and workers."""

    threads: int = 1
    chunk_size: int = 4096
    segment_size: int = 1 << 18
    max_table_bytes: int = 512 * 1024 * 1024
    triple_budget: int = 1_000_000
    adjudication_rel: float = 1e-9
    extended_dps: int = 30
    cup_tail_tol: float = 1e-9
    max_fourier_order: int = 1_000_000
    minorant_k_trunc: int = 8
    minorant_cutoff: float = 1e-12
    minorant_window: Optional[float] = None
    quad_panel_cycles: float = 1.0
    quad_rel_tol: float = 1e-11
    quad_agreement: float = 1e-4
    quad_budget: int = 400_000_000
    verify_limit: int = 20_000
    regime_spread: float = 10.0
    y_ceiling: float = 0.45
    y_clamp: float = 0.4

    def with_threads(self, threads: int) -> "Settings":
        return replace(self, threads=max(1, int(threads)))


DEFAULT_SETTINGS = Settings()
