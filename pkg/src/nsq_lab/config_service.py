from __future__ import annotations
import json
import logging
import math
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, ValidationError

from .config import DEFAULT_SETTINGS, Settings
from .core import Params, derive_params
from .errors import ConstraintViolation

log = logging.getLogger("nsq.config")


class RunConfig(BaseModel):
    """Everything one CLI invocation needs; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    c: float = 1.02
    tau: float = 1.028
    delta: float = 0.001
    N: Optional[float] = None
    X: Optional[float] = None
    N_grid: Optional[List[float]] = None
    X_grid: Optional[List[float]] = None
    mu: float = 2.0
    Y: Optional[float] = None
    clamp_y: bool = True
    eps_override: Optional[float] = None

    alpha: float = 0.0
    alpha_min: Optional[float] = None
    alpha_max: Optional[float] = None
    points: int = 101
    m: int = 0
    m_max: Optional[int] = None
    kind: Literal["S", "U", "H", "V"] = "S"
    lemma: Literal["vdc", "weyl", "l2s", "l2v", "vmax", "regime"] = "l2s"
    y_mode: Literal["formula", "fixed"] = "fixed"
    with_integrals: bool = False
    quadrature: bool = True

    threads: int = 1
    budget_triples: Optional[int] = None
    out: Optional[str] = None
    format: Literal["csv", "json"] = "csv"

    def resolved_N(self) -> float:
        if self.N is not None:
            return self.N
        if self.X is not None:
            return 2.0 * self.X ** self.c
        raise ConstraintViolation("N or X given")

    def grid_N(self) -> List[float]:
        if self.N_grid:
            return list(self.N_grid)
        if self.X_grid:
            return [2.0 * x ** self.c for x in self.X_grid]
        return [self.resolved_N()]

    def settings(self, base: Settings = DEFAULT_SETTINGS) -> Settings:
        s = base.with_threads(self.threads)
        if self.budget_triples is not None:
            s = replace(s, triple_budget=self.budget_triples)
        return s

    def params_for(self, N: float, settings: Settings = DEFAULT_SETTINGS) -> Params:
        return derive_params(
            self.c, self.tau, self.delta, N, self.mu,
            Y_override=self.Y, clamp_y=self.clamp_y, settings=settings,
        )

    def params(self, settings: Settings = DEFAULT_SETTINGS) -> Params:
        return self.params_for(self.resolved_N(), settings)

    def alpha_range(self, P: float) -> tuple[float, float]:
        lo = -P if self.alpha_min is None else self.alpha_min
        hi = P if self.alpha_max is None else self.alpha_max
        if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
            raise ConstraintViolation("alpha_min <= alpha_max", f"[{lo}, {hi}]")
        return lo, hi


def _describe(ve: ValidationError) -> str:
    parts = []
    for err in ve.errors():
        loc = ".".join(str(x) for x in err.get("loc", ())) or "config"
        parts.append(f"{loc}: {err.get('msg')}")
    return "; ".join(parts)


def load_run_config(path: Optional[Path], overrides: Dict[str, Any]) -> RunConfig:
    """Read an optional JSON file, then overlay every flag that was given."""
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise ConstraintViolation("readable JSON config", f"{path}: {e}") from e
        if not isinstance(data, dict):
            raise ConstraintViolation("config is a JSON object", str(path))
        log.debug("config file %s: %s", path, sorted(data))
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return RunConfig.model_validate(data)
    except ValidationError as ve:
        raise ConstraintViolation("valid run config", _describe(ve)) from ve
