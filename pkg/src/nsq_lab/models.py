from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional


class Verdict(str, Enum):
    HOLDS = "holds"
    HOLDS_WITH_CONSTANT = "holds-with-constant"
    VIOLATED = "violated"


class ConstantPolicy(str, Enum):
    """How a ratio above 1 is judged.

    EXACT inequalities may only exceed 1 by the declared relative slack.
    MEASURED bounds (implicit constants) record the ratio as the constant.
    """

    EXACT = "exact"
    MEASURED = "measured"


@dataclass
class BoundReport:
    """Outcome of comparing a computed left-hand side with a bound."""

    rule: str
    lhs: float
    rhs: float
    ratio: float
    verdict: Verdict
    parameters: Dict[str, Any] = field(default_factory=dict)
    constant: Optional[float] = None
    message: str = ""

    @classmethod
    def judge(
        cls,
        rule: str,
        lhs: float,
        rhs: float,
        policy: ConstantPolicy,
        parameters: Optional[Dict[str, Any]] = None,
        slack: float = 1e-9,
        message: str = "",
    ) -> "BoundReport":
        if rhs == 0.0:
            ratio = 0.0 if lhs == 0.0 else float("inf")
        else:
            ratio = lhs / rhs
        constant: Optional[float] = None
        if ratio <= 1.0:
            verdict = Verdict.HOLDS
        elif policy is ConstantPolicy.EXACT:
            verdict = Verdict.HOLDS if ratio <= 1.0 + slack else Verdict.VIOLATED
        elif ratio < float("inf"):
            verdict = Verdict.HOLDS_WITH_CONSTANT
            constant = ratio
        else:
            verdict = Verdict.VIOLATED
        return cls(
            rule=rule,
            lhs=float(lhs),
            rhs=float(rhs),
            ratio=float(ratio),
            verdict=verdict,
            parameters=dict(parameters or {}),
            constant=constant,
            message=message,
        )

    @property
    def ok(self) -> bool:
        return self.verdict is not Verdict.VIOLATED

    def as_row(self) -> Dict[str, Any]:
        row: Dict[str, Any] = {
            "rule": self.rule,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "verdict": self.verdict.value,
            "constant": self.constant,
        }
        row.update(self.parameters)
        return row


@dataclass
class Section:
    """Collection of related bound reports."""

    title: str
    results: List[BoundReport] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def extend(self, items: List[BoundReport]) -> None:
        self.results.extend(items)

    def has_failures(self) -> bool:
        return any(not r.ok for r in self.results)

    def has_constants(self) -> bool:
        return any(r.verdict is Verdict.HOLDS_WITH_CONSTANT for r in self.results)
