from __future__ import annotations
from typing import List, Protocol

from ..models import Section


class SectionedCheck(Protocol):
    """A grouped checker that returns a complete section."""

    def run_section(self) -> Section: ...


def interior_samples(a: float, b: float, count: int = 64) -> List[float]:
    """`count` points strictly inside (a, b)."""
    step = (b - a) / (count + 1)
    return [a + (i + 1) * step for i in range(count)]
