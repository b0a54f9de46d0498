from __future__ import annotations
from typing import Any, Dict, List

from rich.console import Console
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table
from rich.text import Text

from .models import Section, Verdict

_MARK = {
    Verdict.HOLDS: "✅",
    Verdict.HOLDS_WITH_CONSTANT: "⚠️",
    Verdict.VIOLATED: "❌",
}


def _num(x: Any) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return "-" if x is None else str(x)


class Reporter:
    def __init__(self, console: Console) -> None:
        self.console = console

    def section(self, section: Section) -> None:
        table = Table(show_header=True, header_style="bold")
        table.add_column("Status", width=8)
        table.add_column("Rule", style="bold")
        table.add_column("lhs", justify="right")
        table.add_column("rhs", justify="right")
        table.add_column("ratio", justify="right")
        table.add_column("X", justify="right")
        for r in section.results:
            table.add_row(_MARK[r.verdict], r.rule, _num(r.lhs), _num(r.rhs), _num(r.ratio),
                          _num(r.parameters.get("X")))
        panel_title = Text(section.title, style="bold blue")
        self.console.print(Panel.fit(table, title=panel_title))
        for note in section.notes:
            self.console.print(f"  [dim]{note}[/dim]")

    def mapping(self, title: str, values: Dict[str, Any]) -> None:
        table = Table(show_header=False)
        table.add_column("key", style="bold")
        table.add_column("value", justify="right")
        for k, v in values.items():
            table.add_row(k, _num(v))
        self.console.print(Panel.fit(table, title=Text(title, style="bold blue")))

    def summary_exit_code(self, sections: List[Section]) -> int:
        return 4 if any(s.has_failures() for s in sections) else 0

    def summary(self, sections: List[Section]) -> None:
        counts = {v: 0 for v in Verdict}
        for s in sections:
            for r in s.results:
                counts[r.verdict] += 1
        table = Table(show_header=True, header_style="bold")
        table.add_column("HOLDS")
        table.add_column("WITH CONSTANT")
        table.add_column("VIOLATED")
        table.add_row(*(str(counts[v]) for v in Verdict))
        if counts[Verdict.VIOLATED]:
            style = "bold red"
        elif any(s.has_constants() for s in sections):
            style = "bold yellow"
        else:
            style = "bold green"
        self.console.print(Panel.fit(table, title=Text("Summary", style=style)))

    def error(self, message: str) -> None:
        self.console.print(f"[bold red]error:[/bold red] {escape(message)}")
