"""CSV and JSON artifacts; every file carries the resolved Params snapshot."""
from __future__ import annotations
import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

log = logging.getLogger("nsq.artifacts")


def _plain(value: Any) -> Any:
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    return value


def render_json(payload: Dict[str, Any], params: Optional[Dict[str, Any]]) -> str:
    doc: Dict[str, Any] = {}
    if params is not None:
        doc["params"] = params
    doc.update(payload)
    return json.dumps(doc, indent=2, default=_plain) + "\n"


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]], params: Optional[Dict[str, Any]]) -> str:
    buf = io.StringIO()
    if params is not None:
        buf.write("# params " + json.dumps(params, separators=(",", ":")) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, float) else _plain(v) for v in row])
    return buf.getvalue()


class ArtifactWriter:
    """Writes artifacts under `out` (or returns the text when `out` is None)."""

    def __init__(self, out: Optional[str], params: Optional[Dict[str, Any]]) -> None:
        self.out = Path(out) if out else None
        self.params = params
        self.written: List[Path] = []

    def _emit(self, name: str, text: str) -> str:
        if self.out is not None:
            self.out.mkdir(parents=True, exist_ok=True)
            path = self.out / name
            path.write_text(text, encoding="utf-8")
            self.written.append(path)
            log.info("wrote %s", path)
        return text

    def table(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        return self._emit(f"{name}.csv", render_csv(header, rows, self.params))

    def document(self, name: str, payload: Dict[str, Any]) -> str:
        return self._emit(f"{name}.json", render_json(payload, self.params))

    def rows(self, name: str, header: Sequence[str], rows: List[Sequence[Any]], fmt: str) -> str:
        """Rows as CSV, or as a JSON document with a list of records."""
        if fmt == "json":
            return self.document(name, {"rows": [dict(zip(header, map(_plain, r))) for r in rows]})
        return self.table(name, header, rows)
