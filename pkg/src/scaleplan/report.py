"""Reports: titled key/value sections plus optional tables, rendered as text, JSON or CSV."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence


@dataclass
class Section:
    title: str
    items: list[tuple[str, Any]] = field(default_factory=list)
    columns: Sequence[str] = ()
    rows: list[Sequence[Any]] = field(default_factory=list)
    note: str = ""

    def add(self, key: str, value: Any) -> "Section":
        self.items.append((key, value))
        return self


@dataclass
class Report:
    title: str
    sections: list[Section] = field(default_factory=list)

    def section(self, title: str, **kwargs) -> Section:
        s = Section(title, **kwargs)
        self.sections.append(s)
        return s

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"title": self.title}
        for s in self.sections:
            body: dict[str, Any] = {k: _jsonable(v) for k, v in s.items}
            if s.columns:
                body["table"] = [dict(zip(s.columns, map(_jsonable, r))) for r in s.rows]
            if s.note:
                body["note"] = s.note
            doc[_key(s.title)] = body
        return doc

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=2) + "\n"
        if fmt == "csv":
            return self.to_csv()
        return self.to_text()

    def to_text(self) -> str:
        lines = [self.title, "=" * len(self.title)]
        for s in self.sections:
            lines += ["", s.title, "-" * len(s.title)]
            width = max((len(k) for k, _ in s.items), default=0)
            lines += [f"  {k:<{width}}  {_text(v)}" for k, v in s.items]
            if s.columns:
                cells = [list(map(str, s.columns))] + [[_text(v) for v in r] for r in s.rows]
                widths = [max(len(row[i]) for row in cells) for i in range(len(s.columns))]
                for row in cells:
                    lines.append("  " + "  ".join(c.rjust(w) for c, w in zip(row, widths)))
            if s.note:
                lines.append(f"  note: {s.note}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["section", "key", "value"])
        for s in self.sections:
            for k, v in s.items:
                w.writerow([s.title, k, _csv(v)])
            for r in s.rows:
                for col, v in zip(s.columns[1:], r[1:]):
                    w.writerow([s.title, f"{s.columns[0]}={r[0]} {col}", _csv(v)])
        return buf.getvalue()


def _key(title: str) -> str:
    return title.lower().replace(" ", "_").replace("-", "_")


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else "unbounded"
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _text(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        if math.isinf(v):
            return "unbounded"
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_text(x) for x in v) + "]" if v else "none"
    if v is None:
        return "-"
    return str(v)


def _csv(v) -> str:
    if isinstance(v, float):
        return "unbounded" if math.isinf(v) else repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(_csv(x) for x in v)
    if isinstance(v, bool):
        return str(int(v))
    return "" if v is None else str(v)
