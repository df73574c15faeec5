"""Tabular CSV/JSON output.

Exact rationals are written as ``"num/den"`` strings, never as floats.
Floats use the shortest representation that round-trips (``repr``).
"""
from __future__ import annotations

import csv
import io
import json
import re
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import DomainError, ResourceError

__all__ = ["Table", "format_value", "to_csv", "to_json", "from_json", "emit", "write_output"]

_RATIONAL = re.compile(r"^-?\d+/\d+$")


@dataclass
class Table:
    columns: Sequence[str]
    rows: list[Sequence[Any]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def format_exact(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _jsonable(v):
    if isinstance(v, Fraction):
        return format_exact(v)
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


def format_value(v) -> str:
    """One CSV cell."""
    if v is None:
        return ""
    if isinstance(v, Fraction):
        return format_exact(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([format_value(v) for v in row])
    return buf.getvalue()


def to_json(table: Table | Any) -> str:
    """A :class:`Table` becomes ``{"columns", "rows", "meta"}`` with one object per row."""
    if isinstance(table, Table):
        doc = {
            "columns": list(table.columns),
            "rows": [dict(zip(table.columns, (_jsonable(v) for v in row))) for row in table.rows],
            "meta": _jsonable(table.meta),
        }
    else:
        doc = _jsonable(table)
    return json.dumps(doc) + "\n"


def _parse(v):
    if isinstance(v, str) and _RATIONAL.match(v):
        return Fraction(v)
    return v


def from_json(text: str) -> Table:
    """Inverse of :func:`to_json` for tables; ``"num/den"`` strings come back as Fractions."""
    doc = json.loads(text)
    cols = doc["columns"]
    rows = [[_parse(r.get(c)) for c in cols] for r in doc["rows"]]
    return Table(cols, rows, doc.get("meta", {}))


def emit(table, fmt: str) -> bytes:
    if fmt == "csv":
        if not isinstance(table, Table):
            raise DomainError("csv output needs a table")
        return to_csv(table).encode()
    if fmt == "json":
        return to_json(table).encode()
    raise DomainError(f"unknown output format {fmt!r}; expected csv or json")


def write_output(data: bytes, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    try:
        Path(path).write_bytes(data)
    except OSError as exc:
        raise ResourceError(f"cannot write {path}: {exc.strerror or exc}") from None
