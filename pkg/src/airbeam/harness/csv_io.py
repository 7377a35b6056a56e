"""CSV output of result rows."""
from __future__ import annotations

import csv
import io
from dataclasses import astuple, fields
from pathlib import Path

from .experiment import ResultRow

HEADER = [f.name for f in fields(ResultRow)]


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)


def format_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()


def write_csv(rows, path) -> None:
    p = Path(path)
    try:
        with open(p, "w", encoding="utf-8", newline="") as fh:
            fh.write(format_csv(rows))
    except OSError as exc:
        raise OSError(f"cannot write {p}: {exc.strerror or exc}") from exc


def read_csv(path) -> list[ResultRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        out = []
        for rec in reader:
            vals = {}
            for f in fields(ResultRow):
                raw = rec[f.name]
                vals[f.name] = {"str": str, "int": int, "float": float}[f.type](raw)
            out.append(ResultRow(**vals))
        return out
