"""Machine-readable experiment reports (JSON and CSV)."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = ["ResultTable", "ReportRecord", "emit", "parse_report"]


@dataclass
class ResultTable:
    """Columnar result rows produced by one operation."""

    op: str
    columns: list
    rows: list = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values, table {self.op} has "
                             f"{len(self.columns)} columns")
        self.rows.append([_plain(v) for v in values])

    def column(self, name):
        i = self.columns.index(name)
        return [r[i] for r in self.rows]


@dataclass
class ReportRecord:
    experiment: str
    inputs: dict
    tables: list
    verdicts: dict
    seed: Optional[int]
    version: str
    wall_clock: Optional[float] = None
    failures: list = field(default_factory=list)

    def table(self, op) -> ResultTable:
        for t in self.tables:
            if t.op == op:
                return t
        raise KeyError(op)


def _plain(v):
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def _document(report: ReportRecord, timing: bool) -> dict:
    doc = {
        "experiment": report.experiment,
        "version": report.version,
        "seed": report.seed,
        "inputs": _plain(report.inputs),
        "verdicts": _plain(report.verdicts),
        "failures": list(report.failures),
        "rows": [{"op": t.op, "columns": list(t.columns), "data": t.rows} for t in report.tables],
    }
    if timing:
        doc["wall_clock"] = report.wall_clock
    return doc


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    return str(v)


def emit(report: ReportRecord, format: str = "json", timing: bool = False) -> bytes:
    """Serialise a report.

    JSON is a single document with keys in fixed order and floats written as
    their shortest round-trip decimal. CSV writes each table as a header row
    followed by data rows; multiple tables are separated by a blank line.
    Wall-clock time is included only when ``timing`` is set so that output is
    byte-identical across runs by default.
    """
    if format == "json":
        text = json.dumps(_document(report, timing), indent=1, allow_nan=True)
        return (text + "\n").encode("utf-8")
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for i, t in enumerate(report.tables):
            if i:
                buf.write("\n")
            w.writerow(t.columns)
            for r in t.rows:
                w.writerow([_csv_cell(v) for v in r])
        return buf.getvalue().encode("utf-8")
    raise ValueError(f"unknown format {format!r}")


def parse_report(data: bytes) -> ReportRecord:
    """Inverse of ``emit(..., 'json')``."""
    doc = json.loads(data.decode("utf-8"))
    tables = [ResultTable(t["op"], t["columns"], t["data"]) for t in doc["rows"]]
    return ReportRecord(
        experiment=doc["experiment"],
        inputs=doc["inputs"],
        tables=tables,
        verdicts=doc["verdicts"],
        seed=doc["seed"],
        version=doc["version"],
        wall_clock=doc.get("wall_clock"),
        failures=doc.get("failures", []),
    )
