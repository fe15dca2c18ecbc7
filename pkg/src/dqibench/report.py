"""Experiment records: atomic file output, deterministic CSV, JSON sidecars."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

FORMAT_VERSION = 1
REPORT_COLUMNS = ("algorithm", "instance_id", "metric", "value", "uncertainty")


def fmt_float(x) -> str:
    """Locale-free float text with at most 12 significant digits."""
    if x is None:
        return ""
    if isinstance(x, (bool, int)) and not isinstance(x, float):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    text = repr(float(f"{x:.12g}"))
    return text[:-2] if text.endswith(".0") else text


def atomic_write_text(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temporary file and rename; "-" means stdout."""
    if str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt_float(c) if isinstance(c, float) else c for c in row])
    return buf.getvalue()


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class ExperimentReport:
    """Rows of (algorithm, instance_id, metric, value, uncertainty) plus the config that made them."""

    experiment_id: str
    config: dict
    rows: list[tuple] = field(default_factory=list)
    columns: tuple[str, ...] = REPORT_COLUMNS

    def add(self, *row) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} fields, expected {len(self.columns)}")
        self.rows.append(tuple(row))

    def csv(self) -> str:
        return csv_text(self.columns, self.rows)

    def sidecar(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "format_version": FORMAT_VERSION,
            "config": self.config,
            "columns": list(self.columns),
            "row_count": len(self.rows),
            "written_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
        }

    def write(self, csv_path) -> None:
        atomic_write_text(csv_path, self.csv())
        if str(csv_path) != "-":
            side = Path(str(csv_path) + ".json")
            atomic_write_text(side, json.dumps(self.sidecar(), indent=2, sort_keys=True) + "\n")
