"""CSV and JSON emission with atomic writes.

Floats are written with 17 significant digits so a CSV round-trips to the
same doubles. Every file goes to a temporary sibling first and is renamed
into place.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def atomic_write(path, text: str) -> Path:
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
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header, rows) -> Path:
    return atomic_write(path, csv_text(header, rows))


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def json_text(doc: dict) -> str:
    return json.dumps(_plain(doc), indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_json(path, doc: dict) -> Path:
    return atomic_write(path, json_text(doc))


def profile_rows(profile):
    return zip(profile.grid, profile.values)


def write_profile(path, profile) -> Path:
    return write_csv(path, ("x", "t00r"), profile_rows(profile))


def write_ramp(path, result) -> Path:
    return write_csv(path, ("t", "dEdt", "D"), zip(result.times, result.dEdt, result.d_values))


def write_overlaps(path, table) -> Path:
    return write_csv(path, ("k", "q", "parity_pair", "c"), table.rows())


def write_snapshot(path, snapshot) -> Path:
    return write_csv(path, ("x", "t00r"), zip(snapshot.grid, snapshot.values))


def write_lattice_density(path, x, values) -> Path:
    return write_csv(path, ("x", "t00"), zip(x, values))


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a file written by :func:`write_csv`."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


@dataclass
class RunManifest:
    """Record of one CLI invocation; kept out of the data files so those stay deterministic."""

    command: str
    params: dict
    version: str = ""
    outputs: list = field(default_factory=list)
    timestamp: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())

    def add(self, path) -> None:
        self.outputs.append(str(path))

    def write(self, directory) -> Path:
        return write_json(Path(directory) / "manifest.json",
                          {"command": self.command, "version": self.version,
                           "timestamp": self.timestamp,
                           "params": self.params, "outputs": self.outputs})
