"""Signal files: ``n,volts`` or ``t_seconds,volts`` CSV plus a JSON sidecar."""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .exceptions import ParseError
from .simulation import Signal


def sidecar_path(csv_path):
    p = Path(csv_path)
    return p.with_suffix(".json")


def write_signal(path, signal: Signal, time_column=False):
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if time_column:
            w.writerow(["t_seconds", "volts"])
            for t, v in zip(signal.times, signal.samples):
                w.writerow([repr(float(t)), repr(float(v))])
        else:
            w.writerow(["n", "volts"])
            for n, v in enumerate(signal.samples):
                w.writerow([n, repr(float(v))])
    sidecar_path(path).write_text(
        json.dumps({"f_sample_hz": signal.f_sample, "t0": signal.t0}, indent=2) + "\n",
        encoding="utf-8",
    )


def read_signal(path, f_sample=None, t0=None) -> Signal:
    """Read a signal CSV; rate and start time come from the sidecar unless given."""
    path = Path(path)
    side = sidecar_path(path)
    meta = json.loads(side.read_text(encoding="utf-8")) if side.exists() else {}
    f_sample = f_sample if f_sample is not None else meta.get("f_sample_hz")
    t0 = t0 if t0 is not None else meta.get("t0", 0.0)
    if f_sample is None:
        raise ParseError(f"no sample rate for {path}: missing sidecar {side.name}")
    values = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] not in (["n", "volts"], ["t_seconds", "volts"]):
            raise ParseError("header must be 'n,volts' or 't_seconds,volts'", line=1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                values.append(float(row[1]))
            except (IndexError, ValueError):
                raise ParseError(f"bad row {row!r}", line=lineno) from None
    return Signal(values, f_sample, t0)
