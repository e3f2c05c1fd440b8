"""Readers and writers for trace, event and sweep-record CSV files.

Trace file::

    # sample_rate_hz=2000.0
    time_s,signal,...
    0.000000000,0.25,...

Event file::

    # source_length=1000
    # sample_rate_hz=2000.0
    time_s,polarity
    0.001500000,UP

Times carry 9 decimals. Sample values are written with ``repr`` so a
write/read cycle returns bit-identical floats.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import MalformedFile
from .sweep import SweepRecord
from .types import DN, UP, Event, EventStream, Signal

TIME_FMT = "{:.9f}"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _read_header(lines: list[str], path) -> tuple[dict[str, str], int]:
    meta = {}
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        body = lines[i][1:].strip()
        if "=" in body:
            k, v = body.split("=", 1)
            meta[k.strip()] = v.strip()
        i += 1
    return meta, i


def _meta_float(meta, key, path, line) -> float:
    try:
        v = float(meta[key])
    except KeyError:
        raise MalformedFile(path, line, f"missing '# {key}=' header") from None
    except ValueError:
        raise MalformedFile(path, line, f"bad value for {key}: {meta[key]!r}") from None
    if not (math.isfinite(v) and v > 0):
        raise MalformedFile(path, line, f"{key} must be > 0")
    return v


def write_trace(path, columns: Mapping[str, Sequence], sample_rate_hz: float) -> Path:
    """Write named, equal-length columns preceded by a ``time_s`` column."""
    path = Path(path)
    names = list(columns)
    data = [np.asarray(columns[k]) for k in names]
    n = len(data[0]) if data else 0
    if any(len(d) != n for d in data):
        raise ValueError("trace columns differ in length")
    with open(path, "w", newline="") as fh:
        fh.write(f"# sample_rate_hz={sample_rate_hz!r}\n")
        fh.write(",".join(["time_s", *names]) + "\n")
        cols = [d.tolist() for d in data]
        for i in range(n):
            row = [TIME_FMT.format(i / sample_rate_hz)]
            row.extend(_fmt(c[i]) for c in cols)
            fh.write(",".join(row) + "\n")
    return path


def read_trace(path) -> tuple[float, dict[str, np.ndarray]]:
    """Return ``(sample_rate_hz, columns)``; ``columns`` excludes ``time_s``."""
    path = Path(path)
    lines = path.read_text().splitlines()
    meta, i = _read_header(lines, path)
    fs = _meta_float(meta, "sample_rate_hz", path, i + 1)
    if i >= len(lines):
        raise MalformedFile(path, i + 1, "missing column header")
    header = lines[i].split(",")
    if header[0] != "time_s" or len(header) < 2:
        raise MalformedFile(path, i + 1, "header must start with time_s and name at least one column")
    rows = []
    for lineno, line in enumerate(lines[i + 1 :], start=i + 2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != len(header):
            raise MalformedFile(path, lineno, f"expected {len(header)} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts[1:]])
        except ValueError:
            raise MalformedFile(path, lineno, "non-numeric value") from None
    arr = np.array(rows, dtype=float).reshape(-1, len(header) - 1)
    return fs, {name: arr[:, j].copy() for j, name in enumerate(header[1:])}


def read_signal(path, column: str | None = None) -> Signal:
    """Load one column of a trace file as a Signal (first data column by default)."""
    fs, cols = read_trace(path)
    if column is None:
        column = next(iter(cols))
    if column not in cols:
        raise MalformedFile(path, 1, f"no column named {column!r}")
    return Signal(cols[column], fs)


def write_events(path, stream: EventStream) -> Path:
    path = Path(path)
    fs = stream.source_sample_rate_hz
    with open(path, "w", newline="") as fh:
        fh.write(f"# source_length={stream.source_length}\n")
        fh.write(f"# sample_rate_hz={fs!r}\n")
        fh.write("time_s,polarity\n")
        for ev in stream.events:
            fh.write(f"{TIME_FMT.format(ev.index / fs)},{ev.polarity.name}\n")
    return path


def read_events(path) -> EventStream:
    """Parse an event file; any defect raises MalformedFile with its line number."""
    path = Path(path)
    lines = path.read_text().splitlines()
    meta, i = _read_header(lines, path)
    fs = _meta_float(meta, "sample_rate_hz", path, i + 1)
    try:
        length = int(meta["source_length"])
    except KeyError:
        raise MalformedFile(path, i + 1, "missing '# source_length=' header") from None
    except ValueError:
        raise MalformedFile(path, i + 1, "bad source_length") from None
    if length < 0:
        raise MalformedFile(path, i + 1, "source_length must be >= 0")
    if i >= len(lines) or lines[i].strip() != "time_s,polarity":
        raise MalformedFile(path, i + 1, "expected header 'time_s,polarity'")
    events = []
    prev = -1
    for lineno, line in enumerate(lines[i + 1 :], start=i + 2):
        if not line.strip():
            continue
        parts = line.strip().split(",")
        if len(parts) != 2:
            raise MalformedFile(path, lineno, "expected 'time_s,polarity'")
        try:
            t = float(parts[0])
        except ValueError:
            raise MalformedFile(path, lineno, f"bad time {parts[0]!r}") from None
        if not math.isfinite(t) or t < 0:
            raise MalformedFile(path, lineno, f"bad time {parts[0]!r}")
        pol = {"UP": UP, "DN": DN}.get(parts[1])
        if pol is None:
            raise MalformedFile(path, lineno, f"polarity must be UP or DN, got {parts[1]!r}")
        idx = int(round(t * fs))
        if idx <= prev:
            raise MalformedFile(path, lineno, "event times not strictly increasing")
        if idx >= length:
            raise MalformedFile(path, lineno, f"event at sample {idx} beyond source_length {length}")
        prev = idx
        events.append(Event(idx, pol))
    return EventStream(tuple(events), fs, length)


RECORD_FIELDS = ("v_th", "t_rfr_s", "rmse", "event_count", "event_rate_hz")


def write_records(path, records: Sequence[SweepRecord]) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RECORD_FIELDS)
        for r in records:
            w.writerow([_fmt(r.v_th), _fmt(r.t_rfr), _fmt(r.rmse), str(r.event_count), _fmt(r.event_rate_hz)])
    return path


def read_records(path) -> list[SweepRecord]:
    path = Path(path)
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != RECORD_FIELDS:
            raise MalformedFile(path, 1, f"expected header {','.join(RECORD_FIELDS)}")
        for lineno, row in enumerate(reader, start=2):
            try:
                v, t, e, c, r = row
                out.append(SweepRecord(float(v), float(t), float(e), int(c), float(r)))
            except ValueError:
                raise MalformedFile(path, lineno, "bad record") from None
    return out
