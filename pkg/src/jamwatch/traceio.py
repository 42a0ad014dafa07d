"""Trace file I/O, decimation, and sliding-window extraction.

The interchange format is a plain CSV with header

    sample_index,snr_db,avg_noise_dbm,inst_noise_dbm

where the measurement columns are any canonical-order subset matching
the trace's components, plus an optional JSON sidecar ``<stem>.meta.json``
carrying record_id, sample_period, ground_truth_change and a scenario
echo. Measurement values are serialized with 9 significant digits, so a
value that has been through one save/load cycle round-trips bit-exactly
thereafter.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from .errors import InsufficientDataError, TraceFormatError
from .records import TraceRecord, normalize_roles
from .stats import WindowMatrix

INDEX_COLUMN = "sample_index"


def sidecar_path(path) -> Path:
    return Path(path).with_suffix(".meta.json")


def format_value(x: float) -> str:
    return format(float(x), ".9g")


def save_trace(record: TraceRecord, path, write_sidecar: bool = True) -> Path:
    """Write a trace CSV (and its metadata sidecar) for ``record``."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow((INDEX_COLUMN,) + record.roles)
        for i, row in enumerate(record.values):
            writer.writerow([i] + [format_value(v) for v in row])
    if write_sidecar:
        meta = {
            "record_id": record.record_id,
            "sample_period": record.sample_period,
            "ground_truth_change": record.ground_truth_change,
            "scenario": record.scenario,
        }
        with open(sidecar_path(path), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return path


def load_trace(path) -> TraceRecord:
    """Parse a trace CSV plus optional sidecar into a TraceRecord.

    Component columns are reordered to the canonical role order if the
    file lists them differently. Malformed rows, non-finite values and
    non-monotone sample indices are rejected with the offending line
    number.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise TraceFormatError("empty trace file", path=path) from None
        header = [h.strip() for h in header]
        if not header or header[0] != INDEX_COLUMN:
            raise TraceFormatError(
                f"first column must be {INDEX_COLUMN!r}, got {header[:1]}", path=path, line=1
            )
        file_roles = header[1:]
        try:
            roles = normalize_roles(file_roles)
        except ValueError as exc:
            raise TraceFormatError(str(exc), path=path, line=1) from None
        order = [file_roles.index(r) for r in roles]

        rows = []
        prev_index = None
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise TraceFormatError(
                    f"expected {len(header)} fields, got {len(row)}", path=path, line=lineno
                )
            try:
                idx = int(row[0])
                vals = [float(row[1 + j]) for j in order]
            except ValueError as exc:
                raise TraceFormatError(f"unparsable field: {exc}", path=path, line=lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise TraceFormatError("non-finite measurement value", path=path, line=lineno)
            if prev_index is None:
                if idx != 0:
                    raise TraceFormatError(
                        f"sample_index must start at 0, got {idx}", path=path, line=lineno
                    )
            elif idx <= prev_index:
                raise TraceFormatError(
                    f"sample_index not strictly increasing ({prev_index} -> {idx})",
                    path=path,
                    line=lineno,
                )
            prev_index = idx
            rows.append(vals)
    if not rows:
        raise TraceFormatError("trace contains no samples", path=path)

    record_id = path.stem
    sample_period = 1.0
    ground_truth = None
    scenario = None
    side = sidecar_path(path)
    if side.exists():
        with open(side) as fh:
            meta = json.load(fh)
        record_id = meta.get("record_id", record_id)
        sample_period = meta.get("sample_period", sample_period)
        ground_truth = meta.get("ground_truth_change")
        scenario = meta.get("scenario")
        meta_roles = (scenario or {}).get("roles")
        if meta_roles is not None and tuple(meta_roles) != roles:
            raise TraceFormatError(
                f"sidecar roles {tuple(meta_roles)} do not match columns {roles}", path=path
            )
        if ground_truth is not None and not 0 < ground_truth <= len(rows):
            raise TraceFormatError(
                f"sidecar ground_truth_change {ground_truth} outside (0, {len(rows)}]", path=path
            )
    return TraceRecord(
        record_id=record_id,
        values=np.array(rows, dtype=np.float64),
        roles=roles,
        sample_period=sample_period,
        ground_truth_change=ground_truth,
        scenario=scenario,
    )


def decimate(record: TraceRecord, factor: int) -> TraceRecord:
    """Keep samples at indices 0, factor, 2*factor, ... (no filtering).

    The ground-truth change index rescales to ceil(gt/factor), the index
    of the first kept post-change sample; the sample period grows by the
    factor.
    """
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise ValueError(f"decimation factor must be a positive integer, got {factor}")
    factor = int(factor)
    if factor == 1:
        return record
    gt = record.ground_truth_change
    return TraceRecord(
        record_id=record.record_id,
        values=record.values[::factor].copy(),
        roles=record.roles,
        sample_period=record.sample_period * factor,
        ground_truth_change=None if gt is None else -(-gt // factor),
        scenario=record.scenario,
    )


@dataclass(frozen=True)
class WindowingPlan:
    """Sliding-window extraction parameters.

    ``window_length`` counts post-decimation samples; it must be at
    least 2(N+1) for the record it is applied to.
    """

    window_length: int
    stride: int = 1
    decimation_factor: int = 1

    def __post_init__(self):
        if self.window_length < 2:
            raise ValueError(f"window_length must be >= 2, got {self.window_length}")
        if self.stride < 1:
            raise ValueError(f"stride must be >= 1, got {self.stride}")
        if self.decimation_factor < 1:
            raise ValueError(
                f"decimation_factor must be >= 1, got {self.decimation_factor}"
            )

    @classmethod
    def with_default_stride(cls, window_length: int, decimation_factor: int = 1) -> "WindowingPlan":
        # stride K/50 keeps ~50 positions per window length; smaller only
        # densifies the resulting curves
        return cls(window_length, max(1, window_length // 50), decimation_factor)


def windows(record: TraceRecord, plan: WindowingPlan) -> Iterator[tuple[int, WindowMatrix]]:
    """Yield (position, window) pairs at positions 0, stride, 2*stride, ...

    Positions are start indices in decimated samples; a window at p
    covers decimated samples [p, p + K). Requires the decimated record
    to hold at least one full window and K >= 2(N+1).
    """
    rec = decimate(record, plan.decimation_factor)
    k = plan.window_length
    if k < 2 * (rec.n + 1):
        raise ValueError(
            f"window_length {k} below 2(N+1) = {2 * (rec.n + 1)} for N={rec.n}"
        )
    if len(rec) < k:
        raise InsufficientDataError(
            f"record {rec.record_id!r} has {len(rec)} samples after decimation, "
            f"shorter than window length {k}"
        )
    data = rec.values.T  # (N, T) view for cheap column slicing
    for start in range(0, len(rec) - k + 1, plan.stride):
        yield start, WindowMatrix(data[:, start : start + k], rec.roles)
