"""Monte Carlo threshold estimation at a target false-alarm probability.

Windows are resampled from the attack-free prefixes of a record set
(uniform over records and admissible offsets, with replacement), the
detector statistic is evaluated on each, and the threshold is the
smallest order statistic that keeps the strictly-above fraction at or
below the target. Detection uses a strict inequality, so the guarantee
is conservative: empirical Pfa on the calibration sample never exceeds
the target.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .detectors import DetectorKind, NcdVariant, SplitGrid, batch_statistics
from .errors import ConfigError, InsufficientDataError
from .records import TraceRecord
from .stats import WindowMatrix

# batch size for streaming statistic evaluation
_CHUNK = 512


@dataclass(frozen=True)
class CalibrationConfig:
    """Null-window resampling plan.

    ``source`` lists (record_id, attack-free prefix length) pairs; the
    prefix of each referenced record must hold at least one window.
    ``num_windows`` defaults to ceil(records / target_pfa), mirroring
    the records-per-false-alarm sizing rule.
    """

    window_length: int
    target_pfa: float = 1e-2
    num_windows: int | None = None
    rng_seed: int = 0
    source: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if not 0.0 < self.target_pfa < 1.0:
            raise ConfigError(f"target_pfa must be in (0, 1), got {self.target_pfa}")
        if self.window_length < 2:
            raise ConfigError(f"window_length must be >= 2, got {self.window_length}")
        if self.num_windows is not None and self.num_windows < 1:
            raise ConfigError(f"num_windows must be positive, got {self.num_windows}")

    def resolved_num_windows(self, num_records: int) -> int:
        if self.num_windows is not None:
            w = self.num_windows
        else:
            w = math.ceil(num_records / self.target_pfa)
        if w < 10 / self.target_pfa:
            warnings.warn(
                f"{w} calibration windows is below the recommended "
                f"10/target_pfa = {10 / self.target_pfa:.0f}; the threshold "
                "estimate will be noisy",
                stacklevel=2,
            )
        return w


@dataclass(frozen=True)
class ThresholdEstimate:
    """Calibrated threshold and its empirical exceedance."""

    threshold: float
    empirical_pfa: float
    num_windows_used: int
    detector: DetectorKind
    variant: NcdVariant | None = None
    skipped_windows: int = 0
    statistic_sample: np.ndarray | None = field(default=None, repr=False)


def draw_null_windows(
    config: CalibrationConfig, records: list[TraceRecord]
) -> Iterator[WindowMatrix]:
    """Yield seeded random windows from the records' attack-free prefixes.

    Record choice and start offset are uniform with replacement; the
    sequence is fully determined by the config seed. Prefix lengths come
    from ``config.source`` when given, else from each record's ground
    truth (falling back to the whole record when it has none).
    """
    if not records:
        raise ConfigError("no records to draw calibration windows from")
    by_id = {r.record_id: r for r in records}
    if config.source:
        chosen = []
        for record_id, prefix in config.source:
            if record_id not in by_id:
                raise ConfigError(f"unknown record id {record_id!r}", field="source")
            chosen.append((by_id[record_id], int(prefix)))
    else:
        chosen = [
            (r, len(r) if r.ground_truth_change is None else r.ground_truth_change)
            for r in records
        ]
    k = config.window_length
    if len({rec.roles for rec, _ in chosen}) > 1:
        raise ConfigError("records mix different component-role layouts")
    for rec, prefix in chosen:
        if prefix > len(rec):
            raise ConfigError(
                f"prefix {prefix} exceeds record {rec.record_id!r} length {len(rec)}",
                field="source",
            )
        if prefix < k:
            raise ConfigError(
                f"record {rec.record_id!r} attack-free prefix has {prefix} samples, "
                f"shorter than window length {k}"
            )
    num = config.resolved_num_windows(len(chosen))
    rng = np.random.default_rng(config.rng_seed)
    rec_idx = rng.integers(0, len(chosen), size=num)
    max_start = np.array([prefix - k for _, prefix in chosen], dtype=np.int64)
    offsets = rng.integers(0, max_start[rec_idx] + 1)
    roles = chosen[0][0].roles
    for ri, off in zip(rec_idx, offsets):
        rec = chosen[ri][0]
        yield WindowMatrix(rec.values[off : off + k].T, roles)


def threshold_from_statistics(values: np.ndarray, target_pfa: float):
    """Order-statistic threshold for a sample of null statistic values.

    Returns (threshold, empirical_pfa). The threshold is the
    ceil((1 - pfa) * W)-th ascending order statistic, the smallest value
    whose strictly-above fraction is <= target_pfa; it degenerates to
    +inf when W * target_pfa < 1, where no finite choice is supportable.
    """
    stats = np.sort(np.asarray(values, dtype=float))
    w = stats.size
    if w == 0 or w * target_pfa < 1.0:
        return math.inf, 0.0
    rank = math.ceil((1.0 - target_pfa) * w)
    threshold = float(stats[rank - 1])
    empirical = float(np.count_nonzero(stats > threshold)) / w
    return threshold, empirical


def estimate_threshold(
    detector: DetectorKind,
    grid: SplitGrid,
    windows: Iterable[WindowMatrix],
    target_pfa: float = 1e-2,
    ncd_variant: NcdVariant = NcdVariant.AS_WRITTEN,
    keep_sample: bool = False,
) -> ThresholdEstimate:
    """Monte Carlo threshold from a stream of null windows.

    Degenerate windows are skipped and counted (warning above 1% of the
    stream); fewer than ceil(1/target_pfa) drawn windows is an error.
    """
    detector = DetectorKind(detector)
    if not 0.0 < target_pfa < 1.0:
        raise ConfigError(f"target_pfa must be in (0, 1), got {target_pfa}")
    stats: list[np.ndarray] = []
    drawn = 0
    skipped = 0
    chunk: list[np.ndarray] = []

    def flush():
        nonlocal skipped
        if not chunk:
            return
        batch = np.stack(chunk)
        res = batch_statistics(batch, grid, kinds=[detector], ncd_variant=ncd_variant)[detector]
        good = ~res.degenerate
        skipped += int(np.count_nonzero(~good))
        stats.append(res.statistic[good])
        chunk.clear()

    for window in windows:
        chunk.append(window.values)
        drawn += 1
        if len(chunk) >= _CHUNK:
            flush()
    flush()

    needed = math.ceil(1.0 / target_pfa)
    if drawn < needed:
        raise InsufficientDataError(
            f"{drawn} calibration windows drawn, need at least {needed} "
            f"for target_pfa={target_pfa}"
        )
    if skipped > 0.01 * drawn:
        warnings.warn(
            f"{skipped} of {drawn} calibration windows were degenerate and skipped",
            stacklevel=2,
        )
    values = np.concatenate(stats) if stats else np.empty(0)
    threshold, empirical = threshold_from_statistics(values, target_pfa)
    return ThresholdEstimate(
        threshold=threshold,
        empirical_pfa=empirical,
        num_windows_used=int(values.size),
        detector=detector,
        variant=ncd_variant if detector is DetectorKind.NCD else None,
        skipped_windows=skipped,
        statistic_sample=np.sort(values) if keep_sample else None,
    )


def threshold_document(
    estimate: ThresholdEstimate,
    n: int,
    window_length: int,
    grid: SplitGrid,
    target_pfa: float,
    seed: int,
) -> dict:
    """JSON-ready description of a calibration result."""
    return {
        "detector": estimate.detector.value,
        "variant": estimate.variant.value if estimate.variant else None,
        "n": n,
        "window_length": window_length,
        "grid": {
            "min_split": int(grid.values[0]),
            "max_split": int(grid.values[-1]),
            "stride": int(grid.stride),
            "num_splits": int(len(grid.values)),
        },
        "target_pfa": target_pfa,
        "threshold": estimate.threshold,
        "empirical_pfa": estimate.empirical_pfa,
        "num_windows": estimate.num_windows_used,
        "skipped_windows": estimate.skipped_windows,
        "seed": seed,
    }


def save_threshold(document: dict, path) -> Path:
    path = Path(path)
    with open(path, "w") as fh:
        json.dump(document, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def load_threshold(path) -> dict:
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("detector", "window_length", "threshold", "target_pfa", "n"):
        if key not in doc:
            raise ConfigError(f"threshold file {path} missing field {key!r}")
    return doc
