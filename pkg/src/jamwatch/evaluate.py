"""Detection runs over whole records and Pd-versus-position curves."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .detectors import (
    BinaryDetectionTrace,
    DetectorKind,
    NcdVariant,
    SplitGrid,
    batch_statistics,
    integrate_m_of_n,
)
from .errors import InsufficientDataError
from .records import TraceRecord
from .traceio import WindowingPlan, decimate, windows


@dataclass(frozen=True)
class DetectionRun:
    """Thresholded detector decisions for every window position of one record."""

    record_id: str
    detector: DetectorKind
    variant: NcdVariant | None
    threshold: float
    positions: np.ndarray
    statistics: np.ndarray
    argmax_splits: np.ndarray
    valid_split_counts: np.ndarray
    detections: np.ndarray
    integrated: np.ndarray | None = None
    ground_truth: int | None = None  # in decimated samples

    def binary_trace(self, use_integrated: bool = False) -> BinaryDetectionTrace:
        det = self.integrated if use_integrated and self.integrated is not None else self.detections
        return BinaryDetectionTrace(self.positions, det)


def run_detection(
    record: TraceRecord,
    plan: WindowingPlan,
    detector: DetectorKind,
    threshold: float,
    grid_stride: int | None = None,
    variant: NcdVariant = NcdVariant.AS_WRITTEN,
    integrate: tuple[int, int] | None = None,
) -> DetectionRun:
    """Slide the detector across one record and threshold every window.

    Degenerate windows get a NaN statistic and count as no-detection
    rather than aborting the record. ``integrate`` applies an (m, n)
    hysteresis pass over the raw binary decisions.
    """
    detector = DetectorKind(detector)
    positions = []
    stack = []
    for pos, win in windows(record, plan):
        positions.append(pos)
        stack.append(win.values)
    batch = np.stack(stack)
    grid = SplitGrid.default(plan.window_length, batch.shape[1], stride=grid_stride)
    res = batch_statistics(batch, grid, kinds=[detector], ncd_variant=variant)[detector]
    with np.errstate(invalid="ignore"):
        detections = (res.statistic > threshold).astype(np.int64)
    positions = np.asarray(positions, dtype=np.int64)
    integrated = None
    if integrate is not None:
        m, n = integrate
        integrated = integrate_m_of_n(
            BinaryDetectionTrace(positions, detections), m, n
        ).detections
    dec_gt = decimate(record, plan.decimation_factor).ground_truth_change
    return DetectionRun(
        record_id=record.record_id,
        detector=detector,
        variant=variant if detector is DetectorKind.NCD else None,
        threshold=float(threshold),
        positions=positions,
        statistics=res.statistic,
        argmax_splits=res.argmax_split,
        valid_split_counts=res.valid_split_count,
        detections=detections,
        integrated=integrated,
        ground_truth=dec_gt,
    )


@dataclass(frozen=True)
class PdCurve:
    """Detection probability versus window position, averaged over records.

    Positions are window starts in decimated samples, shifted by each
    record's ground-truth change index when ``aligned`` (0 = window
    starting exactly at the change).
    """

    detector: DetectorKind
    threshold: float
    positions: np.ndarray
    pd: np.ndarray
    num_records: int
    aligned: bool
    label: str = ""

    def rows(self):
        for pos, pd in zip(self.positions, self.pd):
            yield int(pos), float(pd), self.num_records


def pd_curve(
    runs: list[DetectionRun],
    use_integrated: bool = False,
    align: bool | None = None,
    label: str = "",
) -> PdCurve:
    """Fraction of records firing at each window position.

    Positions align on ground truth when every run carries one (or when
    ``align`` forces it); records whose position sets differ are
    truncated to the common span with a warning.
    """
    if len(runs) < 2:
        raise InsufficientDataError(f"need at least 2 records for a Pd curve, got {len(runs)}")
    detector = runs[0].detector
    threshold = runs[0].threshold
    if any(r.detector is not detector for r in runs):
        raise ValueError("all runs must come from the same detector")
    if align is None:
        align = all(r.ground_truth is not None for r in runs)
    offset = [r.ground_truth if align else 0 for r in runs]
    if align and any(o is None for o in offset):
        raise ValueError("alignment requested but some records lack ground truth")

    position_sets = [set((r.positions - o).tolist()) for r, o in zip(runs, offset)]
    common = set.intersection(*position_sets)
    if not common:
        raise InsufficientDataError("records share no common window positions")
    if any(common != s for s in position_sets):
        warnings.warn(
            "records cover unequal spans; truncating the Pd curve to the "
            f"{len(common)} common positions",
            stacklevel=2,
        )
    common_arr = np.array(sorted(common), dtype=np.int64)
    acc = np.zeros(common_arr.size)
    for run, off in zip(runs, offset):
        det = run.integrated if use_integrated and run.integrated is not None else run.detections
        pos = run.positions - off
        lookup = dict(zip(pos.tolist(), det.tolist()))
        acc += np.array([lookup[p] for p in common_arr.tolist()])
    return PdCurve(
        detector=detector,
        threshold=threshold,
        positions=common_arr,
        pd=acc / len(runs),
        num_records=len(runs),
        aligned=align,
        label=label,
    )
