"""Log-GLRT change detectors over sliding windows.

Each detector scans a grid of candidate split points K1 inside an N x K
window and reports the maximized log generalized-likelihood-ratio. With
A1, A2 the segment scatters at a split, A0 the whole-window scatter and
K2 = K - K1 (see jamwatch.stats):

ncd   covariance change, segment means free under both hypotheses:

          max_K1 { -(K1/2) logdet(A1/K1) - (K2/2) logdet(A2/K2) }
        + max_K1 { (K/2) logdet((A1+A2)/K) }

      The "as-written" variant takes both maxima independently, which is
      the form the statistic is usually quoted in. The "strict" variant
      replaces the second maximum by a minimum, which is what falls out
      of subtracting the split-maximized null likelihood; both variants
      are nonnegative. Pick with ``NcdVariant``.

mncd  covariance/mean change against a fully homogeneous null:

          max_K1 { -(K1/2) logdet(A1/K1) - (K2/2) logdet(A2/K2)
                   + (K/2) logdet(A0/K) }

spd   mean-only change under a common covariance:

          max_K1 { -logdet(A1 + A2) + logdet(A0) }

      logdet(A0) does not depend on the split, so the sweep reduces to
      minimizing logdet(A1 + A2).

All three statistics are invariant under affine maps z -> T z + b with
invertible T, so their null distribution depends only on (N, K, grid).
Splits whose scatters fail the positive-definiteness test are skipped
and counted; a window with no usable split raises DegenerateWindowError.

The sweep is vectorized over a whole batch of windows at once; the
per-window functions are thin wrappers around the batch kernel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateWindowError
from .stats import PD_RTOL, WindowMatrix, cumulative_moments, packed_logdet_pd

# Default split-grid stride keeps the grid near 200 points so the O(K)
# cumulative pass dominates the sweep cost.
DEFAULT_GRID_DIVISOR = 200

# Batches are evaluated in window chunks holding about this many samples
# (windows x K), keeping the temporary working set cache-sized at every
# window length and the memory bound independent of the batch size.
_CHUNK_ELEMENTS = 1 << 15


class DetectorKind(str, enum.Enum):
    NCD = "ncd"
    MNCD = "mncd"
    SPD = "spd"


class NcdVariant(str, enum.Enum):
    AS_WRITTEN = "as-written"
    STRICT = "strict"


@dataclass(frozen=True)
class SplitGrid:
    """Candidate K1 values for the split sweep, strictly increasing."""

    values: np.ndarray
    stride: int = 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.int64)
        object.__setattr__(self, "values", values)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("split grid must be a nonempty 1-D sequence")
        if np.any(values[1:] <= values[:-1]):
            raise ValueError("split grid values must be strictly increasing")
        if self.stride < 1:
            raise ValueError(f"stride must be positive, got {self.stride}")

    @classmethod
    def default(cls, window_length: int, n: int, stride: int | None = None) -> "SplitGrid":
        """All admissible splits in [N+1, K-(N+1)] at the default stride."""
        if stride is None:
            stride = max(1, window_length // DEFAULT_GRID_DIVISOR)
        lo, hi = n + 1, window_length - (n + 1)
        if lo > hi:
            raise ValueError(f"window length {window_length} admits no valid split for N={n}")
        return cls(np.arange(lo, hi + 1, stride, dtype=np.int64), stride)


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of one detector on one window.

    ``argmax_split`` is the K1 achieving the maximum (for ncd, of the
    first term; ``argmax_split_h0`` carries the second term's extremizer
    so the as-written variant reports its pair). ``threshold`` and
    ``detected`` stay None until apply_threshold.
    """

    detector: DetectorKind
    statistic: float
    argmax_split: int
    valid_split_count: int
    threshold: float | None = None
    detected: bool | None = None
    variant: NcdVariant | None = None
    argmax_split_h0: int | None = None


@dataclass(frozen=True)
class BinaryDetectionTrace:
    """Per-window-position binary detection decisions, 1 = detected."""

    positions: np.ndarray
    detections: np.ndarray

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=np.int64)
        detections = np.asarray(self.detections, dtype=np.int64)
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "detections", detections)
        if positions.shape != detections.shape or positions.ndim != 1:
            raise ValueError("positions and detections must be equal-length 1-D arrays")
        if positions.size and np.any(positions[1:] <= positions[:-1]):
            raise ValueError("positions must be strictly increasing")
        if np.any((detections != 0) & (detections != 1)):
            raise ValueError("detections must be 0/1")


@dataclass(frozen=True)
class SweepResult:
    """Batch output of one detector over a stack of windows."""

    statistic: np.ndarray
    argmax_split: np.ndarray
    argmax_split_h0: np.ndarray | None
    valid_split_count: np.ndarray
    degenerate: np.ndarray


def _masked_extremum(term: np.ndarray, ok: np.ndarray, grid: np.ndarray, largest: bool):
    # Extremum over the valid-split mask; ties resolve to the smallest K1
    # because argmax/argmin return the first hit on an ascending grid.
    fill = -np.inf if largest else np.inf
    masked = np.where(ok, term, fill)
    idx = masked.argmax(axis=-1) if largest else masked.argmin(axis=-1)
    value = np.take_along_axis(masked, idx[..., None], axis=-1)[..., 0]
    split = grid[idx]
    return value, split


def _chunk_statistics(z, g, kinds, ncd_variant, pd_rtol):
    """Evaluate one cache-sized chunk of windows; see batch_statistics."""
    _, n, k = z.shape
    moments = cumulative_moments(z)
    first, second = moments.first, moments.second
    pairs = moments.pairs
    k1 = g.astype(np.float64)
    k2 = float(k) - k1
    t1 = first[..., -1:]
    t2 = second[..., -1]
    s1 = first[..., g - 1]
    q1 = second[..., g - 1]
    s2 = t1 - s1
    q2 = t2[..., None] - q1

    need_segments = DetectorKind.NCD in kinds or DetectorKind.MNCD in kinds
    need_sum = DetectorKind.NCD in kinds or DetectorKind.SPD in kinds
    need_whole = DetectorKind.MNCD in kinds or DetectorKind.SPD in kinds

    # packed scatters with the pair axis LAST, ready for packed_logdet_pd
    shape_g = q1.shape[:-2] + (q1.shape[-1], len(pairs))
    ld1 = ld2 = ok12 = ldsum = oksum = None
    if need_segments:
        a1 = np.empty(shape_g)
        a2 = np.empty(shape_g)
        for p, (i, j) in enumerate(pairs):
            a1[..., p] = q1[..., p, :] - s1[..., i, :] * s1[..., j, :] / k1
            a2[..., p] = q2[..., p, :] - s2[..., i, :] * s2[..., j, :] / k2
        ld1, ok1 = packed_logdet_pd(a1, n, pd_rtol)
        ld2, ok2 = packed_logdet_pd(a2, n, pd_rtol)
        ok12 = ok1 & ok2
        if need_sum:
            asum = a1 + a2
    elif need_sum:
        asum = np.empty(shape_g)
        for p, (i, j) in enumerate(pairs):
            asum[..., p] = (
                q1[..., p, :]
                - s1[..., i, :] * s1[..., j, :] / k1
                + q2[..., p, :]
                - s2[..., i, :] * s2[..., j, :] / k2
            )
    if need_sum:
        ldsum, oksum = packed_logdet_pd(asum, n, pd_rtol)
    ld0 = ok0 = None
    if need_whole:
        t1f = t1[..., 0]
        a0 = np.stack(
            [t2[..., p] - t1f[..., i] * t1f[..., j] / k for p, (i, j) in enumerate(pairs)],
            axis=-1,
        )
        ld0, ok0 = packed_logdet_pd(a0, n, pd_rtol)

    logk = np.log(float(k))
    if need_segments:
        term_h1 = (
            -k1 / 2.0 * (ld1 - n * np.log(k1))
            - k2 / 2.0 * (ld2 - n * np.log(k2))
        )

    out: dict[DetectorKind, SweepResult] = {}
    for kind in kinds:
        if kind is DetectorKind.NCD:
            term_h0 = float(k) / 2.0 * (ldsum - n * logk)
            v1, split1 = _masked_extremum(term_h1, ok12, g, largest=True)
            v0, split0 = _masked_extremum(
                term_h0, ok12, g, largest=(ncd_variant is NcdVariant.AS_WRITTEN)
            )
            degenerate = ~ok12.any(axis=-1)
            out[kind] = SweepResult(
                statistic=np.where(degenerate, np.nan, v1 + v0),
                argmax_split=np.where(degenerate, -1, split1),
                argmax_split_h0=np.where(degenerate, -1, split0),
                valid_split_count=ok12.sum(axis=-1),
                degenerate=degenerate,
            )
        elif kind is DetectorKind.MNCD:
            term = term_h1 + (float(k) / 2.0 * (ld0 - n * logk))[..., None]
            v, split = _masked_extremum(term, ok12, g, largest=True)
            degenerate = ~ok12.any(axis=-1) | ~ok0
            out[kind] = SweepResult(
                statistic=np.where(degenerate, np.nan, v),
                argmax_split=np.where(degenerate, -1, split),
                argmax_split_h0=None,
                valid_split_count=ok12.sum(axis=-1),
                degenerate=degenerate,
            )
        else:
            term = ld0[..., None] - ldsum
            v, split = _masked_extremum(term, oksum, g, largest=True)
            degenerate = ~oksum.any(axis=-1) | ~ok0
            out[kind] = SweepResult(
                statistic=np.where(degenerate, np.nan, v),
                argmax_split=np.where(degenerate, -1, split),
                argmax_split_h0=None,
                valid_split_count=oksum.sum(axis=-1),
                degenerate=degenerate,
            )
    return out


def batch_statistics(
    values: np.ndarray,
    grid: SplitGrid | np.ndarray,
    kinds=(DetectorKind.NCD, DetectorKind.MNCD, DetectorKind.SPD),
    ncd_variant: NcdVariant = NcdVariant.AS_WRITTEN,
    pd_rtol: float = PD_RTOL,
) -> dict[DetectorKind, SweepResult]:
    """Evaluate detector statistics on a (W, N, K) stack of windows.

    One cumulative-moment pass per chunk of windows is shared by every
    requested detector, and each detector computes only the log
    determinants its statistic needs. Returns one SweepResult per kind;
    windows without any usable split (or, for mncd/spd, with a singular
    whole-window scatter) are flagged degenerate with a NaN statistic
    instead of raising, so bulk sweeps can skip and count them.
    """
    z = np.asarray(values, dtype=np.float64)
    if z.ndim == 2:
        z = z[None, :, :]
    w, n, k = z.shape
    g = grid.values if isinstance(grid, SplitGrid) else np.asarray(grid, dtype=np.int64)
    g = g[(g >= n + 1) & (g <= k - (n + 1))]
    if g.size == 0:
        raise DegenerateWindowError(
            f"no admissible split for window length {k} with N={n}"
        )
    kinds = [DetectorKind(kd) for kd in kinds]
    step = max(1, _CHUNK_ELEMENTS // k)
    pieces = [
        _chunk_statistics(z[i : i + step], g, kinds, ncd_variant, pd_rtol)
        for i in range(0, w, step)
    ]
    if len(pieces) == 1:
        return pieces[0]
    out: dict[DetectorKind, SweepResult] = {}
    for kind in kinds:
        parts = [p[kind] for p in pieces]
        out[kind] = SweepResult(
            statistic=np.concatenate([p.statistic for p in parts]),
            argmax_split=np.concatenate([p.argmax_split for p in parts]),
            argmax_split_h0=(
                np.concatenate([p.argmax_split_h0 for p in parts])
                if parts[0].argmax_split_h0 is not None
                else None
            ),
            valid_split_count=np.concatenate([p.valid_split_count for p in parts]),
            degenerate=np.concatenate([p.degenerate for p in parts]),
        )
    return out


def _single(window: WindowMatrix, grid, kind, variant=None) -> DetectionReport:
    if grid is None:
        grid = SplitGrid.default(window.k, window.n)
    elif not isinstance(grid, SplitGrid):
        grid = SplitGrid(grid)
    res = batch_statistics(
        window.values[None, :, :],
        grid,
        kinds=[kind],
        ncd_variant=variant or NcdVariant.AS_WRITTEN,
    )[kind]
    if bool(res.degenerate[0]):
        raise DegenerateWindowError(
            f"{kind.value}: no valid split among {grid.values.size} grid points"
        )
    h0 = res.argmax_split_h0
    return DetectionReport(
        detector=kind,
        statistic=float(res.statistic[0]),
        argmax_split=int(res.argmax_split[0]),
        valid_split_count=int(res.valid_split_count[0]),
        variant=variant,
        argmax_split_h0=int(h0[0]) if h0 is not None else None,
    )


def ncd_statistic(
    window: WindowMatrix,
    grid: SplitGrid | None = None,
    variant: NcdVariant = NcdVariant.AS_WRITTEN,
) -> DetectionReport:
    """Covariance-change statistic with free segment means (threshold unset)."""
    return _single(window, grid, DetectorKind.NCD, NcdVariant(variant))


def mncd_statistic(window: WindowMatrix, grid: SplitGrid | None = None) -> DetectionReport:
    """Change statistic against a fully homogeneous null (threshold unset)."""
    return _single(window, grid, DetectorKind.MNCD)


def spd_statistic(window: WindowMatrix, grid: SplitGrid | None = None) -> DetectionReport:
    """Mean-change statistic under a common covariance (threshold unset)."""
    return _single(window, grid, DetectorKind.SPD)


def apply_threshold(report: DetectionReport, threshold: float) -> DetectionReport:
    """Attach a threshold; detection requires statistic strictly above it."""
    threshold = float(threshold)
    if np.isnan(threshold):
        raise ValueError("threshold must not be NaN")
    return replace(report, threshold=threshold, detected=bool(report.statistic > threshold))


def integrate_m_of_n(trace: BinaryDetectionTrace, m: int, n: int) -> BinaryDetectionTrace:
    """Hysteresis rule: output 1 iff >= m of the last n raw decisions are 1.

    The first n-1 positions use the available prefix, with m clamped to
    the prefix length so an all-ones trace stays all ones. Positions are
    preserved. Requires 1 <= m <= n <= len(trace).
    """
    det = trace.detections
    if not (isinstance(m, (int, np.integer)) and isinstance(n, (int, np.integer))):
        raise ValueError("m and n must be integers")
    if not 1 <= m <= n <= det.size:
        raise ValueError(f"require 1 <= m <= n <= {det.size}, got m={m}, n={n}")
    idx = np.arange(det.size)
    csum = np.concatenate([[0], np.cumsum(det)])
    lo = np.maximum(idx - n + 1, 0)
    counts = csum[1:] - csum[lo]
    need = np.minimum(m, idx + 1)
    return BinaryDetectionTrace(trace.positions, (counts >= need).astype(np.int64))
