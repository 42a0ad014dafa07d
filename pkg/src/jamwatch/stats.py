"""Gaussian sufficient statistics and small symmetric-matrix numerics.

Every detector statistic in this toolkit is a combination of log
determinants of segment scatter matrices. For a window Z = [z_1 .. z_K]
split after column K1:

    mean_1 = (1/K1) * sum(z_k, k <= K1)        segment sample means
    A_1    = sum((z_k - mean_1)(z_k - mean_1)^T, k <= K1)
    A_2    = same over the remaining K2 = K - K1 columns
    A_0    = scatter of the whole window around its overall mean

(mean_i, A_i / K_i) are the Gaussian maximum-likelihood estimates on
segment i, which is what makes these quantities sufficient for the
GLRT statistics built on top.

Scatters obey the additivity identity used as a cross-check everywhere:

    A_0 = A_1 + A_2 + (K1*K2/K) * d d^T,   d = mean_1 - mean_2

All matrices here are symmetric with N <= 3. They are stored either as
plain (N, N) ndarrays or packed as the N(N+1)/2 upper-triangle entries
in row-major pair order, e.g. (0,0),(0,1),(1,1) for N=2. The packed
form is what the sweep code vectorizes over.

Numerical note: second moments are accumulated on mean-centered columns.
Receiver measurements sit around e.g. -95 dBm, and accumulating raw
squares over tens of thousands of samples loses most of the scatter to
cancellation in sum(z z^T) - K m m^T; centering first removes the bulk
of the magnitude while leaving every scatter matrix unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrixError
from .records import MeasurementSample, normalize_roles

# A factorization pivot below PD_RTOL * trace/N marks the matrix as
# effectively singular; scale-relative so dB and linear units behave alike.
PD_RTOL = 1e-10


def sym_pairs(n: int) -> list[tuple[int, int]]:
    """Row-major upper-triangle index pairs for an n x n symmetric matrix."""
    return [(i, j) for i in range(n) for j in range(i, n)]


def pack_symmetric(mat: np.ndarray) -> np.ndarray:
    """Pack a symmetric (n, n) matrix into its n(n+1)/2 upper-triangle entries."""
    mat = np.asarray(mat, dtype=np.float64)
    n = mat.shape[0]
    return np.array([mat[i, j] for i, j in sym_pairs(n)])


def unpack_symmetric(packed: np.ndarray, n: int) -> np.ndarray:
    """Inverse of pack_symmetric."""
    out = np.empty((n, n))
    for p, (i, j) in enumerate(sym_pairs(n)):
        out[i, j] = packed[p]
        out[j, i] = packed[p]
    return out


def logdet_pd(mat: np.ndarray, pd_rtol: float = PD_RTOL) -> float:
    """Log determinant of a symmetric positive definite matrix.

    Uses an explicit Cholesky factorization and sums the logs of the
    pivots, so diagonal inputs come out exact. Raises
    SingularMatrixError carrying the index of the first pivot at or
    below pd_rtol * trace/N.
    """
    a = np.asarray(mat, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=1e-12, atol=0.0):
        raise ValueError("matrix is not symmetric")
    n = a.shape[0]
    tol = pd_rtol * max(np.trace(a), 0.0) / n
    lower = np.zeros((n, n))
    acc = 0.0
    for i in range(n):
        pivot = a[i, i] - np.dot(lower[i, :i], lower[i, :i])
        if not pivot > tol:
            raise SingularMatrixError(i, pivot)
        acc += math.log(pivot)
        li = math.sqrt(pivot)
        lower[i, i] = li
        for j in range(i + 1, n):
            lower[j, i] = (a[j, i] - np.dot(lower[j, :i], lower[i, :i])) / li
    return acc


def packed_logdet_pd(entries: np.ndarray, n: int, pd_rtol: float = PD_RTOL):
    """Vectorized log determinant + positive-definiteness mask, n <= 3.

    ``entries`` holds packed upper-triangle values along its LAST axis
    (any leading shape). Returns (logdet, pd_mask) with the leading
    shape; logdet is meaningful only where pd_mask is True.

    Positive definiteness is decided by Sylvester's criterion on the
    leading principal minors, phrased multiplicatively so no division
    is needed: with t = pd_rtol * trace/n, require m1 > t, m2 > t*m1,
    m3 > t*m2 (the Cholesky pivots are the successive minor ratios).
    """
    e = np.asarray(entries, dtype=np.float64)
    if e.shape[-1] != n * (n + 1) // 2:
        raise ValueError(f"expected {n * (n + 1) // 2} packed entries, got {e.shape[-1]}")
    if n == 1:
        m1 = e[..., 0]
        tol = pd_rtol * m1
        ok = m1 > tol
        return np.log(np.where(ok, m1, 1.0)), ok
    if n == 2:
        a, b, c = e[..., 0], e[..., 1], e[..., 2]
        det = a * c - b * b
        tol = pd_rtol * (a + c) / 2.0
        ok = (a > tol) & (det > tol * a)
        return np.log(np.where(ok, det, 1.0)), ok
    if n == 3:
        a11, a12, a13, a22, a23, a33 = (e[..., p] for p in range(6))
        m2 = a11 * a22 - a12 * a12
        m3 = (
            a11 * (a22 * a33 - a23 * a23)
            - a12 * (a12 * a33 - a23 * a13)
            + a13 * (a12 * a23 - a22 * a13)
        )
        tol = pd_rtol * (a11 + a22 + a33) / 3.0
        ok = (a11 > tol) & (m2 > tol * a11) & (m3 > tol * m2)
        return np.log(np.where(ok, m3, 1.0)), ok
    raise ValueError(f"packed_logdet_pd supports n <= 3, got n={n}")


@dataclass(frozen=True)
class WindowMatrix:
    """The N x K data matrix of one sliding-window position.

    Column k is the measurement vector at the k-th instant inside the
    window. Detector sweeps additionally need K >= 2(N+1) so that some
    split leaves both segments enough samples for nonsingular scatters;
    that bound is enforced where split grids are built, keeping short
    windows usable for plain scatter computations.
    """

    values: np.ndarray
    roles: tuple[str, ...]

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "roles", normalize_roles(self.roles))
        n, k = values.shape
        if n != len(self.roles):
            raise ValueError(f"{n} rows for {len(self.roles)} roles")
        if k < 2:
            raise ValueError(f"window needs at least 2 columns, got {k}")
        if not np.isfinite(values).all():
            raise ValueError("window contains non-finite values")

    @classmethod
    def from_samples(cls, samples: list[MeasurementSample]) -> "WindowMatrix":
        if not samples:
            raise ValueError("empty sample list")
        roles = samples[0].roles
        if any(s.roles != roles for s in samples):
            raise ValueError("all samples must share the same component-role layout")
        return cls(np.array([s.values for s in samples]).T, roles)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ScatterStats:
    """Segment means and scatter matrices for one split of a window.

    ``split_index`` is K1, the number of columns in segment 1. ``valid``
    is False when either segment is shorter than N+1 columns, in which
    case its scatter cannot be full rank and split sweeps skip it.
    """

    split_index: int
    count_1: int
    count_2: int
    mean_1: np.ndarray
    mean_2: np.ndarray
    mean_all: np.ndarray
    scatter_1: np.ndarray
    scatter_2: np.ndarray
    scatter_all: np.ndarray
    valid: bool


def _segment_scatter(seg: np.ndarray):
    # seg: (N, count); returns (mean, scatter) with scatter = sum of outer
    # products of deviations from the segment mean.
    mean = seg.mean(axis=1)
    dev = seg - mean[:, None]
    return mean, dev @ dev.T


def scatter(window: WindowMatrix, split: int) -> ScatterStats:
    """Means and scatters of the two segments induced by a split at K1.

    Splits outside [1, K-1] raise ValueError. Splits that leave a
    segment shorter than N+1 are returned with valid=False rather than
    raising, so grid sweeps can skip them uniformly.
    """
    k = window.k
    n = window.n
    if not 1 <= split <= k - 1:
        raise ValueError(f"split {split} outside [1, {k - 1}]")
    z = window.values
    mean_1, a1 = _segment_scatter(z[:, :split])
    mean_2, a2 = _segment_scatter(z[:, split:])
    mean_all, a0 = _segment_scatter(z)
    return ScatterStats(
        split_index=split,
        count_1=split,
        count_2=k - split,
        mean_1=mean_1,
        mean_2=mean_2,
        mean_all=mean_all,
        scatter_1=a1,
        scatter_2=a2,
        scatter_all=a0,
        valid=(split >= n + 1) and (k - split >= n + 1),
    )


@dataclass(frozen=True)
class WindowMoments:
    """Cumulative first/second moments of mean-centered window columns.

    ``first`` has shape (..., N, K) and ``second`` (..., P, K) with
    P = N(N+1)/2 packed pair products; entry [..., k] accumulates
    columns 0..k of the centered data. ``center`` is the per-window
    offset that was subtracted (the overall column mean).
    """

    center: np.ndarray
    first: np.ndarray
    second: np.ndarray
    pairs: tuple[tuple[int, int], ...]


def cumulative_moments(values: np.ndarray) -> WindowMoments:
    """One O(K N^2) pass of cumulative sums shared by all split sweeps.

    ``values`` is (..., N, K); leading axes batch independent windows.
    """
    z = np.asarray(values, dtype=np.float64)
    n = z.shape[-2]
    center = z.mean(axis=-1, keepdims=True)
    zc = z - center
    first = np.cumsum(zc, axis=-1)
    pairs = sym_pairs(n)
    prods = np.stack(
        [zc[..., i, :] * zc[..., j, :] for i, j in pairs], axis=-2
    )
    second = np.cumsum(prods, axis=-1)
    return WindowMoments(
        center=center[..., 0],
        first=first,
        second=second,
        pairs=tuple(pairs),
    )


def _packed_scatter(moments: WindowMoments, grid: np.ndarray):
    """Packed segment scatters and means for every split in ``grid``.

    Returns (a1, a2, a0, s1_mean, s2_mean) where a1/a2 have shape
    (..., P, G), a0 (..., P), and the means (..., N, G) are in centered
    coordinates (add ``moments.center`` to recover data coordinates).
    """
    first, second = moments.first, moments.second
    k = first.shape[-1]
    g = np.asarray(grid, dtype=np.int64)
    k1 = g.astype(np.float64)
    k2 = float(k) - k1
    t1 = first[..., -1:]
    t2 = second[..., -1]
    s1 = first[..., g - 1]
    q1 = second[..., g - 1]
    s2 = t1 - s1
    q2 = t2[..., None] - q1
    pairs = moments.pairs
    a1 = np.empty_like(q1)
    a2 = np.empty_like(q2)
    for p, (i, j) in enumerate(pairs):
        a1[..., p, :] = q1[..., p, :] - s1[..., i, :] * s1[..., j, :] / k1
        a2[..., p, :] = q2[..., p, :] - s2[..., i, :] * s2[..., j, :] / k2
    # Whole-window scatter; the centered total first moment is ~0 but is
    # kept in the formula so the identity holds to roundoff, not by fiat.
    t1f = t1[..., 0]
    a0 = np.stack(
        [t2[..., p] - t1f[..., i] * t1f[..., j] / k for p, (i, j) in enumerate(pairs)],
        axis=-1,
    )
    return a1, a2, a0, s1 / k1, s2 / k2


def scatter_all_splits(window: WindowMatrix, grid) -> list[ScatterStats]:
    """Per-split scatter statistics for a whole grid in one cumulative pass.

    Matches calling scatter() once per grid value; the grid must be
    strictly increasing within [1, K-1].
    """
    g = np.asarray(grid, dtype=np.int64)
    if g.size == 0:
        raise ValueError("empty split grid")
    if np.any(g[1:] <= g[:-1]):
        raise ValueError("split grid must be strictly increasing")
    if g[0] < 1 or g[-1] > window.k - 1:
        raise ValueError(f"split grid values outside [1, {window.k - 1}]")
    n, k = window.n, window.k
    moments = cumulative_moments(window.values)
    a1, a2, a0, m1, m2 = _packed_scatter(moments, g)
    center = moments.center
    mean_all = center + moments.first[..., -1] / k
    a0_mat = unpack_symmetric(a0, n)
    out = []
    for idx, split in enumerate(g):
        split = int(split)
        out.append(
            ScatterStats(
                split_index=split,
                count_1=split,
                count_2=k - split,
                mean_1=center + m1[:, idx],
                mean_2=center + m2[:, idx],
                mean_all=mean_all,
                scatter_1=unpack_symmetric(a1[:, idx], n),
                scatter_2=unpack_symmetric(a2[:, idx], n),
                scatter_all=a0_mat,
                valid=(split >= n + 1) and (k - split >= n + 1),
            )
        )
    return out


def gaussian_loglike(samples, mean, cov, pd_rtol: float = PD_RTOL) -> float:
    """Sum of multivariate Gaussian log densities of ``samples``.

    samples: (T, N) array, or a list of MeasurementSample. Used by the
    verification oracles only; the detector fast path never forms
    explicit likelihoods. Raises SingularMatrixError for singular cov.
    """
    if isinstance(samples, (list, tuple)) and samples and isinstance(samples[0], MeasurementSample):
        samples = np.array([s.values for s in samples])
    x = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    mean = np.asarray(mean, dtype=np.float64).reshape(-1)
    n = mean.size
    cov = np.asarray(cov, dtype=np.float64)
    ld = logdet_pd(cov, pd_rtol)  # raises if not PD
    chol = np.linalg.cholesky(cov)
    dev = x - mean[None, :]
    y = np.linalg.solve(chol, dev.T)
    quad = np.sum(y * y)
    t = x.shape[0]
    return -0.5 * t * n * math.log(2.0 * math.pi) - 0.5 * t * ld - 0.5 * quad
