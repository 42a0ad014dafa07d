"""Figure rendering for traces, detection runs, and Pd curves.

Figures are written next to the CSV outputs they illustrate; the CSVs
remain the canonical artifacts.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import DetectionRun, PdCurve
from .records import TraceRecord

_ROLE_LABELS = {
    "snr_db": "SNR [dB]",
    "avg_noise_dbm": "avg noise [dBm]",
    "inst_noise_dbm": "inst noise [dBm]",
}


def plot_trace(record: TraceRecord, path, max_points: int = 20000):
    """Per-component measurement series with the change instant marked."""
    step = max(1, len(record) // max_points)
    t = np.arange(0, len(record), step)
    fig, axes = plt.subplots(record.n, 1, sharex=True, figsize=(8, 1.8 * record.n + 1))
    axes = np.atleast_1d(axes)
    for i, (ax, role) in enumerate(zip(axes, record.roles)):
        ax.plot(t, record.values[::step, i], lw=0.6)
        ax.set_ylabel(_ROLE_LABELS.get(role, role), fontsize=8)
        if record.ground_truth_change is not None:
            ax.axvline(record.ground_truth_change, color="r", ls="--", lw=0.8)
        ax.grid(alpha=0.3)
    axes[-1].set_xlabel("sample number")
    fig.suptitle(record.record_id)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_detection(run: DetectionRun, path):
    """Statistic-versus-position with the threshold, plus the binary trace."""
    fig, (ax1, ax2) = plt.subplots(
        2, 1, sharex=True, figsize=(8, 5), height_ratios=[2, 1]
    )
    ax1.plot(run.positions, run.statistics, ".-", ms=3, lw=0.8, label=run.detector.value)
    if np.isfinite(run.threshold):
        ax1.axhline(run.threshold, color="r", ls="--", lw=0.8, label="threshold")
    if run.ground_truth is not None:
        ax1.axvline(run.ground_truth, color="g", ls=":", lw=0.8, label="change")
    ax1.set_ylabel("statistic")
    ax1.legend(fontsize=8)
    ax1.grid(alpha=0.3)
    ax2.step(run.positions, run.detections, where="post", lw=0.9, label="raw")
    if run.integrated is not None:
        ax2.step(run.positions, run.integrated, where="post", lw=0.9, label="integrated")
        ax2.legend(fontsize=8)
    ax2.set_ylim(-0.1, 1.1)
    ax2.set_ylabel("detected")
    ax2.set_xlabel("window position [decimated samples]")
    ax2.grid(alpha=0.3)
    fig.suptitle(f"{run.record_id}: {run.detector.value}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_pd_curves(curves: list[PdCurve], path):
    """Detection probability versus window position, one line per detector."""
    fig, ax = plt.subplots(figsize=(8, 4))
    for curve in curves:
        name = curve.detector.value + (f" ({curve.label})" if curve.label else "")
        ax.plot(curve.positions, curve.pd, ".-", ms=3, lw=0.9, label=name)
    ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel(
        "window position [decimated samples"
        + (", relative to change]" if curves and curves[0].aligned else "]")
    )
    ax.set_ylabel("Pd")
    ax.grid(alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
