"""Change-detection toolkit for cellular air-interface attacks.

Detects jamming (barrage and smart noise-like) and rogue-base-station
activity from commodity receiver measurements (SNR, average and
instantaneous noise power) via log-GLRT statistics on sliding windows,
with Monte Carlo false-alarm calibration, synthetic attack scenarios,
and a CLI harness producing detection-probability curves.
"""

from .detectors import (
    BinaryDetectionTrace,
    DetectionReport,
    DetectorKind,
    NcdVariant,
    SplitGrid,
    apply_threshold,
    batch_statistics,
    integrate_m_of_n,
    mncd_statistic,
    ncd_statistic,
    spd_statistic,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateWindowError,
    InsufficientDataError,
    SingularMatrixError,
    TraceFormatError,
)
from .records import MeasurementSample, ROLE_ORDER, TraceRecord
from .stats import (
    ScatterStats,
    WindowMatrix,
    gaussian_loglike,
    logdet_pd,
    scatter,
    scatter_all_splits,
)

__version__ = "0.1.0"
