"""Measurement vectors and trace records.

A receiver reports up to three quantities per time instant: SNR in dB,
average noise power in dBm, and instantaneous noise power in dBm. Traces
keep them as a (num_samples, N) float64 array with a parallel tuple of
component roles, always ordered per ROLE_ORDER.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ROLE_SNR = "snr_db"
ROLE_AVG_NOISE = "avg_noise_dbm"
ROLE_INST_NOISE = "inst_noise_dbm"
ROLE_ORDER = (ROLE_SNR, ROLE_AVG_NOISE, ROLE_INST_NOISE)


def normalize_roles(roles) -> tuple[str, ...]:
    """Validate component roles and return them in canonical order."""
    roles = tuple(roles)
    if not 1 <= len(roles) <= 3:
        raise ValueError(f"expected 1 to 3 component roles, got {len(roles)}")
    unknown = [r for r in roles if r not in ROLE_ORDER]
    if unknown:
        raise ValueError(f"unknown component roles: {unknown}")
    if len(set(roles)) != len(roles):
        raise ValueError(f"component roles must be distinct, got {roles}")
    return tuple(r for r in ROLE_ORDER if r in roles)


@dataclass(frozen=True)
class MeasurementSample:
    """One time instant's N-dimensional measurement vector (N in 1..3)."""

    values: tuple[float, ...]
    roles: tuple[str, ...]

    def __post_init__(self):
        roles = normalize_roles(self.roles)
        if roles != tuple(self.roles):
            raise ValueError(f"roles must be in canonical order {roles}, got {self.roles}")
        if len(self.values) != len(roles):
            raise ValueError(
                f"{len(self.values)} values for {len(roles)} roles"
            )
        if not all(np.isfinite(v) for v in self.values):
            raise ValueError(f"non-finite measurement values: {self.values}")

    @property
    def n(self) -> int:
        return len(self.values)


@dataclass
class TraceRecord:
    """A full measurement time series for one experiment run.

    ``values`` has shape (num_samples, N); row t is the sample at time
    index t. ``ground_truth_change`` is the index of the first sample
    drawn from post-change parameters, when known. ``scenario`` is a
    JSON-ready echo of the generating configuration, when synthetic.
    """

    record_id: str
    values: np.ndarray
    roles: tuple[str, ...]
    sample_period: float = 1.0
    ground_truth_change: int | None = None
    scenario: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] == 0:
            raise ValueError(f"values must be a nonempty (samples, N) array, got shape {self.values.shape}")
        self.roles = normalize_roles(self.roles)
        if self.values.shape[1] != len(self.roles):
            raise ValueError(
                f"{self.values.shape[1]} measurement columns for {len(self.roles)} roles"
            )
        if not np.isfinite(self.values).all():
            raise ValueError("trace contains non-finite measurement values")
        if self.sample_period <= 0:
            raise ValueError(f"sample_period must be positive, got {self.sample_period}")
        if self.ground_truth_change is not None and not (
            0 < self.ground_truth_change <= len(self)
        ):
            raise ValueError(
                f"ground_truth_change {self.ground_truth_change} outside (0, {len(self)}]"
            )

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        """Number of measurement components per sample."""
        return self.values.shape[1]

    def sample(self, index: int) -> MeasurementSample:
        return MeasurementSample(tuple(self.values[index]), self.roles)
