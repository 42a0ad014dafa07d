"""Seeded synthetic measurement-trace generators.

Four trace kinds cover the attack playbook plus the benign reference:

  clean  i.i.d. Gaussian draws around a pre-change mean, optionally
         switching to a second mean at the change index under the same
         covariance (benign environment drift).
  bnlj   barrage noise-like jammer: an abrupt step of means and
         covariance at the change index.
  snlj   smart (frequency-hopping) noise-like jammer: periodic bursts
         after the change index, each shifting the mean and scaling the
         covariance for the burst duration.
  rbs    rogue base station: same step signature as bnlj with its own
         parameter presets.

All draws derive from one standard-normal stream shaped by Cholesky
factors, so a null attack (identical pre/post parameters, or zero-effect
bursts) reproduces the clean trace bit for bit under the same seed.
Records regenerate deterministically from (seed, record_id) regardless
of generation order.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError, SingularMatrixError
from .records import TraceRecord, normalize_roles
from .stats import logdet_pd

KINDS = ("clean", "bnlj", "snlj", "rbs")
STEP_KINDS = ("bnlj", "rbs")


@dataclass(frozen=True)
class SpikeTrain:
    """Burst geometry for the hopping jammer, in samples.

    Bursts are rectangular: onset at the change index and every
    ``period`` samples after it, each lasting ``width`` samples, with
    the mean shifted by ``mean_offset`` and the covariance scaled by
    ``cov_scale`` for the burst duration.
    """

    period: int
    width: int
    mean_offset: tuple[float, ...]
    cov_scale: float = 10.0

    def __post_init__(self):
        if self.period < 1:
            raise ConfigError("must be a positive sample count", field="snlj.period")
        if not 0 < self.width < self.period:
            raise ConfigError(
                f"width {self.width} must lie in (0, period={self.period})",
                field="snlj.width",
            )
        if self.cov_scale <= 0:
            raise ConfigError("must be positive", field="snlj.cov_scale")


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameterization of one synthetic trace family."""

    kind: str
    roles: tuple[str, ...]
    total_samples: int
    change_index: int
    pre_mean: tuple[float, ...]
    post_mean: tuple[float, ...]
    pre_cov: tuple[tuple[float, ...], ...]
    post_cov: tuple[tuple[float, ...], ...]
    snlj: SpikeTrain | None = None
    j_over_s_db: float | None = None
    sample_period: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}, expected one of {KINDS}", field="kind")
        object.__setattr__(self, "roles", normalize_roles(self.roles))
        n = len(self.roles)
        if self.total_samples < 1:
            raise ConfigError("must be positive", field="total_samples")
        if not 0 < self.change_index <= self.total_samples:
            raise ConfigError(
                f"{self.change_index} outside (0, total_samples={self.total_samples}]",
                field="change_index",
            )
        for name in ("pre_mean", "post_mean"):
            vec = np.asarray(getattr(self, name), dtype=float)
            if vec.shape != (n,):
                raise ConfigError(f"expected {n} components, got shape {vec.shape}", field=name)
            if not np.isfinite(vec).all():
                raise ConfigError("non-finite component", field=name)
            object.__setattr__(self, name, tuple(float(v) for v in vec))
        for name in ("pre_cov", "post_cov"):
            mat = np.asarray(getattr(self, name), dtype=float)
            if mat.shape != (n, n):
                raise ConfigError(f"expected {n}x{n} matrix, got shape {mat.shape}", field=name)
            if not np.allclose(mat, mat.T, rtol=1e-12, atol=0.0):
                raise ConfigError("matrix not symmetric", field=name)
            try:
                logdet_pd(mat)
            except SingularMatrixError as exc:
                raise ConfigError(f"not positive definite ({exc})", field=name) from None
            object.__setattr__(self, name, tuple(tuple(float(v) for v in row) for row in mat))
        if self.kind == "snlj":
            if self.snlj is None:
                raise ConfigError("required for kind 'snlj'", field="snlj")
            if len(self.snlj.mean_offset) != n:
                raise ConfigError(
                    f"expected {n} components, got {len(self.snlj.mean_offset)}",
                    field="snlj.mean_offset",
                )
        if self.sample_period <= 0:
            raise ConfigError("must be positive", field="sample_period")

    @property
    def n(self) -> int:
        return len(self.roles)

    def has_change(self) -> bool:
        """Whether the configured trace actually changes at change_index."""
        if self.change_index >= self.total_samples:
            return False
        if self.kind == "clean":
            return self.pre_mean != self.post_mean
        if self.kind in STEP_KINDS:
            return self.pre_mean != self.post_mean or self.pre_cov != self.post_cov
        spikes = self.snlj
        return any(v != 0.0 for v in spikes.mean_offset) or spikes.cov_scale != 1.0

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        if not isinstance(data, dict):
            raise ConfigError("scenario config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown fields: {sorted(unknown)}")
        missing = {"kind", "roles", "total_samples", "change_index",
                   "pre_mean", "post_mean", "pre_cov", "post_cov"} - set(data)
        if missing:
            raise ConfigError(f"missing fields: {sorted(missing)}")
        kwargs = dict(data)
        if kwargs.get("snlj") is not None:
            spikes = kwargs["snlj"]
            if not isinstance(spikes, dict):
                raise ConfigError("must be an object", field="snlj")
            extra = set(spikes) - {f for f in SpikeTrain.__dataclass_fields__}
            if extra:
                raise ConfigError(f"unknown fields: {sorted(extra)}", field="snlj")
            try:
                kwargs["snlj"] = SpikeTrain(
                    period=spikes["period"],
                    width=spikes["width"],
                    mean_offset=tuple(spikes["mean_offset"]),
                    cov_scale=spikes.get("cov_scale", 10.0),
                )
            except KeyError as exc:
                raise ConfigError("missing field", field=f"snlj.{exc.args[0]}") from None
        kwargs["roles"] = tuple(kwargs["roles"])
        return cls(**kwargs)

    @classmethod
    def from_json_file(cls, path) -> "ScenarioConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"invalid JSON in {path}: {exc}") from None
        return cls.from_dict(data)


def derive_record_seed(master_seed: int, record_id: str) -> int:
    """Stable per-record seed so parallel generation order cannot matter."""
    digest = hashlib.sha256(f"{master_seed}:{record_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _chol(cov) -> np.ndarray:
    return np.linalg.cholesky(np.asarray(cov, dtype=float))


def _spike_mask(config: ScenarioConfig) -> np.ndarray:
    mask = np.zeros(config.total_samples, dtype=bool)
    spikes = config.snlj
    onset = config.change_index
    while onset < config.total_samples:
        mask[onset : min(onset + spikes.width, config.total_samples)] = True
        onset += spikes.period
    return mask


def _record(config: ScenarioConfig, values: np.ndarray, record_id: str) -> TraceRecord:
    return TraceRecord(
        record_id=record_id,
        values=values,
        roles=config.roles,
        sample_period=config.sample_period,
        ground_truth_change=config.change_index if config.has_change() else None,
        scenario=config.to_dict(),
    )


def generate_clean(config: ScenarioConfig, seed: int | None = None,
                   record_id: str = "clean-0") -> TraceRecord:
    """Gaussian trace with a possible benign mean step at the change index."""
    if config.kind != "clean":
        raise ConfigError(f"expected kind 'clean', got {config.kind!r}", field="kind")
    rng = np.random.default_rng(config.rng_seed if seed is None else seed)
    noise = rng.standard_normal((config.total_samples, config.n)) @ _chol(config.pre_cov).T
    values = noise + np.asarray(config.pre_mean)
    ci = config.change_index
    if ci < config.total_samples:
        values[ci:] = noise[ci:] + np.asarray(config.post_mean)
    return _record(config, values, record_id)


def generate_step_attack(config: ScenarioConfig, seed: int | None = None,
                         record_id: str | None = None) -> TraceRecord:
    """Step change of mean and covariance at the change index (bnlj, rbs)."""
    if config.kind not in STEP_KINDS:
        raise ConfigError(f"expected kind in {STEP_KINDS}, got {config.kind!r}", field="kind")
    rng = np.random.default_rng(config.rng_seed if seed is None else seed)
    white = rng.standard_normal((config.total_samples, config.n))
    values = white @ _chol(config.pre_cov).T + np.asarray(config.pre_mean)
    ci = config.change_index
    if ci < config.total_samples:
        values[ci:] = white[ci:] @ _chol(config.post_cov).T + np.asarray(config.post_mean)
    return _record(config, values, record_id or f"{config.kind}-0")


def generate_snlj(config: ScenarioConfig, seed: int | None = None,
                  record_id: str = "snlj-0") -> TraceRecord:
    """Baseline trace with periodic mean-shift/covariance-scale bursts."""
    if config.kind != "snlj":
        raise ConfigError(f"expected kind 'snlj', got {config.kind!r}", field="kind")
    rng = np.random.default_rng(config.rng_seed if seed is None else seed)
    noise = rng.standard_normal((config.total_samples, config.n)) @ _chol(config.pre_cov).T
    values = noise + np.asarray(config.pre_mean)
    mask = _spike_mask(config)
    spikes = config.snlj
    values[mask] = (
        np.asarray(config.pre_mean)
        + np.asarray(spikes.mean_offset)
        + np.sqrt(spikes.cov_scale) * noise[mask]
    )
    return _record(config, values, record_id)


def generate_record(config: ScenarioConfig, record_id: str,
                    master_seed: int | None = None) -> TraceRecord:
    """Generate one record of the configured kind with a per-record seed."""
    seed = derive_record_seed(
        config.rng_seed if master_seed is None else master_seed, record_id
    )
    if config.kind == "clean":
        return generate_clean(config, seed, record_id)
    if config.kind in STEP_KINDS:
        return generate_step_attack(config, seed, record_id)
    return generate_snlj(config, seed, record_id)
