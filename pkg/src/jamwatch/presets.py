"""Scenario cookbook: ready-made synthetic attack parameterizations.

Every number here is a synthetic preset, not a measured value. The
baseline receiver model puts the serving cell at 20 dB SNR with a noise
floor near -95 dBm and unit-scale dB fluctuations; attacks are layered
on top of it:

  bnlj_preset   full-band jammer at a given jamming-to-signal ratio.
                With the signal fixed, a J/S of x dB means the jammer
                sits (20 + x) dB above the noise floor, so the noise
                measurements step up by that amount while the SNR drops
                to 20 - (20 + x) = -x dB. Noise variances scale up
                (default 10x) because the jammer's own fluctuations
                dominate the floor.
  rbs_preset    rogue base station: same step signature, gentler rise.
  snlj_preset   hopping jammer: periodic bursts that lift the noise
                measurements and notch the SNR for the burst duration.
  clean_preset  no attack; used for calibration and null validation.

All presets accept overrides for sizes, seeds and effect strengths; the
defaults aim at desk-scale runs that finish in seconds.
"""

from __future__ import annotations

import numpy as np

from .records import ROLE_AVG_NOISE, ROLE_INST_NOISE, ROLE_SNR, normalize_roles
from .scenarios import ScenarioConfig, SpikeTrain

BASELINE_SNR_DB = 20.0

# per-role (mean, variance) of the benign measurement model
_BASELINE = {
    ROLE_SNR: (BASELINE_SNR_DB, 1.0),
    ROLE_AVG_NOISE: (-95.0, 1.0),
    ROLE_INST_NOISE: (-95.0, 4.0),
}
# mild correlation between the two noise measurements
_NOISE_CORRELATION = 0.5


def baseline_mean(roles) -> tuple[float, ...]:
    roles = normalize_roles(roles)
    return tuple(_BASELINE[r][0] for r in roles)


def baseline_cov(roles) -> np.ndarray:
    roles = normalize_roles(roles)
    n = len(roles)
    cov = np.zeros((n, n))
    for i, r in enumerate(roles):
        cov[i, i] = _BASELINE[r][1]
    if ROLE_AVG_NOISE in roles and ROLE_INST_NOISE in roles:
        i = roles.index(ROLE_AVG_NOISE)
        j = roles.index(ROLE_INST_NOISE)
        cov[i, j] = cov[j, i] = _NOISE_CORRELATION * np.sqrt(cov[i, i] * cov[j, j])
    return cov


def _noise_indices(roles) -> list[int]:
    return [i for i, r in enumerate(roles) if r != ROLE_SNR]


def _scaled_noise_cov(cov: np.ndarray, roles, scale: float) -> np.ndarray:
    d = np.ones(len(roles))
    for i in _noise_indices(roles):
        d[i] = np.sqrt(scale)
    return np.diag(d) @ cov @ np.diag(d)


def clean_preset(
    roles=(ROLE_SNR, ROLE_AVG_NOISE),
    total_samples: int = 20000,
    seed: int = 0,
    sample_period: float = 1.0,
) -> ScenarioConfig:
    """Attack-free trace; stationary by construction."""
    roles = normalize_roles(roles)
    mean = baseline_mean(roles)
    cov = tuple(map(tuple, baseline_cov(roles)))
    return ScenarioConfig(
        kind="clean",
        roles=roles,
        total_samples=total_samples,
        change_index=total_samples,
        pre_mean=mean,
        post_mean=mean,
        pre_cov=cov,
        post_cov=cov,
        sample_period=sample_period,
        rng_seed=seed,
    )


def bnlj_preset(
    j_over_s_db: float = 5.0,
    roles=(ROLE_SNR, ROLE_AVG_NOISE),
    total_samples: int = 26809,
    change_index: int | None = None,
    noise_cov_scale: float = 10.0,
    seed: int = 0,
    sample_period: float = 1.0,
) -> ScenarioConfig:
    """Barrage jammer step at the given jamming-to-signal ratio (dB)."""
    roles = normalize_roles(roles)
    if change_index is None:
        change_index = total_samples // 2
    jnr_db = BASELINE_SNR_DB + j_over_s_db  # jammer power over the noise floor
    pre_mean = np.array(baseline_mean(roles))
    post_mean = pre_mean.copy()
    for i, r in enumerate(roles):
        if r == ROLE_SNR:
            post_mean[i] = BASELINE_SNR_DB - jnr_db
        else:
            post_mean[i] += jnr_db
    pre_cov = baseline_cov(roles)
    post_cov = _scaled_noise_cov(pre_cov, roles, noise_cov_scale)
    return ScenarioConfig(
        kind="bnlj",
        roles=roles,
        total_samples=total_samples,
        change_index=change_index,
        pre_mean=tuple(pre_mean),
        post_mean=tuple(post_mean),
        pre_cov=tuple(map(tuple, pre_cov)),
        post_cov=tuple(map(tuple, post_cov)),
        j_over_s_db=j_over_s_db,
        sample_period=sample_period,
        rng_seed=seed,
    )


def rbs_preset(
    roles=(ROLE_AVG_NOISE, ROLE_INST_NOISE),
    total_samples: int = 51844,
    change_index: int | None = None,
    interference_rise_db: float = 8.0,
    noise_cov_scale: float = 10.0,
    seed: int = 0,
    sample_period: float = 1.0,
) -> ScenarioConfig:
    """Rogue-base-station activation: noise-measurement step like a jammer."""
    roles = normalize_roles(roles)
    if change_index is None:
        change_index = total_samples // 2
    pre_mean = np.array(baseline_mean(roles))
    post_mean = pre_mean.copy()
    for i, r in enumerate(roles):
        if r == ROLE_SNR:
            post_mean[i] -= interference_rise_db
        else:
            post_mean[i] += interference_rise_db
    pre_cov = baseline_cov(roles)
    post_cov = _scaled_noise_cov(pre_cov, roles, noise_cov_scale)
    return ScenarioConfig(
        kind="rbs",
        roles=roles,
        total_samples=total_samples,
        change_index=change_index,
        pre_mean=tuple(pre_mean),
        post_mean=tuple(post_mean),
        pre_cov=tuple(map(tuple, pre_cov)),
        post_cov=tuple(map(tuple, post_cov)),
        sample_period=sample_period,
        rng_seed=seed,
    )


def snlj_preset(
    j_over_s_db: float = 5.0,
    roles=(ROLE_AVG_NOISE, ROLE_INST_NOISE),
    total_samples: int = 69641,
    change_index: int | None = None,
    spike_period: int = 1000,
    spike_width: int = 200,
    spike_rise_db: float = 4.0,
    spike_cov_scale: float = 10.0,
    seed: int = 0,
    sample_period: float = 1.0,
) -> ScenarioConfig:
    """Hopping jammer: bursts lift noise measurements and notch the SNR.

    ``spike_rise_db`` sets the burst mean offset, applied positive on
    noise components and negative on the SNR component when present.
    """
    roles = normalize_roles(roles)
    if change_index is None:
        change_index = total_samples // 4
    offset = tuple(
        -spike_rise_db if r == ROLE_SNR else spike_rise_db for r in roles
    )
    mean = baseline_mean(roles)
    cov = tuple(map(tuple, baseline_cov(roles)))
    return ScenarioConfig(
        kind="snlj",
        roles=roles,
        total_samples=total_samples,
        change_index=change_index,
        pre_mean=mean,
        post_mean=mean,
        pre_cov=cov,
        post_cov=cov,
        snlj=SpikeTrain(
            period=spike_period,
            width=spike_width,
            mean_offset=offset,
            cov_scale=spike_cov_scale,
        ),
        j_over_s_db=j_over_s_db,
        sample_period=sample_period,
        rng_seed=seed,
    )


PRESETS = {
    "clean": clean_preset,
    "bnlj": bnlj_preset,
    "rbs": rbs_preset,
    "snlj": snlj_preset,
}
