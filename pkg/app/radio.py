"""Millimeter-wave propagation: path loss, LOS probability and outage.

The outage at a point is a LOS/NLOS mixture of Gaussian-shadowed SNRs
(noise limited, no interference):

    p_out(d) = p_los(d) * Phi((gamma - mu_L(d)) / sigma_L)
             + (1 - p_los(d)) * Phi((gamma - mu_N(d)) / sigma_N)

with mu_state(d) = P_t - L_state(d) - noise.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm

from app.errors import DomainError
from models import ChannelParams, Instance, RadioParams

logger = logging.getLogger(__name__)

GRID_STEP_M = 0.1


@dataclass(frozen=True)
class LinkBudget:
    mean_pathloss_los_db: float
    mean_pathloss_nlos_db: float
    p_los: float
    mean_snr_los_db: float
    mean_snr_nlos_db: float


@dataclass(frozen=True)
class CoverageThresholds:
    """Distance limits derived from the outage constraint (D_it / D_kt)."""

    d_max_access_m: float
    d_max_backhaul_m: float


def _check_distance(d) -> None:
    if np.any(np.asarray(d) <= 0):
        raise DomainError(f"distance must be positive, got {d}")


def mean_path_loss(d: float, channel: ChannelParams, los: bool) -> float:
    """Deterministic part of the close-in path loss in dB (no shadowing)."""
    _check_distance(d)
    return float(_mean_path_loss(np.asarray(d, dtype=float), channel, los))


def _mean_path_loss(d: np.ndarray, channel: ChannelParams, los: bool) -> np.ndarray:
    d0 = channel.ref_dist_m
    exponent = channel.pathloss_exp_los if los else channel.pathloss_exp_nlos
    fspl = 20.0 * math.log10(4.0 * math.pi * d0 / channel.wavelength_m)
    return fspl + 10.0 * exponent * np.log10(np.maximum(d, d0) / d0)


def p_los(d: float, channel: ChannelParams) -> float:
    """Probability that a link of length d has line of sight."""
    if d < 0:
        raise DomainError(f"distance must be nonnegative, got {d}")
    return math.exp(-channel.beta_los * d)


def link_budget(d: float, channel: ChannelParams, radio: RadioParams) -> LinkBudget:
    los_db = mean_path_loss(d, channel, los=True)
    nlos_db = mean_path_loss(d, channel, los=False)
    return LinkBudget(
        mean_pathloss_los_db=los_db,
        mean_pathloss_nlos_db=nlos_db,
        p_los=p_los(d, channel),
        mean_snr_los_db=radio.tx_power_dbm - los_db - radio.noise_dbm,
        mean_snr_nlos_db=radio.tx_power_dbm - nlos_db - radio.noise_dbm,
    )


def outage_curve(
    distances: np.ndarray,
    channel: ChannelParams,
    radio: RadioParams,
    snr_threshold_db: Optional[float] = None,
    gain_db: float = 0.0,
) -> np.ndarray:
    """Vectorized outage probability for an array of positive distances.

    gain_db is added to the mean SNR (directional backhaul antennas).
    """
    d = np.asarray(distances, dtype=float)
    _check_distance(d)
    gamma = radio.snr_threshold_db if snr_threshold_db is None else snr_threshold_db
    mu_los = radio.tx_power_dbm + gain_db - _mean_path_loss(d, channel, los=True) - radio.noise_dbm
    mu_nlos = radio.tx_power_dbm + gain_db - _mean_path_loss(d, channel, los=False) - radio.noise_dbm
    los = np.exp(-channel.beta_los * d)
    out = los * norm.cdf((gamma - mu_los) / channel.shadow_sigma_los_db) + (1.0 - los) * norm.cdf(
        (gamma - mu_nlos) / channel.shadow_sigma_nlos_db
    )
    return np.clip(out, 0.0, 1.0)


def outage_probability(
    d: float,
    channel: ChannelParams,
    radio: RadioParams,
    snr_threshold_db: Optional[float] = None,
    gain_db: float = 0.0,
) -> float:
    """Probability that the SNR at distance d falls below the threshold."""
    return float(outage_curve(np.asarray([d]), channel, radio, snr_threshold_db, gain_db)[0])


def coverage_distance(
    channel: ChannelParams,
    radio: RadioParams,
    cap_m: float,
    snr_threshold_db: Optional[float] = None,
    outage_max: Optional[float] = None,
    gain_db: float = 0.0,
) -> float:
    """Largest grid distance whose outage (and that of every shorter grid point) meets p_oa.

    Scans upward from d0 in 0.1 m steps. Returns 0 when even d0 fails and cap_m
    when no grid point up to the cap fails.
    """
    p_oa = radio.outage_max if outage_max is None else outage_max
    d0 = channel.ref_dist_m
    if cap_m <= 0:
        return 0.0
    steps = int(math.floor(max(cap_m - d0, 0.0) / GRID_STEP_M + 1e-9))
    grid = d0 + GRID_STEP_M * np.arange(steps + 1)
    curve = outage_curve(grid, channel, radio, snr_threshold_db, gain_db)
    failing = np.flatnonzero(curve > p_oa)
    if failing.size == 0:
        return float(cap_m)
    first = int(failing[0])
    if first == 0:
        return 0.0
    return float(round(grid[first - 1], 10))


def compute_thresholds(instance: Instance) -> CoverageThresholds:
    """Access and backhaul coverage distances shared by all sites of an instance."""
    cap = instance.area.diagonal
    access = coverage_distance(instance.access_channel, instance.radio, cap)
    backhaul = coverage_distance(
        instance.backhaul_channel,
        instance.radio,
        cap,
        snr_threshold_db=instance.radio.backhaul_snr_threshold_db,
        gain_db=instance.radio.backhaul_antenna_gain_db,
    )
    logger.debug(f"Coverage distances: access {access} m, backhaul {backhaul} m")
    return CoverageThresholds(d_max_access_m=access, d_max_backhaul_m=backhaul)
