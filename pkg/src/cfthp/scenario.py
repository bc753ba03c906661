"""Network geometry and large-scale propagation quantities.

Implements the three-slope path loss model with log-normal shadowing, the
thermal noise figure, and the transmit power implied by a target SNR. All
large-scale coefficients are kept in linear scale (watt ratios).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

BOLTZMANN_J_PER_K = 1.381e-23


class ZeroChannel(ValueError):
    """The channel carries no energy; the SNR-to-power mapping is undefined."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Physical network parameters. Defaults give the 12-AP / 3-user setup."""

    num_aps: int = 12
    num_users: int = 3
    side_m: float = 400.0
    freq_mhz: float = 1900.0
    ap_height_m: float = 15.0
    user_height_m: float = 1.65
    d0_m: float = 10.0
    d1_m: float = 50.0
    shadow_sigma_db: float = 8.0
    bandwidth_hz: float = 50e6
    noise_figure_db: float = 10.0
    noise_temp_k: float = 290.0

    def __post_init__(self) -> None:
        if self.num_users < 1 or self.num_aps <= self.num_users:
            raise ValueError("need num_aps > num_users >= 1 (underloaded regime)")
        if not self.d0_m < self.d1_m:
            raise ValueError("need d0_m < d1_m")
        for name in ("side_m", "freq_mhz", "ap_height_m", "user_height_m", "d0_m",
                     "bandwidth_hz", "noise_temp_k"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


class Geometry(NamedTuple):
    """AP and user coordinates in meters, each an (n, 2) array inside the square."""

    ap_positions: np.ndarray
    user_positions: np.ndarray


def attenuation_db(cfg: ScenarioConfig) -> float:
    """Fixed attenuation constant of the path loss model, in dB."""
    logf = np.log10(cfg.freq_mhz)
    return float(
        46.3
        + 33.9 * logf
        - 13.82 * np.log10(cfg.ap_height_m)
        - (1.1 * logf - 0.7) * cfg.user_height_m
        + (1.56 * logf - 0.8)
    )


def path_loss_db(d_m: float, cfg: ScenarioConfig) -> float:
    """Three-slope path loss in dB at AP-user distance ``d_m``.

    The model is discontinuous at ``d1_m`` by construction; the boundary
    d == d1 falls in the middle branch and d == d0 in the bottom one.
    """
    big_l = attenuation_db(cfg)
    if d_m > cfg.d1_m:
        return -big_l - 35.0 * np.log10(d_m)
    if d_m > cfg.d0_m:
        return -big_l - 15.0 * np.log10(cfg.d1_m) - 20.0 * np.log10(d_m)
    return -big_l - 15.0 * np.log10(cfg.d1_m) - 20.0 * np.log10(cfg.d0_m)


def noise_variance_w(cfg: ScenarioConfig) -> float:
    """Thermal noise power T0 * kB * B * Nf in watts (Nf converted from dB)."""
    nf_linear = 10.0 ** (cfg.noise_figure_db / 10.0)
    return cfg.noise_temp_k * BOLTZMANN_J_PER_K * cfg.bandwidth_hz * nf_linear


def sample_scenario(cfg: ScenarioConfig, rng: np.random.Generator) -> tuple[Geometry, np.ndarray]:
    """Draw AP/user positions uniformly on the square and build the M x K
    large-scale fading matrix zeta (linear scale, path loss times shadowing)."""
    ap_pos = rng.uniform(0.0, cfg.side_m, size=(cfg.num_aps, 2))
    user_pos = rng.uniform(0.0, cfg.side_m, size=(cfg.num_users, 2))
    geometry = Geometry(ap_pos, user_pos)

    shadow = rng.standard_normal((cfg.num_aps, cfg.num_users))
    zeta = np.empty((cfg.num_aps, cfg.num_users))
    for m in range(cfg.num_aps):
        for k in range(cfg.num_users):
            d = float(np.hypot(*(ap_pos[m] - user_pos[k])))
            p_db = path_loss_db(d, cfg) + cfg.shadow_sigma_db * shadow[m, k]
            zeta[m, k] = 10.0 ** (p_db / 10.0)
    return geometry, zeta


def transmit_power_for_snr(target_snr_db: float, g_true: np.ndarray,
                           cfg: ScenarioConfig) -> float:
    """Transmit power P_t realizing the target SNR for this channel draw.

    SNR is defined as P_t * Tr(G^H G) / (M * K * sigma_n^2), so
    P_t = snr_linear * M * K * sigma_n^2 / Tr(G^H G).
    """
    trace = float(np.sum(np.abs(g_true) ** 2))
    if trace < 1e-30:
        raise ZeroChannel("Tr(G^H G) is numerically zero")
    snr_linear = 10.0 ** (target_snr_db / 10.0)
    m, k = g_true.shape
    return snr_linear * m * k * noise_variance_w(cfg) / trace
