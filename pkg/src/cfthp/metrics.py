"""SINRs, achievable rates, and the ergodic sum-rate aggregation.

Effective channels are computed from first principles: the true channel is
pushed through the assembled precoder and the structure's receiver
normalization, giving a K x K private coupling matrix that reduces to the
identity under perfect CSIT. SINRs follow directly by treating each stream
as a unit-power Gaussian codebook; the common stream sees all private
streams as noise and is removed by SIC before private decoding.

All per-user outputs are indexed by the original user, regardless of the
branch ordering the precoder was built in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .precoding import RsPrecoder


class EffectiveChannels(NamedTuple):
    """Receiver-normalized couplings for one true-channel realization."""

    h_common: np.ndarray    # K complex, common-stream gain per user
    h_private: np.ndarray   # K x K complex, [k, j] = user k's gain from stream j
    noise_gain: np.ndarray  # K real, receiver-normalized noise std per user


@dataclass(frozen=True)
class RateReport:
    """Per-user SINRs and rates plus the scalar aggregates.

    For averaged reports the gamma fields hold mean SINRs (diagnostics) and
    the rate fields hold mean rates; total = common_floor + sum_private.
    """

    gamma_common: np.ndarray
    gamma_private: np.ndarray
    r_common: np.ndarray
    r_private: np.ndarray
    sum_private: float
    common_floor: float
    total: float


def effective_channels(g_true: np.ndarray, precoder: RsPrecoder,
                       noise_std: float) -> EffectiveChannels:
    """Push one true channel through the precoder and receiver scaling."""
    hc, hp, ng = _batch_effective(g_true[np.newaxis], precoder, noise_std)
    return EffectiveChannels(hc[0], hp[0], ng)


def sinr_common(h_common: np.ndarray, h_private: np.ndarray,
                noise_gain: np.ndarray, k: int) -> float:
    """Common-stream SINR at user k with every private stream as interference."""
    interference = float(np.sum(np.abs(h_private[k]) ** 2))
    return float(np.abs(h_common[k]) ** 2 / (interference + noise_gain[k] ** 2))


def sinr_private(h_private: np.ndarray, noise_gain: np.ndarray, k: int) -> float:
    """Private-stream SINR at user k after perfect SIC of the common stream."""
    row = np.abs(h_private[k]) ** 2
    interference = float(np.sum(row) - row[k])
    return float(row[k] / (interference + noise_gain[k] ** 2))


def instantaneous_report(g_true: np.ndarray, precoder: RsPrecoder,
                         noise_std: float) -> RateReport:
    """Rates for a single true-channel realization."""
    return average_rates(precoder, g_true[np.newaxis], noise_std)


def average_rates(precoder: RsPrecoder, g_samples: np.ndarray,
                  noise_std: float) -> RateReport:
    """Mean rates over an (S, M, K) batch of true channels.

    The precoder is fixed (built once from the estimate); the mean is the
    conditional average over the error realizations.
    """
    hc, hp, ng = _batch_effective(g_samples, precoder, noise_std)
    power = np.abs(hp) ** 2                       # (S, K, K)
    row_sum = power.sum(axis=2)                   # (S, K)
    diag = np.einsum("skk->sk", power)            # (S, K)
    noise2 = ng**2                                # (K,)

    gamma_c = np.abs(hc) ** 2 / (row_sum + noise2)
    gamma_p = diag / (row_sum - diag + noise2)
    r_c = np.log2(1.0 + gamma_c)
    r_p = np.log2(1.0 + gamma_p)

    r_c_mean = r_c.mean(axis=0)
    r_p_mean = r_p.mean(axis=0)
    sum_private = float(r_p_mean.sum())
    common_floor = float(r_c_mean.min())
    return RateReport(gamma_c.mean(axis=0), gamma_p.mean(axis=0),
                      r_c_mean, r_p_mean,
                      sum_private, common_floor, common_floor + sum_private)


def esr(reports: Sequence[RateReport]) -> float:
    """Ergodic sum-rate over per-estimate averaged reports: the minimum (over
    users) expected common rate plus the expected sum-private rate."""
    if not reports:
        raise ValueError("need at least one report")
    r_common = np.stack([rep.r_common for rep in reports])
    sum_private = np.array([rep.sum_private for rep in reports])
    return float(r_common.mean(axis=0).min() + sum_private.mean())


def esr_with_stderr(reports: Sequence[RateReport]) -> tuple[float, float]:
    """ESR plus the standard error of the per-estimate totals at the
    common-rate-minimizing user."""
    r_common = np.stack([rep.r_common for rep in reports])
    sum_private = np.array([rep.sum_private for rep in reports])
    k_star = int(np.argmin(r_common.mean(axis=0)))
    totals = r_common[:, k_star] + sum_private
    value = float(totals.mean())
    if len(totals) < 2:
        return value, 0.0
    return value, float(totals.std(ddof=1) / np.sqrt(len(totals)))


def _batch_effective(g_samples: np.ndarray, precoder: RsPrecoder,
                     noise_std: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized effective channels, de-permuted to original user order."""
    perm = precoder.perm
    inv = np.argsort(perm)
    scale = precoder.rx_scale                                   # ordered positions
    g_herm = np.conjugate(np.swapaxes(g_samples, 1, 2))[:, perm, :]  # (S, K, M)

    h_common = scale * (g_herm @ precoder.p_common)             # (S, K)
    h_private = scale[:, np.newaxis] * (g_herm @ precoder.p_private_net)  # (S, K, K)
    noise_gain = scale * noise_std                              # (K,)

    return (h_common[:, inv],
            h_private[:, inv][:, :, inv],
            noise_gain[inv])
