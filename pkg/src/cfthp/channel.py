"""Channel draws, the imperfect-CSIT estimate model, and AP selection.

The estimate model is
    g_hat = sqrt(zeta) * (sqrt(1 - sigma_e^2) * h + sigma_e * h_err)
with h, h_err i.i.d. unit complex Gaussians, so the per-entry variance of
the estimate equals zeta regardless of the error level. AP selection keeps,
per user, the ``cluster_size`` APs with the largest large-scale coefficient
and zeroes the estimate elsewhere, producing the sparse equivalent channel
the precoders are built on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateModel(ValueError):
    """sigma_e^2 >= 1 leaves no signal component to condition on."""


@dataclass(frozen=True)
class ChannelSet:
    """One channel draw: truth, estimate, and the AP-selected sparse estimate."""

    g_true: np.ndarray      # M x K
    g_hat: np.ndarray       # M x K
    sigma_e2: float
    clusters: np.ndarray    # K x cluster_size AP indices, sorted ascending
    g_bar: np.ndarray       # M x K, g_hat masked to the clusters


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """I.i.d. CN(0, 1) samples: real and imaginary parts each with variance 1/2."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_true_channel(zeta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw g[m, k] = sqrt(zeta[m, k]) * h with h ~ CN(0, 1)."""
    return np.sqrt(zeta) * complex_normal(rng, zeta.shape)


def estimate_from_error(h: np.ndarray, zeta: np.ndarray, sigma_e2: float,
                        h_err: np.ndarray) -> np.ndarray:
    """Channel estimate for a given small-scale truth and error realization."""
    if not 0.0 <= sigma_e2 < 1.0:
        raise ValueError("sigma_e2 must lie in [0, 1)")
    return np.sqrt(zeta) * (np.sqrt(1.0 - sigma_e2) * h + np.sqrt(sigma_e2) * h_err)


def corrupt_csit(h: np.ndarray, zeta: np.ndarray, sigma_e2: float,
                 rng: np.random.Generator) -> np.ndarray:
    """Build the channel estimate from the small-scale truth ``h`` and a fresh
    error draw. ``sigma_e2`` is the CSIT error variance in [0, 1)."""
    return estimate_from_error(h, zeta, sigma_e2, complex_normal(rng, h.shape))


def select_aps(g_hat: np.ndarray, zeta: np.ndarray,
               cluster_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Pick, for each user, the ``cluster_size`` APs with largest zeta.

    Ties break toward the lowest AP index. Returns (clusters, g_bar) where
    g_bar equals g_hat on the selected entries and exactly zero elsewhere.
    """
    m, k = zeta.shape
    if not 1 <= cluster_size <= m:
        raise ValueError(f"cluster_size must be in [1, {m}]")
    clusters = np.empty((k, cluster_size), dtype=int)
    g_bar = np.zeros_like(g_hat)
    for user in range(k):
        order = np.argsort(-zeta[:, user], kind="stable")
        chosen = np.sort(order[:cluster_size])
        clusters[user] = chosen
        g_bar[chosen, user] = g_hat[chosen, user]
    return clusters, g_bar


def conditional_from_errors(g_hat: np.ndarray, zeta: np.ndarray, sigma_e2: float,
                            h_err: np.ndarray) -> np.ndarray:
    """True channels consistent with the estimate for given error draws.

    Inverts the estimate model: h = (g_hat / sqrt(zeta) - sigma_e * h_err)
    / sqrt(1 - sigma_e^2), g = sqrt(zeta) * h. ``h_err`` may carry leading
    batch dimensions.
    """
    if sigma_e2 >= 1.0:
        raise DegenerateModel("sigma_e2 >= 1 admits no consistent true channel")
    sigma_e = np.sqrt(sigma_e2)
    h_hat = g_hat / np.sqrt(zeta)
    h = (h_hat - sigma_e * h_err) / np.sqrt(1.0 - sigma_e2)
    return np.sqrt(zeta) * h


def conditional_true_channels(g_hat: np.ndarray, zeta: np.ndarray, sigma_e2: float,
                              count: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``count`` true-channel realizations consistent with ``g_hat``,
    returned as a (count, M, K) array."""
    h_err = complex_normal(rng, (count,) + g_hat.shape)
    return conditional_from_errors(g_hat, zeta, sigma_e2, h_err)
