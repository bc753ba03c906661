"""Tomlinson-Harashima filter construction and the rate-splitting precoders.

Filter triple for the private streams, from an LQ factorization of the
(ordered, AP-selected) channel G^H = L Q:

    feedforward  F = Q^H
    scaling      C = diag(l_11, ..., l_KK)   (real > 0 by the LQ phase rule)
    feedback     B = L C^-1   (centralized)  or  C^-1 L  (decentralized)

Both feedback variants are unit lower triangular, as the successive
modulo loop requires. The net map applied to the perturbed symbols
s_check = B v is

    centralized    X = beta * Q^H L^-1      ->  G^H X = beta * I
    decentralized  X = beta * Q^H L^-1 C    ->  G^H X = beta * C

so receivers recover s_check by scaling with 1/beta (centralized) or
1/(beta * l_kk) (decentralized). Transmit power is budgeted under the
standard assumption that the loop output v is unit-variance white; the
realized map applied to v is X @ B, whose Frobenius norm is the private
power accounted against the budget P_t - ||p_c||^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .linalg import lq_decompose, solve_lower_triangular, svd

CENTRALIZED = "centralized"
DECENTRALIZED = "decentralized"
LINEAR = "linear"

# Modulo lattice spacing for unit-variance QPSK.
DEFAULT_LAMBDA = 2.0 * np.sqrt(2.0)


class PowerExhausted(ValueError):
    """The common stream already consumes the whole power budget."""


@dataclass(frozen=True)
class ThpFilters:
    """Feedforward/feedback/scaling triple plus the power scaling factor."""

    feedforward: np.ndarray   # M x K, Q^H
    feedback: np.ndarray      # K x K, unit lower triangular
    scaling: np.ndarray       # K real positives, diag(L)
    structure: str            # CENTRALIZED or DECENTRALIZED
    beta: float


@dataclass(frozen=True)
class RsPrecoder:
    """Common precoder plus the net private map for one channel estimate.

    ``p_private_net`` maps the perturbed symbols s_check to the antennas;
    ``private_power`` is the transmit power of the private part under a
    unit-variance loop output (equals ||p_private_net @ B||_F^2).
    ``perm`` records the user ordering the filters were built in.
    """

    p_common: np.ndarray          # M
    p_private_net: np.ndarray     # M x K
    filters: Optional[ThpFilters]  # None for the linear ZF baseline
    perm: np.ndarray               # K ints
    p_t: float
    private_power: float
    structure: str = field(default="")

    @property
    def common_power(self) -> float:
        return float(np.vdot(self.p_common, self.p_common).real)

    @property
    def rx_scale(self) -> np.ndarray:
        """Receiver normalization per ordered stream position."""
        k = self.p_private_net.shape[1]
        if self.filters is None:
            return np.ones(k)
        if self.filters.structure == CENTRALIZED:
            return np.full(k, 1.0 / self.filters.beta)
        return 1.0 / (self.filters.beta * self.filters.scaling)

    @property
    def feedback(self) -> np.ndarray:
        if self.filters is None:
            return np.eye(self.p_private_net.shape[1], dtype=complex)
        return self.filters.feedback


@dataclass(frozen=True)
class PerturbedSymbols:
    """Loop output v, the implied perturbation d, and s_check = s + d = B v."""

    s_check: np.ndarray
    d: np.ndarray
    v: np.ndarray


def modulo(x, lam: float = DEFAULT_LAMBDA):
    """Complex modulo folding real and imaginary parts into [-lam/2, lam/2)."""
    if lam <= 0:
        raise ValueError("lambda must be positive")
    x = np.asarray(x, dtype=complex)
    out = (
        x
        - np.floor(x.real / lam + 0.5) * lam
        - 1j * np.floor(x.imag / lam + 0.5) * lam
    )
    return out if out.ndim else complex(out)


def build_thp_filters(g_ordered_herm: np.ndarray, structure: str, p_common: np.ndarray,
                      p_t: float, cthp_power_norm: str = "trace") -> ThpFilters:
    """Construct the filter triple from the K x M ordered channel G^H.

    ``cthp_power_norm`` selects the centralized beta normalization:
    "trace" uses ||L^-1||_F^2 (satisfies the sum-power constraint exactly for
    the net map on s_check) and "diag" uses sum_k 1/l_kk^2 (exact under the
    white loop-output assumption).
    """
    if structure not in (CENTRALIZED, DECENTRALIZED):
        raise ValueError(f"unknown THP structure {structure!r}")
    budget = p_t - float(np.vdot(p_common, p_common).real)
    if budget <= 0.0:
        raise PowerExhausted("common precoder power >= P_t")

    l, q = lq_decompose(g_ordered_herm)
    k = l.shape[0]
    scaling = np.diagonal(l).real.copy()

    if structure == CENTRALIZED:
        feedback = l / scaling[np.newaxis, :]
        if cthp_power_norm == "trace":
            l_inv = solve_lower_triangular(l, np.eye(k, dtype=complex))
            denom = float(np.sum(np.abs(l_inv) ** 2))
        elif cthp_power_norm == "diag":
            denom = float(np.sum(1.0 / scaling**2))
        else:
            raise ValueError(f"unknown cthp_power_norm {cthp_power_norm!r}")
    else:
        feedback = l / scaling[:, np.newaxis]
        denom = float(k)
    feedback[np.arange(k), np.arange(k)] = 1.0

    beta = float(np.sqrt(budget / denom))
    return ThpFilters(q.conj().T, feedback, scaling, structure, beta)


def thp_encode(s: np.ndarray, filters: ThpFilters,
               lam: float = DEFAULT_LAMBDA) -> PerturbedSymbols:
    """Run the successive modulo-feedback loop over the symbol vector ``s``."""
    b = filters.feedback
    k = b.shape[0]
    v = np.zeros(k, dtype=complex)
    for i in range(k):
        v[i] = modulo(s[i] - b[i, :i] @ v[:i], lam)
    s_check = b @ v
    return PerturbedSymbols(s_check, s_check - np.asarray(s, dtype=complex), v)


def assemble_private_precoder(filters: ThpFilters) -> np.ndarray:
    """Net transmit map X applied to s_check (M x K).

    Satisfies G^H X = beta*I (centralized) or beta*C (decentralized) on the
    channel estimate the filters were built from.
    """
    k = filters.feedback.shape[0]
    if filters.structure == CENTRALIZED:
        # X = beta Q^H L^-1 with L = B C
        l = filters.feedback * filters.scaling[np.newaxis, :]
    else:
        # X = beta Q^H B^-1
        l = filters.feedback
    inv = solve_lower_triangular(l, np.eye(k, dtype=complex))
    return filters.beta * (filters.feedforward @ inv)


def common_precoder(g_bar: np.ndarray, alpha_c: float, p_t: float) -> np.ndarray:
    """Common-stream precoder: the dominant right singular vector of G^H
    scaled to carry power alpha_c * P_t. alpha_c = 0 disables rate splitting."""
    if not 0.0 <= alpha_c < 1.0:
        raise ValueError("alpha_c must lie in [0, 1)")
    m = g_bar.shape[0]
    if alpha_c == 0.0:
        return np.zeros(m, dtype=complex)
    factors = svd(g_bar.conj().T)
    return np.sqrt(alpha_c * p_t) * factors.v[:, 0]


def linear_zf_precoder(g_bar: np.ndarray, p_t: float, p_common: np.ndarray) -> np.ndarray:
    """Sum-power-normalized zero-forcing baseline G (G^H G)^-1 * c.

    The whole pseudoinverse is scaled by one constant so that the private
    part spends exactly P_t - ||p_common||^2; G^H P is then c * I.
    """
    budget = p_t - float(np.vdot(p_common, p_common).real)
    if budget <= 0.0:
        raise PowerExhausted("common precoder power >= P_t")
    l, q = lq_decompose(g_bar.conj().T)
    pinv = q.conj().T @ solve_lower_triangular(l, np.eye(l.shape[0], dtype=complex))
    scale = np.sqrt(budget / np.sum(np.abs(pinv) ** 2))
    return scale * pinv


def make_rs_precoder(g_bar: np.ndarray, structure: str, alpha_c: float, p_t: float,
                     perm: np.ndarray | None = None,
                     cthp_power_norm: str = "trace") -> RsPrecoder:
    """Assemble the full rate-splitting precoder for one channel estimate.

    ``perm`` is the user ordering (ordered position -> user index); identity
    when omitted. ``structure`` is CENTRALIZED, DECENTRALIZED, or LINEAR.
    """
    k = g_bar.shape[1]
    if perm is None:
        perm = np.arange(k)
    p_c = common_precoder(g_bar, alpha_c, p_t)
    g_herm_ordered = g_bar.conj().T[perm, :]

    if structure == LINEAR:
        x = linear_zf_precoder(g_bar, p_t, p_c)[:, perm]
        filters = None
        private_power = float(np.sum(np.abs(x) ** 2))
    else:
        filters = build_thp_filters(g_herm_ordered, structure, p_c, p_t, cthp_power_norm)
        x = assemble_private_precoder(filters)
        private_power = float(np.sum(np.abs(x @ filters.feedback) ** 2))
    precoder = RsPrecoder(p_c, x, filters, np.asarray(perm), float(p_t),
                          private_power, structure)
    if precoder.common_power + private_power > p_t * (1.0 + 1e-9):
        raise ValueError("assembled precoder exceeds the transmit power budget")
    return precoder
