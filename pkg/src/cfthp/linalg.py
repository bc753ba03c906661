"""Dense complex matrix factorizations used by the precoder construction.

Matrices are plain ``numpy.ndarray`` of dtype complex128. The LQ routine
follows the convention that the triangular factor has a real, nonnegative
diagonal, which lets the diagonal entries be used directly as per-stream
gains and power weights downstream.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np
import scipy.linalg

# Fixed numerical tolerances (contract values, not configuration).
RANK_TOL = 1e-12
DIAG_TOL = 1e-14


class RankDeficient(np.linalg.LinAlgError):
    """A factorization hit a numerically dependent row; the channel draw is degenerate."""


class NoConvergence(np.linalg.LinAlgError):
    """The SVD iteration failed to converge; abort the trial."""


class SingularDiagonal(np.linalg.LinAlgError):
    """Triangular solve with a (near-)zero diagonal entry."""


class LqFactors(NamedTuple):
    """a = l @ q with l lower triangular (K x K) and q having orthonormal rows (K x M)."""

    l: np.ndarray
    q: np.ndarray


class SvdFactors(NamedTuple):
    """a = u @ diag(sigma) @ v^H, sigma descending, u/v with orthonormal columns."""

    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray


def lq_decompose(a: np.ndarray) -> LqFactors:
    """LQ factorization of a K x M matrix (K <= M) with real nonnegative diag(l).

    Computed as the adjoint of a Householder QR of ``a^H``, then rephased so
    every diagonal entry of ``l`` is real and >= 0.

    Raises
    ------
    RankDeficient
        If any row's residual norm falls below ``RANK_TOL * ||a||_F``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] > a.shape[1]:
        raise ValueError(f"expected a wide K x M matrix with K <= M, got shape {a.shape}")
    anorm = np.linalg.norm(a)
    if anorm == 0.0:
        raise RankDeficient("zero matrix has no full-rank LQ factorization")

    qh, r = np.linalg.qr(a.conj().T)  # a^H = qh @ r, qh: M x K, r: K x K upper
    l = r.conj().T
    diag = np.diagonal(l).copy()
    if np.any(np.abs(diag) < RANK_TOL * anorm):
        raise RankDeficient(
            f"row residual below {RANK_TOL:g} * ||a||_F; matrix is numerically rank deficient"
        )

    # Rephase columns of l / rows of q so diag(l) is real and positive.
    phase = diag / np.abs(diag)
    l = l * phase.conj()[np.newaxis, :]
    q = phase[:, np.newaxis] * qh.conj().T
    k = l.shape[0]
    l[np.arange(k), np.arange(k)] = np.abs(diag)

    if not (np.all(np.isfinite(l)) and np.all(np.isfinite(q))):
        raise np.linalg.LinAlgError("non-finite entries in LQ factors")
    return LqFactors(l, q)


def svd(a: np.ndarray) -> SvdFactors:
    """Singular value decomposition, economy size.

    Raises
    ------
    NoConvergence
        If the underlying iteration does not converge.
    """
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        raise ValueError("svd of an empty matrix")
    try:
        u, sigma, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence(str(exc)) from exc
    if not np.all(np.isfinite(sigma)):
        raise NoConvergence("non-finite singular values")
    return SvdFactors(u, sigma, vh.conj().T)


def solve_lower_triangular(l: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``l @ x = b`` by forward substitution. ``b`` may be a vector or matrix.

    Raises
    ------
    SingularDiagonal
        If any ``|l[k, k]| <= DIAG_TOL``.
    """
    l = np.asarray(l, dtype=complex)
    if np.any(np.abs(np.diagonal(l)) <= DIAG_TOL):
        raise SingularDiagonal("diagonal entry of magnitude <= 1e-14")
    return scipy.linalg.solve_triangular(l, np.asarray(b, dtype=complex), lower=True)
