"""User-ordering branch patterns and best-branch selection.

Branch 1 is the identity ordering; branch l >= 2 keeps the first q = l - 2
users in place and reverses the remaining K - q. Patterns are stored as
permutations (ordered position -> user index) rather than matrices. The
selected branch maximizes the conditional average sum-private rate over a
common set of error samples; ties break toward the lowest branch index.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .linalg import RankDeficient


class TooManyBranches(ValueError):
    """Branch counts beyond K + 1 only repeat existing patterns."""


@dataclass(frozen=True)
class BranchPattern:
    """One ordering pattern: branch index (1-based) and its permutation."""

    index: int
    perm: np.ndarray


@dataclass(frozen=True)
class BranchChoice:
    """Selection outcome: winning pattern, per-branch scores, per-branch payloads."""

    chosen: BranchPattern
    scores: np.ndarray
    payloads: tuple


def make_patterns(num_users: int, num_branches: int) -> list[BranchPattern]:
    """Generate the ordering patterns for branches 1..num_branches."""
    if num_branches < 1:
        raise ValueError("need at least one branch")
    if num_branches > num_users + 1:
        raise TooManyBranches(
            f"at most {num_users + 1} distinct patterns exist for {num_users} users"
        )
    patterns = [BranchPattern(1, np.arange(num_users))]
    for l in range(2, num_branches + 1):
        q = l - 2
        perm = np.arange(num_users)
        perm[q:] = perm[q:][::-1]
        patterns.append(BranchPattern(l, perm))
    return patterns


def apply_pattern(g_herm: np.ndarray, pattern: BranchPattern) -> np.ndarray:
    """Reorder the rows (users) of the K x M channel G^H."""
    return g_herm[pattern.perm, :]


Evaluator = Callable[[np.ndarray, BranchPattern], tuple[float, object]]


def select_branch(g_herm: np.ndarray, patterns: Sequence[BranchPattern],
                  evaluator: Evaluator) -> BranchChoice:
    """Score every branch with ``evaluator(ordered_channel, pattern)`` and
    return the argmax.

    The evaluator returns (average sum-private rate, payload); the payload of
    the winning branch is reused by the caller so selection and rate
    averaging consume the same error samples. Branches whose filter
    construction fails rank checks score -inf.
    """
    if not patterns:
        raise ValueError("need at least one pattern")
    scores = np.full(len(patterns), -np.inf)
    payloads: list[Optional[object]] = [None] * len(patterns)
    for i, pattern in enumerate(patterns):
        try:
            scores[i], payloads[i] = evaluator(apply_pattern(g_herm, pattern), pattern)
        except RankDeficient:
            continue
    best = int(np.argmax(scores))
    if not np.isfinite(scores[best]):
        raise RankDeficient("every branch failed the rank check")
    return BranchChoice(patterns[best], scores, tuple(payloads))
