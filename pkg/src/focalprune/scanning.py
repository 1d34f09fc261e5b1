"""Context scanning: candidate utility, divergence-adaptive stride, sampling.

Given the focal set, every remaining token is a context candidate.  Each
candidate gets a structural-dependency score (cohesion with the focal set
plus discriminability against the other candidates), a contextual utility
(dependency plus query relevance), and a divergence d = exp(-mean cosine to
the focal set).  The mean divergence picks the retention stride, and the
stride walk selects the context tokens.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BudgetBelowFocal,
    EmptyCandidates,
    EmptyFocal,
    InvalidParams,
    LengthMismatch,
)
from .focus import inv_norms, minmax_normalize, query_relevance, unit_rows
from .matrix import IndexSet, ScoreVector, TokenMatrix, require_same_dim

SCAN_ORDERS = ("ranked", "positional")


@dataclass(frozen=True)
class ScanResult:
    """Context selection plus every intermediate quantity.

    The score vectors align with the ascending candidate index list (the
    complement of the focal set).  With no candidates, delta defaults to 1.0
    and stride to 1.
    """

    context: IndexSet
    utility: ScoreVector
    dependency: ScoreVector
    divergence: ScoreVector
    delta: float
    stride: int


def _require_pair(candidates: TokenMatrix, focal: TokenMatrix) -> None:
    if focal.n == 0:
        raise EmptyFocal("focal set must not be empty")
    if candidates.n == 0:
        raise EmptyCandidates("candidate set must not be empty")
    require_same_dim(candidates, focal, "focal")


def _unit_mean(m: TokenMatrix, eps: float) -> np.ndarray:
    """Mean of the eps-guarded unit rows, without materializing them."""
    return (inv_norms(m, eps) @ m.as_float64()) / m.n


def structural_dependency(
    candidates: TokenMatrix, focal: TokenMatrix, eps: float = 1e-12
) -> ScoreVector:
    """Per-candidate cohesion-plus-discriminability score.

    mean cosine to the focal rows, plus the mean of (1 - cosine) against
    all candidates including the candidate itself.  Values lie in [-1, 2].
    """
    _require_pair(candidates, focal)
    x = candidates.as_float64()
    inv = inv_norms(candidates, eps)
    focal_mean = _unit_mean(focal, eps)
    cand_mean = _unit_mean(candidates, eps)
    return (x @ focal_mean) * inv + (1.0 - (x @ cand_mean) * inv)


def contextual_utility(
    candidates: TokenMatrix,
    focal: TokenMatrix,
    queries: TokenMatrix,
    eps: float = 1e-12,
    normalize: bool = False,
) -> ScoreVector:
    """Structural dependency plus query relevance, both raw by default.

    ``normalize`` min-max-normalizes the two terms before summing (an
    ablation switch; the default adds them unscaled).
    """
    dep = structural_dependency(candidates, focal, eps)
    rel = query_relevance(candidates, queries, eps)
    if normalize:
        return minmax_normalize(dep, eps) + minmax_normalize(rel, eps)
    return dep + rel


def structural_divergence(
    candidates: TokenMatrix,
    focal: TokenMatrix,
    eps: float = 1e-12,
    invert: bool = False,
) -> tuple[ScoreVector, float]:
    """Per-candidate divergence from the focal set and its mean.

    d_i = exp(-mean cosine(candidate_i, focal rows)) lies in [1/e, e]; the
    returned delta is the arithmetic mean of the d_i.  ``invert`` swaps in
    the sensitivity-study variant d_i = e * exp(+mean cosine), range [1, e^2].
    """
    _require_pair(candidates, focal)
    mean_cos = (candidates.as_float64() @ _unit_mean(focal, eps)) * inv_norms(
        candidates, eps
    )
    if invert:
        div = math.e * np.exp(mean_cos)
    else:
        div = np.exp(-mean_cos)
    return div, float(div.mean())


def retention_stride(n_target: int, focal_count: int, delta: float) -> int:
    """Stride = max(1, floor((n_target - focal_count) * delta))."""
    if focal_count < 0 or n_target < focal_count:
        raise BudgetBelowFocal(
            f"budget {n_target} is below the focal count {focal_count}"
        )
    if not delta > 0.0:
        raise InvalidParams(f"delta must be positive, got {delta}")
    return max(1, math.floor((n_target - focal_count) * delta))


def srs_select(
    utility: ScoreVector,
    candidate_ids: IndexSet,
    stride: int,
    budget: int,
    order: str = "ranked",
) -> IndexSet:
    """Stride walk over the candidate ordering.

    Candidates are ordered by utility descending (ties to the smaller
    original index) or, with order="positional", by original position.  The
    walk starts at ordered position 0 and advances by ``stride`` modulo the
    candidate count after each take; when it lands on a position already
    taken it probes forward one position at a time (modulo wrap) to the
    next free one, so the budget is always met.  Returns original indices,
    ascending.
    """
    if order not in SCAN_ORDERS:
        raise InvalidParams(f"scan order must be one of {SCAN_ORDERS}, got {order!r}")
    if stride < 1:
        raise InvalidParams(f"stride must be >= 1, got {stride}")
    if budget < 0:
        raise InvalidParams(f"budget must be >= 0, got {budget}")
    util = np.asarray(utility, dtype=np.float64)
    m = len(candidate_ids)
    if util.size != m:
        raise LengthMismatch(f"utility has length {util.size}, expected {m}")
    take = min(budget, m)
    if take == 0:
        return IndexSet.empty()
    if order == "ranked":
        # Stable sort on the negated scores: ties keep ascending original order.
        ordering = np.argsort(-util, kind="stable")
    else:
        ordering = np.arange(m)
    taken = np.zeros(m, dtype=bool)
    picks = np.empty(take, dtype=np.int64)
    pos = 0
    for i in range(take):
        while taken[pos]:
            pos = (pos + 1) % m
        taken[pos] = True
        picks[i] = ordering[pos]
        pos = (pos + stride) % m
    return IndexSet(np.sort(candidate_ids.indices[picks]))


def scan(
    tokens: TokenMatrix,
    focal: IndexSet,
    queries: TokenMatrix,
    n_target: int,
    eps: float = 1e-12,
    *,
    scan_order: str = "ranked",
    normalize_utility: bool = False,
    invert_delta: bool = False,
) -> ScanResult:
    """Full scanning stage over the complement of the focal set.

    Equivalent to composing structural_dependency / query_relevance /
    structural_divergence / retention_stride / srs_select over the
    candidate submatrix, but computed as full-matrix products sliced down
    to the candidates so the token matrix is never gathered row by row.
    """
    focal.validate_against(tokens.n)
    n_focal = len(focal)
    if n_target < n_focal:
        raise BudgetBelowFocal(
            f"budget {n_target} is below the focal count {n_focal}"
        )
    candidate_ids = focal.complement(tokens.n)
    n_cand = len(candidate_ids)
    if n_cand == 0:
        empty = np.empty(0, dtype=np.float64)
        return ScanResult(IndexSet.empty(), empty, empty, empty, 1.0, 1)
    if n_focal == 0:
        raise EmptyFocal("cannot scan with an empty focal set")
    require_same_dim(tokens, queries, "queries")

    x = tokens.as_float64()
    inv = inv_norms(tokens, eps)
    cand_idx = candidate_ids.indices
    focal_idx = focal.indices

    unit_focal_sum = inv[focal_idx] @ x[focal_idx]
    focal_mean = unit_focal_sum / n_focal
    # candidate unit-row mean = (sum of all unit rows - focal part) / |C|
    cand_mean = (inv @ x - unit_focal_sum) / n_cand

    mean_focal_cos = ((x @ focal_mean) * inv)[cand_idx]
    dependency = mean_focal_cos + (1.0 - ((x @ cand_mean) * inv)[cand_idx])
    if queries.n:
        query_mean = unit_rows(queries.as_float64(), eps).mean(axis=0)
        relevance = ((x @ query_mean) * inv)[cand_idx]
    else:
        relevance = np.zeros(n_cand, dtype=np.float64)
    if normalize_utility:
        utility = minmax_normalize(dependency, eps) + minmax_normalize(relevance, eps)
    else:
        utility = dependency + relevance

    if invert_delta:
        divergence = math.e * np.exp(mean_focal_cos)
    else:
        divergence = np.exp(-mean_focal_cos)
    delta = float(divergence.mean())
    stride = retention_stride(n_target, n_focal, delta)
    context = srs_select(
        utility, candidate_ids, stride, n_target - n_focal, order=scan_order
    )
    return ScanResult(context, utility, dependency, divergence, delta, stride)
