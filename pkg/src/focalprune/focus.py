"""Focus identification: composite saliency/relevance scoring and top-K picks.

The composite score of a token is the sum of two min-max-normalized terms:
its raw L1 magnitude (intrinsic saliency) and its mean cosine similarity to
the query rows (semantic relevance).  The K best-scoring tokens form the
focal set that seeds the scanning stage.

All cosine terms share one convention: a vector whose L2 norm falls below
``eps`` has cosine 0 against everything.  Mean-of-cosine reductions are
evaluated as a dot product with the mean of the unit-normalized rows, which
is algebraically identical to averaging pairwise cosines but runs in
O(rows * dim).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InvalidParams
from .matrix import IndexSet, ScoreVector, TokenMatrix, require_nonempty, require_same_dim


@dataclass(frozen=True)
class FocalSelection:
    """Focal index set plus the score vectors that produced it."""

    focal: IndexSet
    scores: ScoreVector
    saliency_norm: ScoreVector
    relevance_norm: ScoreVector


def unit_rows(x: np.ndarray, eps: float) -> np.ndarray:
    """Rows scaled to unit L2 norm; rows with norm below eps become zero.

    Zeroed rows make the eps-guarded cosine convention fall out of plain
    dot products: any product against a degenerate row is exactly 0.
    """
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    degenerate = norms < eps
    out = x / np.where(degenerate, 1.0, norms)
    if degenerate.any():
        out[degenerate.ravel()] = 0.0
    return out


def inv_norms(tokens: TokenMatrix, eps: float) -> np.ndarray:
    """Reciprocal L2 row norms, exactly 0 where the norm falls below eps.

    Scaling a matvec result by this vector equals running the matvec on
    unit-normalized rows (row scaling commutes with right-multiplication),
    without ever materializing the normalized matrix.
    """
    norms = np.sqrt(tokens.sq_norms())
    out = np.zeros(tokens.n, dtype=np.float64)
    keep = norms >= eps
    out[keep] = 1.0 / norms[keep]
    return out


def minmax_normalize(v: ScoreVector, eps: float = 1e-12) -> ScoreVector:
    """Map values to [0, 1] via (v - min) / max(max - min, eps).

    Constant input maps to all zeros (the eps clamp keeps the division
    defined); the map preserves ordering.
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("cannot normalize an empty score vector")
    lo = arr.min()
    span = max(arr.max() - lo, eps)
    return (arr - lo) / span


def l1_saliency(tokens: TokenMatrix) -> ScoreVector:
    """Raw (unnormalized) L1 magnitude per token."""
    require_nonempty(tokens, "saliency input")
    # float64 accumulation over the float32 payload; no upcast copy needed
    return np.abs(tokens.data).sum(axis=1, dtype=np.float64)


def query_relevance(tokens: TokenMatrix, queries: TokenMatrix, eps: float = 1e-12) -> ScoreVector:
    """Mean cosine similarity of each token against the query rows.

    With no query rows the result is all zeros, degrading selection to pure
    saliency.  Values lie in [-1, 1] up to float rounding.
    """
    require_same_dim(tokens, queries, "queries")
    require_nonempty(tokens, "relevance input")
    if queries.n == 0:
        return np.zeros(tokens.n, dtype=np.float64)
    query_mean = unit_rows(queries.as_float64(), eps).mean(axis=0)
    return (tokens.as_float64() @ query_mean) * inv_norms(tokens, eps)


def composite_score(
    tokens: TokenMatrix, queries: TokenMatrix, eps: float = 1e-12
) -> tuple[ScoreVector, ScoreVector, ScoreVector]:
    """Composite score plus its two normalized components.

    Returns (scores, saliency_norm, relevance_norm) where
    scores = saliency_norm + relevance_norm, each component in [0, 1].
    """
    sal = minmax_normalize(l1_saliency(tokens), eps)
    rel = minmax_normalize(query_relevance(tokens, queries, eps), eps)
    return sal + rel, sal, rel


def select_focal(scores: ScoreVector, k: int) -> IndexSet:
    """Indices of the min(k, N) largest scores, ties to the smaller index."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.size == 0:
        raise EmptyInput("cannot select from empty scores")
    if k < 1:
        raise InvalidParams(f"focal count must be >= 1, got {k}")
    top = np.argsort(-arr, kind="stable")[: min(k, arr.size)]
    return IndexSet(np.sort(top).astype(np.int64))


def identify_focal(
    tokens: TokenMatrix, queries: TokenMatrix, k: int, eps: float = 1e-12
) -> FocalSelection:
    """Run the full scoring + selection stage."""
    scores, sal, rel = composite_score(tokens, queries, eps)
    return FocalSelection(select_focal(scores, k), scores, sal, rel)
