"""Brute-force reference implementations for checking the fast kernels.

Everything in this module recomputes the pipeline from scratch with plain
``math`` arithmetic over Python lists: pairwise loops instead of matrix
products, ``fsum`` instead of vectorized reductions, and its own sorting
and stride walk.  It deliberately shares no arithmetic helpers with the
optimized modules (only the I/O types), so agreement between the two paths
is meaningful evidence.  Complexity is quadratic or worse by design; keep
inputs small (N <= 512 in the test harnesses).
"""

from __future__ import annotations

import math
from operator import mul

from .errors import BudgetInvalid, DimensionMismatch, EmptyInput, EmptyRetained, InvalidParams
from .matrix import IndexSet, TokenMatrix
from .pruner import ReductionConfig


def _dot(u: list[float], v: list[float]) -> float:
    return math.fsum(map(mul, u, v))


def _norm(u: list[float]) -> float:
    return math.sqrt(math.fsum(x * x for x in u))


def _cosine(u: list[float], v: list[float], eps: float) -> float:
    nu = _norm(u)
    nv = _norm(v)
    if nu < eps or nv < eps:
        return 0.0
    return _dot(u, v) / (nu * nv)


def _cosine_normed(u: list[float], nu: float, v: list[float], nv: float, eps: float) -> float:
    """Guarded cosine with the row norms hoisted out of the pair loop."""
    if nu < eps or nv < eps:
        return 0.0
    return _dot(u, v) / (nu * nv)


def _distance(u: list[float], v: list[float]) -> float:
    return math.sqrt(math.fsum((a - b) * (a - b) for a, b in zip(u, v)))


def _minmax(values: list[float], eps: float) -> list[float]:
    lo = min(values)
    span = max(max(values) - lo, eps)
    return [(v - lo) / span for v in values]


def _mean_query_cosine(row: list[float], queries: list[list[float]], eps: float) -> float:
    if not queries:
        return 0.0
    return math.fsum(_cosine(row, q, eps) for q in queries) / len(queries)


def naive_composite(
    tokens: TokenMatrix, queries: TokenMatrix, eps: float = 1e-12
) -> list[float]:
    """Composite score by literal per-token, per-query loops."""
    if tokens.n == 0:
        raise EmptyInput("no tokens to score")
    if queries.d != tokens.d:
        raise DimensionMismatch(
            f"query dimension {queries.d} does not match {tokens.d}"
        )
    rows = tokens.data.tolist()
    query_rows = queries.data.tolist()
    saliency = [math.fsum(abs(x) for x in row) for row in rows]
    relevance = [_mean_query_cosine(row, query_rows, eps) for row in rows]
    sal_n = _minmax(saliency, eps)
    rel_n = _minmax(relevance, eps)
    return [a + b for a, b in zip(sal_n, rel_n)]


def _rank_descending(values: list[float], tiebreak: list[int]) -> list[int]:
    """Positions sorted by value descending, ties to the smaller tiebreak id."""
    return sorted(range(len(values)), key=lambda i: (-values[i], tiebreak[i]))


def _stride_walk(ordering: list[int], stride: int, take: int) -> list[int]:
    """The documented stride walk: advance by stride modulo the list length
    after each take, probing forward past already-taken positions."""
    m = len(ordering)
    taken = [False] * m
    picks: list[int] = []
    pos = 0
    for _ in range(take):
        while taken[pos]:
            pos = (pos + 1) % m
        taken[pos] = True
        picks.append(ordering[pos])
        pos = (pos + stride) % m
    return picks


def naive_pipeline_details(
    tokens: TokenMatrix, queries: TokenMatrix, config: ReductionConfig
) -> dict:
    """Sequential transcription of the whole reduction.

    Returns every stage output in a dict: retained, focal, context,
    composite, utility, divergence (candidate-aligned), delta, stride.
    """
    n = tokens.n
    if n == 0:
        raise EmptyInput("cannot prune an empty token matrix")
    if (config.n_target is None) == (config.keep_ratio is None):
        raise InvalidParams("exactly one of n_target and keep_ratio must be set")
    if config.n_target is not None:
        budget = int(config.n_target)
    else:
        budget = max(1, math.floor(config.keep_ratio * n + 0.5))
    if budget < 1 or budget > n:
        raise BudgetInvalid(f"budget {budget} outside [1, {n}]")
    eps = config.eps

    composite = naive_composite(tokens, queries, eps)
    order = sorted(range(n), key=lambda i: (-composite[i], i))
    focal = sorted(order[: min(config.focal_k, budget)])
    focal_set = set(focal)
    cand_ids = [i for i in range(n) if i not in focal_set]
    if not cand_ids:
        return {
            "retained": IndexSet.from_iterable(focal),
            "focal": focal,
            "context": [],
            "composite": composite,
            "utility": [],
            "divergence": [],
            "delta": 1.0,
            "stride": 1,
        }

    rows = tokens.data.tolist()
    query_rows = queries.data.tolist()
    focal_rows = [rows[i] for i in focal]
    cand_rows = [rows[i] for i in cand_ids]
    focal_norms = [_norm(f) for f in focal_rows]
    cand_norms = [_norm(c) for c in cand_rows]

    mean_focal_cos = [
        math.fsum(
            _cosine_normed(c, nc, f, nf, eps)
            for f, nf in zip(focal_rows, focal_norms)
        )
        / len(focal_rows)
        for c, nc in zip(cand_rows, cand_norms)
    ]
    dependency = [
        mean_focal_cos[j]
        + math.fsum(
            1.0 - _cosine_normed(cand_rows[j], cand_norms[j], z, nz, eps)
            for z, nz in zip(cand_rows, cand_norms)
        )
        / len(cand_rows)
        for j in range(len(cand_rows))
    ]
    relevance = [_mean_query_cosine(c, query_rows, eps) for c in cand_rows]
    if config.normalize_utility:
        utility = [
            a + b
            for a, b in zip(_minmax(dependency, eps), _minmax(relevance, eps))
        ]
    else:
        utility = [a + b for a, b in zip(dependency, relevance)]

    if config.invert_delta:
        divergence = [math.e * math.exp(c) for c in mean_focal_cos]
    else:
        divergence = [math.exp(-c) for c in mean_focal_cos]
    delta = math.fsum(divergence) / len(divergence)
    stride = max(1, math.floor((budget - len(focal)) * delta))

    if config.scan_order == "positional":
        ordering = list(range(len(cand_ids)))
    else:
        ordering = _rank_descending(utility, cand_ids)
    take = min(budget - len(focal), len(cand_ids))
    picks = _stride_walk(ordering, stride, take)
    context = sorted(cand_ids[p] for p in picks)
    return {
        "retained": IndexSet.from_iterable(focal + context),
        "focal": focal,
        "context": context,
        "composite": composite,
        "utility": utility,
        "divergence": divergence,
        "delta": delta,
        "stride": stride,
    }


def naive_pipeline(
    tokens: TokenMatrix, queries: TokenMatrix, config: ReductionConfig
) -> IndexSet:
    """Retained set from the brute-force transcription."""
    return naive_pipeline_details(tokens, queries, config)["retained"]


def lipschitz_probe(
    tokens: TokenMatrix, retained: IndexSet, anchors: TokenMatrix
) -> tuple[float, float]:
    """Check data for the coverage bound on max-distance set functionals.

    For each anchor c the functional f_c(X) = max_{x in X} ||x - c|| moves
    by at most the Hausdorff distance between two sets, which for a subset
    selection is the coverage radius.  Returns (lhs, rhs) where lhs is the
    largest observed |f_c(full) - f_c(retained)| over the anchors and rhs
    is the coverage radius, both computed here from scratch.
    """
    if len(retained) == 0:
        raise EmptyRetained("retained set must not be empty")
    retained.validate_against(tokens.n)
    if anchors.n == 0:
        raise EmptyInput("need at least one anchor")
    if anchors.d != tokens.d:
        raise DimensionMismatch(
            f"anchor dimension {anchors.d} does not match {tokens.d}"
        )
    rows = tokens.data.tolist()
    kept = [rows[i] for i in retained]
    kept_set = set(retained.tolist())
    dropped = [rows[i] for i in range(tokens.n) if i not in kept_set]

    lhs = 0.0
    for anchor in anchors.data.tolist():
        f_full = max(_distance(row, anchor) for row in rows)
        f_kept = max(_distance(row, anchor) for row in kept)
        lhs = max(lhs, abs(f_full - f_kept))

    rhs = 0.0
    for row in dropped:
        rhs = max(rhs, min(_distance(row, keep) for keep in kept))
    return lhs, rhs
