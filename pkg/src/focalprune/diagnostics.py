"""Coverage, cost, and recall diagnostics for reductions.

The coverage radius of a reduction is the largest distance from any
discarded token to its nearest retained token; for subset selections it
equals the Hausdorff distance between the original and reduced sets, and
it upper-bounds how far any 1-Lipschitz set functional can move under the
reduction.  The FLOPs model prices a T-layer transformer prefill that runs
R layers at full sequence length and the rest at the reduced length.
Reference baselines and subject recall support side-by-side comparisons on
labelled scenes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetInvalid, EmptyInput, EmptyRetained, InvalidModel, InvalidParams, LengthMismatch
from .focus import l1_saliency, query_relevance, select_focal
from .matrix import IndexSet, TokenMatrix, require_same_dim
from .synth import SplitMix64

BASELINE_METHODS = (
    "random",
    "uniform_stride",
    "saliency_topk",
    "relevance_topk",
    "maxmin_diversity",
)


@dataclass(frozen=True)
class FlopsModel:
    """Transformer dimensions for the prefill cost model.

    reduce_layer counts the layers processed at full length (1-based), so
    reduce_layer == layers_total means no layer sees the reduced sequence.
    Sequence lengths include any text tokens the caller wants priced in.
    """

    d_model: int
    m_ffn: int
    layers_total: int
    reduce_layer: int
    n_full: int
    n_reduced: int

    def validate(self) -> None:
        if min(self.d_model, self.m_ffn, self.layers_total, self.reduce_layer) < 1:
            raise InvalidModel("all model dimensions must be positive")
        if min(self.n_full, self.n_reduced) < 1:
            raise InvalidModel("sequence lengths must be positive")
        if self.reduce_layer > self.layers_total:
            raise InvalidModel(
                f"reduce_layer {self.reduce_layer} exceeds layers_total {self.layers_total}"
            )
        if self.n_reduced > self.n_full:
            raise InvalidModel(
                f"n_reduced {self.n_reduced} exceeds n_full {self.n_full}"
            )


@dataclass(frozen=True)
class CoverageReport:
    """Worst-case discarded-to-retained distance and its per-token detail.

    per_discarded aligns with the ascending list of discarded indices;
    worst_discarded is None when nothing was discarded.
    """

    radius: float
    worst_discarded: Optional[int]
    per_discarded: np.ndarray


def _min_distances(points: np.ndarray, anchors: np.ndarray) -> np.ndarray:
    """Per-point Euclidean distance to the nearest anchor, chunked."""
    out = np.empty(points.shape[0], dtype=np.float64)
    # Keep the (chunk, anchors, d) broadcast under ~32M doubles.
    chunk = max(1, (1 << 22) // max(1, anchors.shape[0] * anchors.shape[1]))
    for start in range(0, points.shape[0], chunk):
        block = points[start : start + chunk]
        diff = block[:, None, :] - anchors[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        out[start : start + block.shape[0]] = np.sqrt(d2.min(axis=1))
    return out


def coverage_radius(tokens: TokenMatrix, retained: IndexSet) -> CoverageReport:
    """Max over discarded tokens of the distance to the nearest retained one."""
    if len(retained) == 0:
        raise EmptyRetained("retained set must not be empty")
    retained.validate_against(tokens.n)
    discarded = retained.complement(tokens.n)
    if len(discarded) == 0:
        return CoverageReport(0.0, None, np.empty(0, dtype=np.float64))
    x = tokens.as_float64()
    dists = _min_distances(x[discarded.indices], x[retained.indices])
    worst = int(np.argmax(dists))
    return CoverageReport(float(dists[worst]), int(discarded.indices[worst]), dists)


def hausdorff_distance(a: TokenMatrix, b: TokenMatrix) -> float:
    """Symmetric max of the two directed sup-inf set distances."""
    if a.n == 0 or b.n == 0:
        raise EmptyInput("both point sets must be non-empty")
    require_same_dim(a, b, "second set")
    xa = a.as_float64()
    xb = b.as_float64()
    forward = float(_min_distances(xa, xb).max())
    backward = float(_min_distances(xb, xa).max())
    return max(forward, backward)


def layer_flops(n: int, d: int, m: int) -> float:
    """Per-layer cost: attention projections + attention matrix + FFN."""
    return 4.0 * n * d * d + 2.0 * n * n * d + 2.0 * n * d * m


def flops_total(model: FlopsModel) -> float:
    """Prefill cost: R layers at full length, T - R at reduced length."""
    model.validate()
    full = layer_flops(model.n_full, model.d_model, model.m_ffn)
    reduced = layer_flops(model.n_reduced, model.d_model, model.m_ffn)
    return model.reduce_layer * full + (model.layers_total - model.reduce_layer) * reduced


def flops_report(model: FlopsModel) -> dict:
    """Pruned cost, unpruned cost, and their ratio."""
    pruned = flops_total(model)
    full = flops_total(replace(model, n_reduced=model.n_full))
    return {"full": full, "pruned": pruned, "ratio": pruned / full}


def baseline_select(
    method: str,
    tokens: TokenMatrix,
    queries: TokenMatrix,
    n_target: int,
    seed: int = 0,
) -> IndexSet:
    """Simplified reference selectors for comparison runs.

    random: seeded sample without replacement (SplitMix64 partial shuffle);
    uniform_stride: every floor(N / n_target)-th token; saliency_topk /
    relevance_topk: top-n by raw L1 / mean query cosine; maxmin_diversity:
    greedy farthest-point insertion seeded at the max-L1 token.  All are
    deterministic given the seed.
    """
    if method not in BASELINE_METHODS:
        raise InvalidParams(f"unknown baseline {method!r}")
    n = tokens.n
    if n_target < 0 or n_target > n:
        raise BudgetInvalid(f"budget {n_target} outside [0, {n}]")
    if n_target == 0:
        return IndexSet.empty()

    if method == "random":
        rng = SplitMix64(seed)
        pool = list(range(n))
        for i in range(n_target):
            j = i + rng.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return IndexSet.from_iterable(pool[:n_target])

    if method == "uniform_stride":
        step = max(1, n // n_target)
        return IndexSet(np.arange(n_target, dtype=np.int64) * step)

    if method == "saliency_topk":
        return select_focal(l1_saliency(tokens), n_target)

    if method == "relevance_topk":
        return select_focal(query_relevance(tokens, queries), n_target)

    # maxmin_diversity: greedily maximize the minimum pairwise distance.
    x = tokens.as_float64()
    start = int(np.argmax(l1_saliency(tokens)))
    chosen = [start]
    min_dist = np.linalg.norm(x - x[start], axis=1)
    min_dist[start] = -1.0
    for _ in range(n_target - 1):
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        min_dist = np.minimum(min_dist, np.linalg.norm(x - x[nxt], axis=1))
        min_dist[nxt] = -1.0
    return IndexSet.from_iterable(chosen)


def subject_recall(labels: Sequence[int], retained: IndexSet) -> float:
    """Fraction of subject clusters with at least one retained token.

    Labels are cluster ids with -1 meaning background.  A scene with no
    subject clusters has nothing to miss and scores 1.0.
    """
    n = len(labels)
    if len(retained) and int(retained.indices[-1]) >= n:
        raise LengthMismatch(
            f"retained index {int(retained.indices[-1])} out of range for {n} labels"
        )
    clusters = {label for label in labels if label >= 0}
    if not clusters:
        return 1.0
    hit = {labels[i] for i in retained if labels[i] >= 0}
    return len(hit) / len(clusters)
