"""Deterministic multi-subject synthetic scenes with ground-truth labels.

Scenes are reproducible bit-for-bit from their parameters on any platform:
randomness comes from a SplitMix64 integer stream, Gaussians from the
trigonometric Box-Muller transform, and every draw happens in one fixed
sequential order.  Token magnitudes are arranged so subject clusters carry
higher L1 mass than the background, which is what the focus stage keys on.

Consumption order of the stream (documented so alternates can replay it):

1. one unit-sphere direction per cluster, in cluster order;
2. subject tokens, cluster by cluster, one noise vector each;
3. background tokens, one noise vector each;
4. query rows, one noise vector each.

Each length-d Gaussian vector consumes ceil(d/2) Box-Muller pairs; for odd
d the second output of the final pair is discarded, never cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .matrix import TokenMatrix

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TWO53 = float(1 << 53)


class SplitMix64:
    """64-bit SplitMix generator (Steele/Lea/Flood mixing constants)."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) / _TWO53

    def next_gaussian_pair(self) -> tuple[float, float]:
        """Box-Muller (trigonometric form); consumes exactly two words.

        u1 is shifted into (0, 1] so the logarithm is always defined.
        """
        u1 = ((self.next_u64() >> 11) + 1) / _TWO53
        u2 = (self.next_u64() >> 11) / _TWO53
        r = math.sqrt(-2.0 * math.log(u1))
        theta = 2.0 * math.pi * u2
        return r * math.cos(theta), r * math.sin(theta)

    def gaussian_vector(self, d: int) -> list[float]:
        out: list[float] = []
        while len(out) < d:
            z0, z1 = self.next_gaussian_pair()
            out.append(z0)
            if len(out) < d:
                out.append(z1)
        return out

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) via the multiply-shift reduction."""
        if bound <= 0:
            raise InvalidParams(f"bound must be positive, got {bound}")
        return (self.next_u64() * bound) >> 64


@dataclass(frozen=True)
class SceneParams:
    """Generator parameters; identical params regenerate identical scenes."""

    n_clusters: int = 4
    tokens_per_cluster: int = 16
    n_background: int = 32
    d: int = 16
    cluster_scale: float = 4.0
    noise_sigma: float = 0.05
    query_cluster: int = 0
    n_queries: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.n_clusters < 1:
            raise InvalidParams("n_clusters must be >= 1")
        if self.tokens_per_cluster < 1:
            raise InvalidParams("tokens_per_cluster must be >= 1")
        if self.n_background < 0:
            raise InvalidParams("n_background must be >= 0")
        if self.d < 2:
            raise InvalidParams("d must be >= 2")
        if not self.cluster_scale > 0:
            raise InvalidParams("cluster_scale must be positive")
        if self.noise_sigma < 0:
            raise InvalidParams("noise_sigma must be >= 0")
        if not (0 <= self.query_cluster < self.n_clusters):
            raise InvalidParams(
                f"query_cluster {self.query_cluster} outside [0, {self.n_clusters})"
            )
        if self.n_queries < 0:
            raise InvalidParams("n_queries must be >= 0")


@dataclass(frozen=True)
class SyntheticScene:
    tokens: TokenMatrix
    queries: TokenMatrix
    labels: list[int]
    params: SceneParams


def generate(params: SceneParams) -> SyntheticScene:
    """Generate a labelled multi-subject token field.

    Cluster centers sit on the sphere of radius cluster_scale * sqrt(d), so
    subject rows dominate background rows in L1 mass for any d as long as
    cluster_scale exceeds noise_sigma by the usual margin.  Subject token =
    center + noise_sigma * noise; background token = noise_sigma * noise;
    query row = query-cluster center + noise_sigma * noise.  Labels are the
    cluster id per subject row and -1 for background rows.
    """
    params.validate()
    rng = SplitMix64(params.seed)
    d = params.d
    radius = params.cluster_scale * math.sqrt(d)

    centers = []
    for _ in range(params.n_clusters):
        g = rng.gaussian_vector(d)
        norm = math.sqrt(sum(x * x for x in g))
        if norm < 1e-12:
            g = [1.0] + [0.0] * (d - 1)
            norm = 1.0
        centers.append([radius * x / norm for x in g])

    rows: list[list[float]] = []
    labels: list[int] = []
    for cluster, center in enumerate(centers):
        for _ in range(params.tokens_per_cluster):
            noise = rng.gaussian_vector(d)
            rows.append([c + params.noise_sigma * e for c, e in zip(center, noise)])
            labels.append(cluster)
    for _ in range(params.n_background):
        noise = rng.gaussian_vector(d)
        rows.append([params.noise_sigma * e for e in noise])
        labels.append(-1)

    query_center = centers[params.query_cluster]
    query_rows: list[list[float]] = []
    for _ in range(params.n_queries):
        noise = rng.gaussian_vector(d)
        query_rows.append(
            [c + params.noise_sigma * e for c, e in zip(query_center, noise)]
        )

    tokens = TokenMatrix(np.asarray(rows, dtype=np.float64).astype(np.float32))
    if query_rows:
        queries = TokenMatrix(np.asarray(query_rows, dtype=np.float64).astype(np.float32))
    else:
        queries = TokenMatrix.empty(d)
    return SyntheticScene(tokens=tokens, queries=queries, labels=labels, params=params)
