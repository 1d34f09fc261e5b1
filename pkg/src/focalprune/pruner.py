"""End-to-end reduction: focus identification, context scan, stable result.

``prune`` is the single entry point VLM-side callers need: it scores all
tokens, picks the focal set, scans the remainder for context, and returns
the retained index set together with every intermediate quantity.  Results
serialize to a versioned JSON schema that is byte-stable across runs except
for the timing fields.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .errors import BudgetInvalid, EmptyInput, InvalidParams
from .focus import composite_score, select_focal
from .matrix import IndexSet, PathLike, ScoreVector, TokenMatrix, read_matrix, require_same_dim
from .scanning import SCAN_ORDERS, ScanResult, scan

RESULT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ReductionConfig:
    """Every knob of the reduction.

    Exactly one of ``n_target`` (absolute retained count) and ``keep_ratio``
    (fraction of N, resolved as max(1, round(ratio * N))) must be set.
    ``layer_hint`` is pure metadata: it records at which transformer layer
    the caller applies the reduction (2 is the recommended default), but
    this library only ever sees the activations it is handed.
    """

    n_target: Optional[int] = None
    keep_ratio: Optional[float] = None
    focal_k: int = 8
    eps: float = 1e-12
    scan_order: str = "ranked"
    normalize_utility: bool = False
    invert_delta: bool = False
    layer_hint: int = 2

    def validate(self) -> None:
        if (self.n_target is None) == (self.keep_ratio is None):
            raise InvalidParams("exactly one of n_target and keep_ratio must be set")
        if self.keep_ratio is not None and not (0.0 < self.keep_ratio <= 1.0):
            raise InvalidParams(f"keep_ratio must be in (0, 1], got {self.keep_ratio}")
        if self.focal_k < 1:
            raise InvalidParams(f"focal_k must be >= 1, got {self.focal_k}")
        if not self.eps > 0.0:
            raise InvalidParams(f"eps must be positive, got {self.eps}")
        if self.scan_order not in SCAN_ORDERS:
            raise InvalidParams(f"scan_order must be one of {SCAN_ORDERS}")

    def resolve_budget(self, n: int) -> int:
        """Retained count for a matrix of n tokens (validates range)."""
        self.validate()
        if self.n_target is not None:
            budget = int(self.n_target)
        else:
            budget = max(1, math.floor(self.keep_ratio * n + 0.5))
        if budget < 1 or budget > n:
            raise BudgetInvalid(f"budget {budget} outside [1, {n}]")
        return budget


@dataclass(frozen=True)
class ReductionResult:
    """Retained set (focal + context) and all intermediate scores.

    ``utility`` and ``divergence`` align with the ascending candidate list
    (complement of ``focal``); ``composite_scores`` aligns with all tokens.
    """

    retained: IndexSet
    focal: IndexSet
    context: IndexSet
    composite_scores: ScoreVector
    utility: ScoreVector
    divergence: ScoreVector
    delta: float
    stride: int
    n: int
    d: int
    q: int
    n_target: int
    config: ReductionConfig
    query_absent: bool
    timings_us: dict = field(default_factory=dict)


def prune(
    tokens: TokenMatrix,
    queries: Optional[TokenMatrix],
    config: ReductionConfig,
) -> ReductionResult:
    """Run the full reduction on one token matrix.

    ``queries`` may be None (or have zero rows): the relevance terms are
    then all zero and selection degrades to saliency plus structure.
    Deterministic for fixed inputs and config.
    """
    t_start = time.perf_counter_ns()
    if tokens.n == 0:
        raise EmptyInput("cannot prune an empty token matrix")
    query_absent = queries is None or queries.n == 0
    if queries is None:
        queries = TokenMatrix.empty(tokens.d)
    require_same_dim(tokens, queries, "queries")
    budget = config.resolve_budget(tokens.n)

    t_fim = time.perf_counter_ns()
    scores, _, _ = composite_score(tokens, queries, config.eps)
    focal = select_focal(scores, min(config.focal_k, budget))
    t_cassm = time.perf_counter_ns()
    scan_result: ScanResult = scan(
        tokens,
        focal,
        queries,
        budget,
        config.eps,
        scan_order=config.scan_order,
        normalize_utility=config.normalize_utility,
        invert_delta=config.invert_delta,
    )
    t_end = time.perf_counter_ns()

    retained = focal.union(scan_result.context)
    assert len(retained) == min(budget, tokens.n)
    return ReductionResult(
        retained=retained,
        focal=focal,
        context=scan_result.context,
        composite_scores=scores,
        utility=scan_result.utility,
        divergence=scan_result.divergence,
        delta=scan_result.delta,
        stride=scan_result.stride,
        n=tokens.n,
        d=tokens.d,
        q=queries.n,
        n_target=budget,
        config=config,
        query_absent=query_absent,
        timings_us={
            "fim": (t_cassm - t_fim) // 1000,
            "cassm": (t_end - t_cassm) // 1000,
            "total": (t_end - t_start) // 1000,
        },
    )


def result_to_dict(result: ReductionResult) -> dict:
    """JSON-ready dict, schema version 1, fixed key order."""
    cfg = result.config
    return {
        "schema": RESULT_SCHEMA_VERSION,
        "n": result.n,
        "d": result.d,
        "q": result.q,
        "config": {
            "n_target": result.n_target,
            "keep_ratio": cfg.keep_ratio,
            "focal_k": cfg.focal_k,
            "eps": cfg.eps,
            "scan_order": cfg.scan_order,
            "normalize_utility": cfg.normalize_utility,
            "invert_delta": cfg.invert_delta,
            "layer_hint": cfg.layer_hint,
        },
        "retained": result.retained.tolist(),
        "focal": result.focal.tolist(),
        "context": result.context.tolist(),
        "delta": result.delta,
        "stride": result.stride,
        "scores": {
            "composite": [float(x) for x in result.composite_scores],
            "utility": [float(x) for x in result.utility],
            "divergence": [float(x) for x in result.divergence],
        },
        "timings_us": dict(result.timings_us),
        "query_absent": result.query_absent,
    }


def result_to_json(result: ReductionResult) -> str:
    return json.dumps(result_to_dict(result))


def config_from_result_dict(payload: dict) -> ReductionConfig:
    """Rebuild a config from a serialized result (n_target is resolved)."""
    cfg = payload["config"]
    return ReductionConfig(
        n_target=cfg["n_target"],
        keep_ratio=None,
        focal_k=cfg["focal_k"],
        eps=cfg["eps"],
        scan_order=cfg["scan_order"],
        normalize_utility=cfg["normalize_utility"],
        invert_delta=cfg["invert_delta"],
        layer_hint=cfg["layer_hint"],
    )


def prune_file(
    tokens_path: PathLike,
    queries_path: Optional[PathLike],
    config: ReductionConfig,
    out_path: PathLike,
) -> ReductionResult:
    """File-level wrapper: NPY inputs in, result JSON out."""
    tokens = read_matrix(tokens_path)
    queries = read_matrix(queries_path) if queries_path is not None else None
    result = prune(tokens, queries, config)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write(result_to_json(result))
        fh.write("\n")
    return result
