"""In-process, buffer-level surface for the focalprune kernel.

Callers hand over plain contiguous buffers (anything exposing the buffer
protocol as 2-D C-contiguous float32, e.g. numpy arrays or memoryview
casts) and get back plain Python tuples.  Ingestion is zero-copy where the
buffer protocol permits and the caller's memory is never written to; all
algorithm logic lives in the core library, this module only marshals.

Errors are the core library's exception types, each carrying a stable
``code`` string.  The marshalling layer adds no interpreter lock of its
own; the core kernels release the GIL inside their numpy calls.
"""

from __future__ import annotations

from typing import Iterable, Optional, Sequence

import numpy as np

import focalprune
from focalprune import IndexSet, ReductionConfig, TokenMatrix, prune
from focalprune.diagnostics import coverage_radius
from focalprune.errors import UnsupportedDtype, UnsupportedLayout

__version__ = focalprune.__version__

__all__ = ["bound_prune", "bound_coverage_radius", "__version__"]


def _as_matrix(buffer, what: str) -> TokenMatrix:
    """Validate and wrap a caller buffer without copying it."""
    try:
        view = memoryview(buffer)
    except TypeError as exc:
        raise UnsupportedLayout(f"{what} does not expose the buffer protocol") from exc
    if view.format != "f":
        raise UnsupportedDtype(
            f"{what} must be float32 (format 'f'), got format {view.format!r}"
        )
    if view.ndim != 2:
        raise UnsupportedLayout(f"{what} must be 2-D, got {view.ndim}-D")
    if not view.c_contiguous:
        raise UnsupportedLayout(f"{what} must be C-contiguous")
    return TokenMatrix(np.asarray(view))


def bound_prune(
    tokens,
    queries=None,
    *,
    n_target: Optional[int] = None,
    keep_ratio: Optional[float] = None,
    focal_k: int = 8,
    eps: float = 1e-12,
    scan_order: str = "ranked",
    normalize_utility: bool = False,
    invert_delta: bool = False,
    layer_hint: int = 2,
) -> tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...], float, int]:
    """Run the reduction on caller-owned buffers.

    ``tokens`` is an N x d float32 buffer, ``queries`` an optional Q x d
    float32 buffer (None for query-free reduction).  Returns
    (retained, focal, context, delta, stride) with index tuples ascending;
    index sets are identical to what the CLI produces for the same data.
    """
    token_matrix = _as_matrix(tokens, "tokens")
    query_matrix = _as_matrix(queries, "queries") if queries is not None else None
    config = ReductionConfig(
        n_target=n_target,
        keep_ratio=keep_ratio,
        focal_k=focal_k,
        eps=eps,
        scan_order=scan_order,
        normalize_utility=normalize_utility,
        invert_delta=invert_delta,
        layer_hint=layer_hint,
    )
    result = prune(token_matrix, query_matrix, config)
    return (
        tuple(result.retained),
        tuple(result.focal),
        tuple(result.context),
        float(result.delta),
        int(result.stride),
    )


def bound_coverage_radius(
    tokens, retained: Iterable[int] | Sequence[int]
) -> tuple[float, Optional[int], tuple[float, ...]]:
    """Coverage radius of a retained index set over a token buffer.

    Returns (radius, worst_discarded, per_discarded) where per_discarded
    aligns with the ascending discarded indices and worst_discarded is
    None when nothing was discarded.
    """
    token_matrix = _as_matrix(tokens, "tokens")
    report = coverage_radius(token_matrix, IndexSet.from_iterable(retained))
    return (
        float(report.radius),
        report.worst_discarded,
        tuple(float(x) for x in report.per_discarded),
    )
