"""Focus-then-context reduction of visual token matrices.

The library selects a small, high-fidelity subset of the rows of a token
embedding matrix in two stages: a focus stage keeps the tokens that score
highest on combined saliency and query relevance, and a scanning stage adds
context tokens via a divergence-adaptive stride walk over the remaining
candidates.  Diagnostics cover the worst-case coverage radius of a
reduction, an analytical prefill FLOPs model, reference baselines, and a
deterministic synthetic-scene generator for claim-level testing.
"""

from .diagnostics import (
    BASELINE_METHODS,
    CoverageReport,
    FlopsModel,
    baseline_select,
    coverage_radius,
    flops_report,
    flops_total,
    hausdorff_distance,
    layer_flops,
    subject_recall,
)
from .errors import FocalpruneError
from .focus import (
    FocalSelection,
    composite_score,
    identify_focal,
    l1_saliency,
    minmax_normalize,
    query_relevance,
    select_focal,
)
from .matrix import IndexSet, ScoreVector, TokenMatrix, read_matrix, write_matrix
from .pruner import (
    ReductionConfig,
    ReductionResult,
    prune,
    prune_file,
    result_to_dict,
    result_to_json,
)
from .scanning import (
    ScanResult,
    contextual_utility,
    retention_stride,
    scan,
    srs_select,
    structural_dependency,
    structural_divergence,
)
from .synth import SceneParams, SplitMix64, SyntheticScene, generate

__version__ = "0.1.0"

__all__ = [
    "BASELINE_METHODS",
    "CoverageReport",
    "FlopsModel",
    "FocalSelection",
    "FocalpruneError",
    "IndexSet",
    "ReductionConfig",
    "ReductionResult",
    "SceneParams",
    "ScanResult",
    "ScoreVector",
    "SplitMix64",
    "SyntheticScene",
    "TokenMatrix",
    "baseline_select",
    "composite_score",
    "contextual_utility",
    "coverage_radius",
    "flops_report",
    "flops_total",
    "generate",
    "hausdorff_distance",
    "identify_focal",
    "l1_saliency",
    "layer_flops",
    "minmax_normalize",
    "prune",
    "prune_file",
    "query_relevance",
    "read_matrix",
    "result_to_dict",
    "result_to_json",
    "retention_stride",
    "scan",
    "select_focal",
    "srs_select",
    "structural_dependency",
    "structural_divergence",
    "subject_recall",
    "write_matrix",
]
