"""Command-line surface: prune, diagnose, synth, bench.

Machine-readable output (JSON, CSV) goes to stdout or the --out path;
anything meant for humans, including error reports, goes to stderr as a
one-line JSON object.  Exit codes: 0 success, 1 I/O failure, 2 validation
or usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import statistics
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .diagnostics import (
    BASELINE_METHODS,
    FlopsModel,
    baseline_select,
    coverage_radius,
    flops_report,
    subject_recall,
)
from .errors import FocalpruneError, InvalidParams, IoFailure
from .matrix import IndexSet, TokenMatrix, read_matrix, write_matrix
from .oracle import naive_pipeline
from .pruner import ReductionConfig, config_from_result_dict, prune, result_to_json
from .synth import SceneParams, generate

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2

_IO_CODES = {"io_failure"}


def _fail(code: str, message: str) -> int:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)
    return EXIT_IO if code in _IO_CODES else EXIT_INVALID


def _emit(text: str, out: str | None) -> None:
    if out is None:
        print(text)
    else:
        Path(out).write_text(text + "\n", encoding="utf-8")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="focalprune",
        description="Focus-then-context reduction of visual token matrices.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prune", help="reduce a token matrix and emit result JSON")
    p.add_argument("--tokens", required=True, help="token matrix (.npy, float32 NxD)")
    qgroup = p.add_mutually_exclusive_group(required=True)
    qgroup.add_argument("--queries", help="query matrix (.npy, float32 QxD)")
    qgroup.add_argument(
        "--no-query", action="store_true", help="run without a query (pure saliency)"
    )
    bgroup = p.add_mutually_exclusive_group(required=True)
    bgroup.add_argument("--n-target", type=int, help="retained token count")
    bgroup.add_argument("--keep-ratio", type=float, help="retained fraction of N")
    p.add_argument("--focal-k", type=int, default=8, help="focal token count (default 8)")
    p.add_argument("--eps", type=float, default=1e-12)
    p.add_argument("--scan-order", choices=("ranked", "positional"), default="ranked")
    p.add_argument("--normalize-utility", action="store_true")
    p.add_argument("--invert-delta", action="store_true")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.add_argument(
        "--seed", type=int, default=0, help="accepted for interface symmetry; unused"
    )

    d = sub.add_parser("diagnose", help="coverage / FLOPs / recall report for a result")
    d.add_argument("--tokens", required=True)
    d.add_argument("--result", required=True, help="result JSON from `prune`")
    d.add_argument("--queries", help="query matrix for relevance baselines")
    d.add_argument("--labels", help="labels JSON (list of cluster ids, -1 background)")
    d.add_argument(
        "--flops",
        help="comma list d=..,m=..,T=..,R=..[,text=..] for the cost model",
    )
    d.add_argument(
        "--baselines",
        help="'all' or comma list of " + ",".join(BASELINE_METHODS),
    )
    d.add_argument("--seed", type=int, default=0)
    d.add_argument(
        "--with-oracle",
        action="store_true",
        help="re-run the brute-force pipeline and compare (small inputs only)",
    )
    d.add_argument("--out")

    s = sub.add_parser("synth", help="generate a labelled synthetic scene")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--clusters", type=int, default=4)
    s.add_argument("--tokens-per-cluster", type=int, default=16)
    s.add_argument("--background", type=int, default=32)
    s.add_argument("--dim", type=int, default=16)
    s.add_argument("--cluster-scale", type=float, default=4.0)
    s.add_argument("--noise-sigma", type=float, default=0.05)
    s.add_argument("--query-cluster", type=int, default=0)
    s.add_argument("--queries", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bench", help="time the kernel across sizes, emit CSV")
    b.add_argument(
        "--sizes", required=True, help="comma list of NxD pairs, e.g. 256x64,2880x4096"
    )
    b.add_argument("--q", type=int, default=8, help="query rows per instance")
    bb = b.add_mutually_exclusive_group()
    bb.add_argument("--n-target", type=int)
    bb.add_argument("--keep-ratio", type=float)
    b.add_argument("--focal-k", type=int, default=8)
    b.add_argument("--reps", type=int, default=5, help="repetitions; medians reported")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    return parser


def _cmd_prune(args: argparse.Namespace) -> int:
    config = ReductionConfig(
        n_target=args.n_target,
        keep_ratio=args.keep_ratio,
        focal_k=args.focal_k,
        eps=args.eps,
        scan_order=args.scan_order,
        normalize_utility=args.normalize_utility,
        invert_delta=args.invert_delta,
    )
    tokens = read_matrix(args.tokens)
    queries = None if args.no_query else read_matrix(args.queries)
    result = prune(tokens, queries, config)
    _emit(result_to_json(result), args.out)
    return EXIT_OK


def _parse_flops_spec(spec: str, n_tokens: int, n_retained: int) -> FlopsModel:
    fields = {}
    for part in spec.split(","):
        if "=" not in part:
            raise InvalidParams(f"bad --flops item {part!r} (expected key=value)")
        key, value = part.split("=", 1)
        fields[key.strip()] = int(value)
    unknown = set(fields) - {"d", "m", "T", "R", "text"}
    if unknown:
        raise InvalidParams(f"unknown --flops keys {sorted(unknown)}")
    for key in ("d", "m", "T", "R"):
        if key not in fields:
            raise InvalidParams(f"--flops needs {key}=")
    text = fields.get("text", 0)
    return FlopsModel(
        d_model=fields["d"],
        m_ffn=fields["m"],
        layers_total=fields["T"],
        reduce_layer=fields["R"],
        n_full=n_tokens + text,
        n_reduced=n_retained + text,
    )


def _cmd_diagnose(args: argparse.Namespace) -> int:
    tokens = read_matrix(args.tokens)
    try:
        payload = json.loads(Path(args.result).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"cannot read {args.result}: {exc}") from exc
    except ValueError as exc:
        raise InvalidParams(f"{args.result}: not valid JSON: {exc}") from exc
    if payload.get("n") != tokens.n:
        raise InvalidParams(
            f"result describes {payload.get('n')} tokens but matrix has {tokens.n}"
        )
    retained = IndexSet.from_iterable(payload["retained"])
    queries = read_matrix(args.queries) if args.queries else TokenMatrix.empty(tokens.d)

    report_coverage = coverage_radius(tokens, retained)
    report: dict = {
        "radius": report_coverage.radius,
        "worst_discarded": report_coverage.worst_discarded,
        "flops": None,
        "recall_by_method": None,
    }

    if args.flops:
        model = _parse_flops_spec(args.flops, tokens.n, len(retained))
        report["flops"] = flops_report(model)

    if args.baselines:
        if not args.labels:
            raise InvalidParams("--baselines requires --labels for recall scoring")
        labels = json.loads(Path(args.labels).read_text(encoding="utf-8"))
        if len(labels) != tokens.n:
            raise InvalidParams(
                f"labels length {len(labels)} does not match {tokens.n} tokens"
            )
        methods = (
            list(BASELINE_METHODS)
            if args.baselines == "all"
            else [m.strip() for m in args.baselines.split(",")]
        )
        recall = {"pruner": subject_recall(labels, retained)}
        for method in methods:
            picked = baseline_select(method, tokens, queries, len(retained), args.seed)
            recall[method] = subject_recall(labels, picked)
        report["recall_by_method"] = recall

    if args.with_oracle:
        config = config_from_result_dict(payload)
        reference = naive_pipeline(tokens, queries if queries.n else TokenMatrix.empty(tokens.d), config)
        report["oracle_match"] = reference.tolist() == retained.tolist()

    _emit(json.dumps(report), args.out)
    return EXIT_OK


def _cmd_synth(args: argparse.Namespace) -> int:
    params = SceneParams(
        n_clusters=args.clusters,
        tokens_per_cluster=args.tokens_per_cluster,
        n_background=args.background,
        d=args.dim,
        cluster_scale=args.cluster_scale,
        noise_sigma=args.noise_sigma,
        query_cluster=args.query_cluster,
        n_queries=args.queries,
        seed=args.seed,
    )
    scene = generate(params)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoFailure(f"cannot create {out_dir}: {exc}") from exc
    write_matrix(scene.tokens, out_dir / "tokens.npy")
    write_matrix(scene.queries, out_dir / "queries.npy")
    (out_dir / "labels.json").write_text(json.dumps(scene.labels) + "\n", encoding="utf-8")
    (out_dir / "params.json").write_text(
        json.dumps(asdict(params)) + "\n", encoding="utf-8"
    )
    print(
        json.dumps({"out_dir": str(out_dir), "n": scene.tokens.n, "d": scene.tokens.d}),
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_bench(args: argparse.Namespace) -> int:
    sizes: list[tuple[int, int]] = []
    for item in args.sizes.split(","):
        try:
            n_text, d_text = item.lower().split("x")
            sizes.append((int(n_text), int(d_text)))
        except ValueError as exc:
            raise InvalidParams(f"bad --sizes item {item!r} (expected NxD)") from exc
    if args.reps < 1:
        raise InvalidParams("--reps must be >= 1")

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n", "d", "q", "n_target", "focal_k", "reps", "fim_us", "cassm_us", "total_us"])
    rng = np.random.default_rng(args.seed)
    for n, d in sizes:
        tokens = TokenMatrix(rng.standard_normal((n, d)).astype(np.float32))
        queries = (
            TokenMatrix(rng.standard_normal((args.q, d)).astype(np.float32))
            if args.q
            else None
        )
        if args.n_target is not None:
            config = ReductionConfig(n_target=args.n_target, focal_k=args.focal_k)
        else:
            ratio = args.keep_ratio if args.keep_ratio is not None else 0.25
            config = ReductionConfig(keep_ratio=ratio, focal_k=args.focal_k)
        fim_us, cassm_us, total_us = [], [], []
        budget = config.resolve_budget(n)
        for _ in range(args.reps):
            result = prune(tokens, queries, config)
            fim_us.append(result.timings_us["fim"])
            cassm_us.append(result.timings_us["cassm"])
            total_us.append(result.timings_us["total"])
        writer.writerow(
            [
                n,
                d,
                args.q,
                budget,
                args.focal_k,
                args.reps,
                int(statistics.median(fim_us)),
                int(statistics.median(cassm_us)),
                int(statistics.median(total_us)),
            ]
        )
    _emit(buf.getvalue().rstrip("\n"), args.out)
    return EXIT_OK


_HANDLERS = {
    "prune": _cmd_prune,
    "diagnose": _cmd_diagnose,
    "synth": _cmd_synth,
    "bench": _cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except FocalpruneError as exc:
        return _fail(exc.code, exc.message)
    except OSError as exc:
        return _fail("io_failure", str(exc))


if __name__ == "__main__":
    sys.exit(main())
