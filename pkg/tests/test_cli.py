"""Command-line contract tests (run through a real subprocess)."""

from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from focalprune import TokenMatrix, write_matrix

from conftest import random_matrix


def run_cli(*args, **kwargs):
    return subprocess.run(
        [sys.executable, "-m", "focalprune.cli", *map(str, args)],
        capture_output=True,
        text=True,
        **kwargs,
    )


@pytest.fixture
def scene_files(rng, tmp_path):
    tokens = random_matrix(rng, 30, 8)
    queries = TokenMatrix(rng.standard_normal((3, 8)).astype(np.float32))
    write_matrix(tokens, tmp_path / "tokens.npy")
    write_matrix(queries, tmp_path / "queries.npy")
    return tmp_path


class TestPruneCommand:
    def test_keep_ratio_budget(self, scene_files):
        proc = run_cli(
            "prune",
            "--tokens", scene_files / "tokens.npy",
            "--queries", scene_files / "queries.npy",
            "--keep-ratio", 0.333,
        )
        assert proc.returncode == 0, proc.stderr
        payload = json.loads(proc.stdout)
        assert len(payload["retained"]) == round(0.333 * 30)
        assert payload["query_absent"] is False

    def test_no_query_mode(self, scene_files):
        proc = run_cli(
            "prune", "--tokens", scene_files / "tokens.npy", "--no-query",
            "--n-target", 10,
        )
        assert proc.returncode == 0
        payload = json.loads(proc.stdout)
        assert payload["query_absent"] is True
        assert payload["q"] == 0

    def test_zero_target_is_validation_error(self, scene_files):
        proc = run_cli(
            "prune", "--tokens", scene_files / "tokens.npy", "--no-query",
            "--n-target", 0,
        )
        assert proc.returncode == 2
        assert proc.stdout == ""
        err = json.loads(proc.stderr)
        assert err["error"] == "budget_invalid"

    def test_conflicting_budget_flags_usage_error(self, scene_files):
        proc = run_cli(
            "prune", "--tokens", scene_files / "tokens.npy", "--no-query",
            "--n-target", 5, "--keep-ratio", 0.5,
        )
        assert proc.returncode == 2

    def test_missing_budget_usage_error(self, scene_files):
        proc = run_cli("prune", "--tokens", scene_files / "tokens.npy", "--no-query")
        assert proc.returncode == 2

    def test_missing_file_is_io_error(self, tmp_path):
        proc = run_cli(
            "prune", "--tokens", tmp_path / "nope.npy", "--no-query", "--n-target", 1
        )
        assert proc.returncode == 1
        assert json.loads(proc.stderr)["error"] == "io_failure"

    def test_out_file(self, scene_files):
        out = scene_files / "r.json"
        proc = run_cli(
            "prune", "--tokens", scene_files / "tokens.npy", "--no-query",
            "--n-target", 8, "--out", out,
        )
        assert proc.returncode == 0
        assert json.loads(out.read_text())["n"] == 30

    def test_stdout_is_pure_json(self, scene_files):
        proc = run_cli(
            "prune", "--tokens", scene_files / "tokens.npy", "--no-query",
            "--n-target", 4,
        )
        json.loads(proc.stdout)  # exactly one machine-readable document


class TestDiagnoseCommand:
    def _result(self, scene_files, n_target=10):
        out = scene_files / "r.json"
        proc = run_cli(
            "prune",
            "--tokens", scene_files / "tokens.npy",
            "--queries", scene_files / "queries.npy",
            "--n-target", n_target,
            "--out", out,
        )
        assert proc.returncode == 0
        return out

    def test_identity_reduction_has_zero_radius(self, scene_files):
        result = self._result(scene_files, n_target=30)
        proc = run_cli(
            "diagnose", "--tokens", scene_files / "tokens.npy", "--result", result
        )
        assert proc.returncode == 0
        report = json.loads(proc.stdout)
        assert report["radius"] == 0.0
        assert report["worst_discarded"] is None

    def test_flops_ratio_for_known_dims(self, scene_files):
        result = self._result(scene_files)
        proc = run_cli(
            "diagnose", "--tokens", scene_files / "tokens.npy", "--result", result,
            "--flops", "d=4096,m=11008,T=32,R=2,text=0",
        )
        report = json.loads(proc.stdout)
        # only the sequence lengths (30 -> 10 here) matter for the shape of
        # the ratio; with the 576 -> 192 budget this lands in 0.33..0.40
        assert 0 < report["flops"]["ratio"] < 1

    def test_flops_llava_shape(self, rng, tmp_path):
        tokens = random_matrix(rng, 576, 8)
        write_matrix(tokens, tmp_path / "t.npy")
        proc = run_cli(
            "prune", "--tokens", tmp_path / "t.npy", "--no-query",
            "--n-target", 192, "--out", tmp_path / "r.json",
        )
        assert proc.returncode == 0
        proc = run_cli(
            "diagnose", "--tokens", tmp_path / "t.npy", "--result", tmp_path / "r.json",
            "--flops", "d=4096,m=11008,T=32,R=2",
        )
        ratio = json.loads(proc.stdout)["flops"]["ratio"]
        assert 0.33 <= ratio <= 0.40

    def test_baseline_recall_deterministic(self, rng, tmp_path):
        proc = run_cli(
            "synth", "--out-dir", tmp_path / "scene", "--seed", 5,
            "--clusters", 3, "--tokens-per-cluster", 6, "--background", 10,
        )
        assert proc.returncode == 0, proc.stderr
        scene = tmp_path / "scene"
        proc = run_cli(
            "prune", "--tokens", scene / "tokens.npy", "--queries", scene / "queries.npy",
            "--keep-ratio", 0.4, "--out", tmp_path / "r.json",
        )
        assert proc.returncode == 0
        runs = []
        for _ in range(2):
            proc = run_cli(
                "diagnose", "--tokens", scene / "tokens.npy",
                "--result", tmp_path / "r.json",
                "--queries", scene / "queries.npy",
                "--labels", scene / "labels.json",
                "--baselines", "all", "--seed", 1,
            )
            assert proc.returncode == 0, proc.stderr
            runs.append(proc.stdout)
        assert runs[0] == runs[1]
        recall = json.loads(runs[0])["recall_by_method"]
        assert set(recall) == {
            "pruner", "random", "uniform_stride", "saliency_topk",
            "relevance_topk", "maxmin_diversity",
        }

    def test_token_count_mismatch_rejected(self, rng, scene_files, tmp_path):
        result = self._result(scene_files)
        other = random_matrix(rng, 12, 8)
        write_matrix(other, tmp_path / "other.npy")
        proc = run_cli("diagnose", "--tokens", tmp_path / "other.npy", "--result", result)
        assert proc.returncode == 2

    def test_with_oracle_agrees(self, scene_files):
        result = self._result(scene_files)
        proc = run_cli(
            "diagnose", "--tokens", scene_files / "tokens.npy", "--result", result,
            "--queries", scene_files / "queries.npy", "--with-oracle",
        )
        assert proc.returncode == 0
        assert json.loads(proc.stdout)["oracle_match"] is True


class TestSynthCommand:
    def test_deterministic_files(self, tmp_path):
        for sub in ("a", "b"):
            proc = run_cli("synth", "--out-dir", tmp_path / sub, "--seed", 11)
            assert proc.returncode == 0
        for name in ("tokens.npy", "queries.npy", "labels.json", "params.json"):
            assert (tmp_path / "a" / name).read_bytes() == (
                tmp_path / "b" / name
            ).read_bytes()

    def test_invalid_params_exit_code(self, tmp_path):
        proc = run_cli("synth", "--out-dir", tmp_path / "x", "--clusters", 0)
        assert proc.returncode == 2


class TestBenchCommand:
    def test_csv_schema(self, tmp_path):
        proc = run_cli(
            "bench", "--sizes", "64x16,128x8", "--q", 4, "--reps", 3,
            "--keep-ratio", 0.25,
        )
        assert proc.returncode == 0, proc.stderr
        lines = proc.stdout.strip().splitlines()
        assert lines[0] == "n,d,q,n_target,focal_k,reps,fim_us,cassm_us,total_us"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[:6] == ["64", "16", "4", "16", "8", "3"]
        assert all(int(v) >= 0 for v in first[6:])

    def test_reps_change_only_timings(self, tmp_path):
        a = run_cli("bench", "--sizes", "32x8", "--reps", 1)
        b = run_cli("bench", "--sizes", "32x8", "--reps", 9)
        head_a = [line.split(",")[:6] for line in a.stdout.splitlines()]
        head_b = [line.split(",")[:6] for line in b.stdout.splitlines()]
        assert head_a[0] == head_b[0]
        assert head_a[1][:5] == head_b[1][:5]

    def test_bad_sizes_rejected(self):
        proc = run_cli("bench", "--sizes", "64by16")
        assert proc.returncode == 2
