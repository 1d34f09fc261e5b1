"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from focalprune import TokenMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)


def random_matrix(rng, n, d, zero_rows=0, dup_rows=0) -> TokenMatrix:
    """Gaussian token field with optional degenerate rows mixed in."""
    arr = rng.standard_normal((n, d)).astype(np.float32)
    for i in range(min(zero_rows, n)):
        arr[i] = 0.0
    for i in range(min(dup_rows, max(0, n - 1))):
        arr[n - 1 - i] = arr[i]
    return TokenMatrix(arr)


def random_instance(rng, max_n=256, max_d=64, max_q=16):
    """Log-uniform sizes so the quadratic oracle stays cheap on average."""
    n = int(np.exp(rng.uniform(0.0, np.log(max_n)))) + 0
    d = int(np.exp(rng.uniform(np.log(2.0), np.log(max_d))))
    q = 0 if rng.random() < 0.15 else int(rng.integers(1, max_q + 1))
    tokens = random_matrix(
        rng,
        n,
        d,
        zero_rows=int(rng.random() < 0.2) * int(rng.integers(0, 3)),
        dup_rows=int(rng.random() < 0.2) * int(rng.integers(0, 3)),
    )
    if q:
        queries = TokenMatrix(rng.standard_normal((q, d)).astype(np.float32))
    else:
        queries = TokenMatrix.empty(d)
    return tokens, queries
