"""Embedding-matrix data model and a strict NPY v1.0 reader/writer.

The on-disk format is the narrow NPY v1.0 subset this project standardizes
on: little-endian float32, C order, exactly two dimensions.  The header is
parsed and emitted by hand so that anything outside that subset is rejected
with a precise error instead of being silently coerced.

All scores produced downstream are plain 1-D float64 ``numpy`` arrays,
aligned to token row indices (``ScoreVector`` is just an alias).
"""

from __future__ import annotations

import ast
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyInput,
    InvalidParams,
    IoFailure,
    LengthMismatch,
    MalformedHeader,
    NonFiniteData,
    UnsupportedDtype,
    UnsupportedLayout,
)

ScoreVector = np.ndarray

PathLike = Union[str, Path]

_MAGIC = b"\x93NUMPY"
_VERSION = b"\x01\x00"
_DTYPE = np.dtype("<f4")


@dataclass(frozen=True, eq=False)
class TokenMatrix:
    """N x d matrix of token embeddings.

    Row index is the token's identity everywhere downstream: every index
    set and score vector refers back to rows of the matrix it was computed
    from.  Data is float32, row-major, and guaranteed finite; the matrix is
    treated as immutable once constructed, which lets the float64 upcast
    and the row norms be computed once and cached.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = self.data
        if not isinstance(arr, np.ndarray) or arr.ndim != 2:
            raise UnsupportedLayout("token matrix must be a 2-D array")
        if arr.dtype != np.float32:
            raise UnsupportedDtype(f"token matrix must be float32, got {arr.dtype}")
        if not arr.flags["C_CONTIGUOUS"]:
            raise UnsupportedLayout("token matrix must be C-contiguous")
        if arr.shape[1] < 1:
            raise UnsupportedLayout("embedding dimension must be >= 1")
        if arr.size and not np.isfinite(arr).all():
            flat = int(np.flatnonzero(~np.isfinite(arr).ravel())[0])
            row, col = divmod(flat, arr.shape[1])
            raise NonFiniteData(f"non-finite value at row {row}, col {col}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[float]], d: int | None = None) -> "TokenMatrix":
        """Build from nested sequences; ``d`` disambiguates the empty case."""
        arr = np.asarray(rows, dtype=np.float32)
        if arr.ndim == 1 and arr.size == 0:
            arr = arr.reshape(0, d if d is not None else 1)
        return cls(np.ascontiguousarray(arr))

    @classmethod
    def empty(cls, d: int) -> "TokenMatrix":
        return cls(np.zeros((0, d), dtype=np.float32))

    @cached_property
    def _f64(self) -> np.ndarray:
        out = self.data.astype(np.float64)
        out.flags.writeable = False
        return out

    @cached_property
    def _sq_norms(self) -> np.ndarray:
        x = self._f64
        if x.shape[0] == 0:
            return np.empty(0, dtype=np.float64)
        out = np.einsum("nd,nd->n", x, x)
        out.flags.writeable = False
        return out

    def as_float64(self) -> np.ndarray:
        """Read-only float64 view used by all arithmetic downstream."""
        return self._f64

    def sq_norms(self) -> np.ndarray:
        """Read-only squared L2 row norms (float64)."""
        return self._sq_norms

    def take(self, indices: "IndexSet") -> "TokenMatrix":
        """Row subset as a new matrix (rows keep their relative order)."""
        indices.validate_against(self.n)
        return TokenMatrix(np.ascontiguousarray(self.data[indices.indices]))


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing row indices into some TokenMatrix."""

    indices: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.indices, dtype=np.int64)
        if arr.ndim != 1:
            raise InvalidParams("index set must be 1-D")
        if arr.size:
            if arr[0] < 0:
                raise InvalidParams("indices must be non-negative")
            if not (np.diff(arr) > 0).all():
                raise InvalidParams("indices must be strictly increasing")
        object.__setattr__(self, "indices", arr)

    @classmethod
    def from_iterable(cls, it: Iterable[int]) -> "IndexSet":
        return cls(np.array(sorted(set(int(i) for i in it)), dtype=np.int64))

    @classmethod
    def empty(cls) -> "IndexSet":
        return cls(np.empty(0, dtype=np.int64))

    def validate_against(self, n: int) -> None:
        if self.indices.size and int(self.indices[-1]) >= n:
            raise InvalidParams(
                f"index {int(self.indices[-1])} out of range for {n} tokens"
            )

    def complement(self, n: int) -> "IndexSet":
        """All indices in [0, n) not in this set, ascending."""
        self.validate_against(n)
        mask = np.ones(n, dtype=bool)
        mask[self.indices] = False
        return IndexSet(np.flatnonzero(mask).astype(np.int64))

    def union(self, other: "IndexSet") -> "IndexSet":
        return IndexSet(np.union1d(self.indices, other.indices).astype(np.int64))

    def tolist(self) -> list[int]:
        return [int(i) for i in self.indices]

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self) -> Iterator[int]:
        return iter(self.tolist())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IndexSet):
            return NotImplemented
        return np.array_equal(self.indices, other.indices)


def read_matrix(path: PathLike) -> TokenMatrix:
    """Read a token matrix from a strict NPY v1.0 file.

    Accepts only little-endian float32, C order, 2-D.  Raises
    MalformedHeader / UnsupportedDtype / UnsupportedLayout / NonFiniteData
    on anything else, IoFailure if the file cannot be read at all.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc

    if len(raw) < 10 or raw[:6] != _MAGIC:
        raise MalformedHeader(f"{path}: not an NPY file (bad magic)")
    if raw[6:8] != _VERSION:
        raise MalformedHeader(
            f"{path}: unsupported NPY version {raw[6]}.{raw[7]} (need 1.0)"
        )
    (header_len,) = struct.unpack("<H", raw[8:10])
    if len(raw) < 10 + header_len:
        raise MalformedHeader(f"{path}: truncated header")
    try:
        header = ast.literal_eval(raw[10 : 10 + header_len].decode("latin-1").strip())
    except (ValueError, SyntaxError) as exc:
        raise MalformedHeader(f"{path}: unparseable header dict") from exc
    if not isinstance(header, dict) or set(header) != {"descr", "fortran_order", "shape"}:
        raise MalformedHeader(f"{path}: header keys must be descr/fortran_order/shape")

    if header["descr"] != "<f4":
        raise UnsupportedDtype(
            f"{path}: dtype {header['descr']!r} unsupported (need '<f4')"
        )
    if header["fortran_order"] is not False:
        raise UnsupportedLayout(f"{path}: Fortran order is unsupported")
    shape = header["shape"]
    if (
        not isinstance(shape, tuple)
        or len(shape) != 2
        or not all(isinstance(s, int) and s >= 0 for s in shape)
    ):
        raise UnsupportedLayout(f"{path}: shape {shape!r} is not 2-D")

    n, d = shape
    payload = raw[10 + header_len :]
    if len(payload) != n * d * 4:
        raise MalformedHeader(
            f"{path}: payload is {len(payload)} bytes, expected {n * d * 4}"
        )
    if d < 1:
        raise UnsupportedLayout(f"{path}: embedding dimension must be >= 1")
    arr = np.frombuffer(payload, dtype=_DTYPE).reshape(n, d)
    if arr.size and not np.isfinite(arr).all():
        flat = int(np.flatnonzero(~np.isfinite(arr).ravel())[0])
        row, col = divmod(flat, d)
        raise NonFiniteData(f"{path}: non-finite value at row {row}, col {col}")
    # frombuffer yields a read-only view; copy so the file buffer can be freed.
    return TokenMatrix(np.ascontiguousarray(arr))


def write_matrix(m: TokenMatrix, path: PathLike) -> None:
    """Write a token matrix so that read_matrix round-trips it bit-exactly."""
    dict_text = "{'descr': '<f4', 'fortran_order': False, 'shape': (%d, %d), }" % (
        m.n,
        m.d,
    )
    # Pad with spaces so magic+version+length+header is a multiple of 64,
    # terminated by a newline, mirroring the canonical v1.0 layout.
    unpadded = len(_MAGIC) + 2 + 2 + len(dict_text) + 1
    pad = (64 - unpadded % 64) % 64
    header = dict_text + " " * pad + "\n"
    try:
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(_VERSION)
            fh.write(struct.pack("<H", len(header)))
            fh.write(header.encode("latin-1"))
            fh.write(m.data.astype(_DTYPE, copy=False).tobytes(order="C"))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def validate_scores(values: ScoreVector, n: int) -> None:
    """Check a score vector against the matrix it is supposed to describe."""
    arr = np.asarray(values)
    if arr.ndim != 1 or arr.size != n:
        raise LengthMismatch(f"score vector has length {arr.size}, expected {n}")
    if arr.size and not np.isfinite(arr).all():
        raise NonFiniteData("score vector contains non-finite values")


def require_same_dim(a: TokenMatrix, b: TokenMatrix, what: str) -> None:
    if a.d != b.d:
        raise DimensionMismatch(f"{what}: dimension {b.d} does not match {a.d}")


def require_nonempty(m: TokenMatrix, what: str) -> None:
    if m.n == 0:
        raise EmptyInput(f"{what} must contain at least one row")
