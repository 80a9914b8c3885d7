"""Dense float32 matrices, the naive reference GEMM and comparison helpers.

Matrices are plain 2-D ``numpy.float32`` arrays in C (row-major) order.
:func:`as_matrix` is the single gate that enforces this.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import DimensionMismatch, FormatError, InvalidRange

FTGM_MAGIC = b"FTGM"


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Return ``x`` as a C-contiguous 2-D float32 array (no copy when possible)."""
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionMismatch(f"{name} must have rows, cols >= 1, got {arr.shape}")
    return np.ascontiguousarray(arr, dtype=np.float32)


def check_gemm_shapes(A: np.ndarray, B: np.ndarray, C: np.ndarray) -> None:
    if A.shape[1] != B.shape[0]:
        raise DimensionMismatch(f"A is {A.shape}, B is {B.shape}: inner dimensions differ")
    if C.shape != (A.shape[0], B.shape[1]):
        raise DimensionMismatch(f"C is {C.shape}, expected {(A.shape[0], B.shape[1])}")


def _inout(C) -> np.ndarray:
    """Validate an in-out C operand; it must already be float32 and C-contiguous."""
    if not isinstance(C, np.ndarray) or C.dtype != np.float32 or not C.flags.c_contiguous:
        raise DimensionMismatch("C must be a C-contiguous float32 ndarray (it is updated in place)")
    if C.ndim != 2:
        raise DimensionMismatch(f"C must be 2-D, got shape {C.shape}")
    return C


@dataclass(frozen=True)
class Tolerance:
    """Elementwise bound ``|x - y| <= abs + rel * max(|x|, |y|)``."""

    rel: float = 1e-4
    abs: float = 1e-5

    def __post_init__(self):
        if self.rel < 0 or self.abs < 0:
            raise InvalidRange("tolerances must be nonnegative")
        if self.rel == 0 and self.abs == 0:
            raise InvalidRange("rel and abs cannot both be zero")

    def holds(self, X, Y) -> bool:
        X = np.asarray(X, dtype=np.float64)
        Y = np.asarray(Y, dtype=np.float64)
        if X.shape != Y.shape:
            raise DimensionMismatch(f"shapes differ: {X.shape} vs {Y.shape}")
        bound = self.abs + self.rel * np.maximum(np.abs(X), np.abs(Y))
        return bool(np.all(np.abs(X - Y) <= bound))


DEFAULT_TOLERANCE = Tolerance(rel=1e-4, abs=1e-5)


@njit(cache=True)
def _naive_kernel(A, B, C):
    M, K = A.shape
    N = B.shape[1]
    for i in range(M):
        for j in range(N):
            s = np.float32(0.0)
            for k in range(K):
                s += A[i, k] * B[k, j]
            C[i, j] += s


def naive_gemm(A, B, C) -> np.ndarray:
    """Triple-loop ``C += A @ B`` with one accumulator per element, ascending k.

    This is the oracle every other kernel is compared against. ``C`` is
    updated in place and returned.
    """
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    C = _inout(C)
    check_gemm_shapes(A, B, C)
    _naive_kernel(A, B, C)
    return C


def max_rel_diff(X, Y) -> float:
    """Largest ``|x - y| / max(|x|, |y|, 1)`` over all elements."""
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    if X.shape != Y.shape:
        raise DimensionMismatch(f"shapes differ: {X.shape} vs {Y.shape}")
    denom = np.maximum(np.maximum(np.abs(X), np.abs(Y)), 1.0)
    return float(np.max(np.abs(X - Y) / denom)) if X.size else 0.0


def random_matrix(rows: int, cols: int, seed: int, bounds=(0.0, 1.0)) -> np.ndarray:
    """Seeded uniform matrix with values in ``[lo, hi)``; same inputs give the same bits."""
    lo, hi = float(bounds[0]), float(bounds[1])
    if not lo < hi:
        raise InvalidRange(f"need lo < hi, got [{lo}, {hi}]")
    if rows < 1 or cols < 1:
        raise DimensionMismatch(f"rows, cols must be >= 1, got {rows}x{cols}")
    rng = np.random.default_rng(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    u = rng.random((rows, cols), dtype=np.float32)
    if lo == 0.0 and hi == 1.0:
        return u
    out = (np.float32(lo) + np.float32(hi - lo) * u).astype(np.float32)
    # scaling can round up onto hi
    return np.minimum(out, np.nextafter(np.float32(hi), np.float32(lo)))


def write_ftgm(path, M) -> None:
    """Write ``M`` in the FTGM binary format (magic, u32 rows, u32 cols, f32 LE data)."""
    M = as_matrix(M)
    with open(path, "wb") as fh:
        fh.write(FTGM_MAGIC)
        fh.write(struct.pack("<II", M.shape[0], M.shape[1]))
        fh.write(M.astype("<f4", copy=False).tobytes(order="C"))


def read_ftgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != FTGM_MAGIC:
        raise FormatError(f"{path}: not an FTGM file")
    rows, cols = struct.unpack("<II", raw[4:12])
    if rows < 1 or cols < 1:
        raise FormatError(f"{path}: bad shape {rows}x{cols}")
    payload = raw[12:]
    if len(payload) != 4 * rows * cols:
        raise FormatError(f"{path}: expected {4 * rows * cols} data bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype="<f4").astype(np.float32).reshape(rows, cols)
