"""Three-tier blocked SGEMM: cache block, panel, micro-tile.

A cache block (``m_tb x n_tb``) of C is owned by one worker from start to
finish. Its k-loop walks slabs of ``k_tb``; each slab of A and B is copied
into one of two alternating staging buffers (the next slab is packed before
the current one is consumed). Panels (``m_w x n_w``) partition the block and
micro-tiles (``m_t x n_t``) partition the panels; the micro-kernel updates a
micro-tile's accumulators one k-step at a time.
"""
from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np

from . import _kernels as K
from .errors import DimensionMismatch, InvalidParams, OffsetOutOfRange
from .matrix import _inout, as_matrix, check_gemm_shapes


@dataclass(frozen=True)
class KernelParams:
    m_tb: int
    n_tb: int
    k_tb: int
    m_w: int
    n_w: int
    m_t: int
    n_t: int

    def astuple(self) -> tuple:
        return astuple(self)

    def __str__(self):
        return "(" + ",".join(str(v) for v in self.astuple()) + ")"


def validate_params(p: KernelParams) -> list[str]:
    """Every violated tiling invariant of ``p``; an empty list means valid."""
    problems = []
    for name, value in zip(("m_tb", "n_tb", "k_tb", "m_w", "n_w", "m_t", "n_t"), p.astuple()):
        if not isinstance(value, (int, np.integer)) or value < 1:
            problems.append(f"{name} must be a positive integer, got {value!r}")
    if problems:
        return problems
    if p.m_tb % p.m_w:
        problems.append(f"m_tb mod m_w != 0 ({p.m_tb} mod {p.m_w} = {p.m_tb % p.m_w})")
    if p.n_tb % p.n_w:
        problems.append(f"n_tb mod n_w != 0 ({p.n_tb} mod {p.n_w} = {p.n_tb % p.n_w})")
    if p.m_w % p.m_t:
        problems.append(f"m_w mod m_t != 0 ({p.m_w} mod {p.m_t} = {p.m_w % p.m_t})")
    if p.n_w % p.n_t:
        problems.append(f"n_w mod n_t != 0 ({p.n_w} mod {p.n_t} = {p.n_w % p.n_t})")
    return problems


def require_valid(p: KernelParams) -> None:
    problems = validate_params(p)
    if problems:
        raise InvalidParams("; ".join(problems))


@dataclass
class PackedBlock:
    """One staged k-slab of A (``kind='A'``, ``m_tb x k_tb``) or B (``'B'``, ``k_tb x n_tb``).

    ``payload`` is micro-tile major (see :mod:`ftgemm._kernels`), zero padded
    past the matrix edge. ``origin`` is (block-row, block-col) in tile units.
    """

    kind: str
    payload: np.ndarray
    origin: tuple[int, int]
    rows: int
    cols: int
    strip: int  # m_t for A blocks, n_t for B blocks

    def to_array(self) -> np.ndarray:
        """Undo the staging layout, returning a plain ``rows x cols`` array."""
        if self.kind == "A":
            m_tb, k_tb, m_t = self.rows, self.cols, self.strip
            t = self.payload.reshape(m_tb // m_t, k_tb, m_t)
            return np.ascontiguousarray(t.transpose(0, 2, 1).reshape(m_tb, k_tb))
        k_tb, n_tb, n_t = self.rows, self.cols, self.strip
        t = self.payload.reshape(n_tb // n_t, k_tb, n_t)
        return np.ascontiguousarray(t.transpose(1, 0, 2).reshape(k_tb, n_tb))


def pack_a_block(A, i0: int, k0: int, p: KernelParams) -> PackedBlock:
    A = as_matrix(A, "A")
    require_valid(p)
    if not (0 <= i0 < A.shape[0] and 0 <= k0 < A.shape[1]):
        raise OffsetOutOfRange(f"offset ({i0}, {k0}) outside A of shape {A.shape}")
    buf = np.empty(p.m_tb * p.k_tb, np.float32)
    K.pack_a_entry(A, i0, k0, p.m_tb, p.k_tb, p.m_t, buf)
    return PackedBlock("A", buf, (i0 // p.m_tb, k0 // p.k_tb), p.m_tb, p.k_tb, p.m_t)


def pack_b_block(B, k0: int, j0: int, p: KernelParams) -> PackedBlock:
    B = as_matrix(B, "B")
    require_valid(p)
    if not (0 <= k0 < B.shape[0] and 0 <= j0 < B.shape[1]):
        raise OffsetOutOfRange(f"offset ({k0}, {j0}) outside B of shape {B.shape}")
    buf = np.empty(p.k_tb * p.n_tb, np.float32)
    K.pack_b_entry(B, k0, j0, p.n_tb, p.k_tb, p.n_t, buf)
    return PackedBlock("B", buf, (k0 // p.k_tb, j0 // p.n_tb), p.k_tb, p.n_tb, p.n_t)


def micro_kernel(a_frag, b_frag, acc, hook=()):
    """``acc += a_frag @ b_frag`` accumulated one k-step at a time.

    ``hook`` is a sequence of ``(k, row, col, delta)``; after k-step ``k`` the
    offset ``delta`` is added to ``acc[row, col]``. Returns ``acc``.
    """
    a_frag = as_matrix(a_frag, "a_frag")
    b_frag = as_matrix(b_frag, "b_frag")
    m_t, k_tb = a_frag.shape
    if b_frag.shape[0] != k_tb or acc.shape != (m_t, b_frag.shape[1]):
        raise DimensionMismatch(f"fragments {a_frag.shape} x {b_frag.shape} vs acc {acc.shape}")
    acc = _inout(acc)
    n_t = b_frag.shape[1]
    hook = list(hook)
    hk = np.array([h[0] for h in hook], np.int64)
    hr = np.array([h[1] for h in hook], np.int64)
    hc = np.array([h[2] for h in hook], np.int64)
    hd = np.array([h[3] for h in hook], np.float32)
    pa = np.ascontiguousarray(a_frag.T).ravel()
    pb = b_frag.ravel()
    K.micro_kernel_entry(pa, pb, acc, k_tb, m_t, n_t, hk, hr, hc, hd)
    return acc


def blocked_gemm(A, B, C, p: KernelParams, hook=None, *, specialized: bool | None = None) -> np.ndarray:
    """``C += A @ B`` through the blocked hierarchy; ``C`` is updated in place.

    ``hook`` is an optional :class:`~ftgemm.faults.FaultPlan` whose entries
    are injected into the accumulators (no detection happens on this path).
    Catalog parameter rows run their specialized kernel unless
    ``specialized=False``.
    """
    from ._engine import run

    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    C = _inout(C)
    check_gemm_shapes(A, B, C)
    require_valid(p)
    run(A, B, C, p, K.MODE_PLAIN, plan=hook, specialized=specialized)
    return C
