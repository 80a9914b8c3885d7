import itertools

import numba
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ftgemm.blocked import (
    KernelParams,
    blocked_gemm,
    micro_kernel,
    pack_a_block,
    pack_b_block,
    validate_params,
)
from ftgemm.errors import DimensionMismatch, InvalidParams, OffsetOutOfRange
from ftgemm.matrix import DEFAULT_TOLERANCE, max_rel_diff, naive_gemm, random_matrix

from conftest import CATALOG_ROWS, HUGE, LARGE, SMALL, zeros

F = np.float32


def P(m_tb, n_tb, k_tb, m_w=None, n_w=None, m_t=1, n_t=1):
    return KernelParams(m_tb, n_tb, k_tb, m_w or m_tb, n_w or n_tb, m_t, n_t)


@pytest.mark.parametrize("cls,p", CATALOG_ROWS, ids=[c.value for c, _ in CATALOG_ROWS])
def test_catalog_rows_valid(cls, p):
    assert validate_params(p) == []


def test_validate_reports_violation():
    problems = validate_params(KernelParams(128, 128, 8, 48, 64, 8, 8))
    assert len(problems) == 1
    assert any("m_tb mod m_w" in s for s in problems)


def test_validate_nonpositive():
    assert validate_params(KernelParams(0, 16, 8, 8, 16, 2, 2))
    assert validate_params(KernelParams(16, 16, 0, 8, 16, 2, 2))
    assert len(validate_params(KernelParams(16, 16, 8, 6, 12, 4, 5))) == 4


def test_pack_a_full_copy():
    blk = pack_a_block(np.ones((4, 4), F), 0, 0, P(4, 4, 4))
    assert blk.payload.shape == (16,) and np.all(blk.payload == 1)


def test_pack_a_zero_padding():
    A = random_matrix(3, 3, 0) + 1
    blk = pack_a_block(A, 0, 0, P(4, 4, 4))
    U = blk.to_array()
    assert np.array_equal(U[:3, :3], A)
    assert np.all(U[3, :] == 0) and np.all(U[:, 3] == 0)


def test_pack_a_multiset():
    A = np.array([[1, 2], [3, 4]], F)
    blk = pack_a_block(A, 0, 0, P(2, 2, 2, m_t=1))
    assert sorted(blk.payload.tolist()) == [1, 2, 3, 4]


def test_pack_a_layout_is_microtile_major():
    A = np.arange(16, dtype=F).reshape(4, 4)
    blk = pack_a_block(A, 0, 0, P(4, 4, 2, m_t=2, n_t=2))
    # strip 0 holds rows 0-1, k-step major, micro-tile rows contiguous
    assert blk.payload[:4].tolist() == [0, 4, 1, 5]
    assert blk.payload[4:8].tolist() == [8, 12, 9, 13]


def test_pack_b_identity():
    blk = pack_b_block(np.eye(2, dtype=F), 0, 0, P(2, 2, 2))
    assert sorted(blk.payload.tolist()) == [0, 0, 1, 1]


def test_pack_b_zero_padding():
    B = random_matrix(3, 3, 1) + 1
    U = pack_b_block(B, 0, 0, P(4, 4, 4)).to_array()
    assert np.array_equal(U[:3, :3], B) and np.all(U[:, 3] == 0) and np.all(U[3] == 0)


@pytest.mark.parametrize("p", [P(8, 8, 8, m_t=2, n_t=4), P(8, 8, 8, m_t=8, n_t=1), P(4, 8, 4, m_t=4, n_t=8)])
def test_pack_roundtrip(p):
    X = random_matrix(8, 8, 3)
    assert np.array_equal(pack_b_block(X, 0, 0, p).to_array()[: p.k_tb, : p.n_tb], X[: p.k_tb, : p.n_tb])
    assert np.array_equal(pack_a_block(X, 0, 0, p).to_array()[: p.m_tb, : p.k_tb], X[: p.m_tb, : p.k_tb])


def test_pack_offsets_and_origin():
    X = random_matrix(10, 12, 4)
    p = P(4, 4, 4, m_t=2, n_t=2)
    a = pack_a_block(X, 4, 8, p)
    assert a.origin == (1, 2) and np.array_equal(a.to_array(), X[4:8, 8:12])
    b = pack_b_block(X, 8, 4, p)
    U = b.to_array()
    assert np.array_equal(U[:2], X[8:10, 4:8]) and np.all(U[2:] == 0)


def test_pack_offset_errors():
    with pytest.raises(OffsetOutOfRange):
        pack_a_block(np.ones((3, 3), F), 3, 0, SMALL)
    with pytest.raises(OffsetOutOfRange):
        pack_b_block(np.ones((3, 3), F), 0, -1, SMALL)
    with pytest.raises(InvalidParams):
        pack_a_block(np.ones((3, 3), F), 0, 0, KernelParams(6, 4, 2, 4, 4, 2, 2))


def test_micro_kernel_zero_a():
    acc = random_matrix(2, 2, 0)
    before = acc.copy()
    micro_kernel(zeros(2, 3), random_matrix(3, 2, 1), acc)
    assert np.array_equal(acc, before)


def test_micro_kernel_2x2():
    acc = zeros(2, 2)
    micro_kernel(np.array([[1, 2], [3, 4]], F), np.array([[5, 6], [7, 8]], F), acc)
    assert acc.tolist() == [[19, 22], [43, 50]]


def test_micro_kernel_hook_after_last_step():
    acc = zeros(2, 2)
    micro_kernel(np.array([[1, 2], [3, 4]], F), np.array([[5, 6], [7, 8]], F), acc, hook=[(1, 0, 1, 5.0)])
    assert acc.tolist() == [[19, 27], [43, 50]]


def test_micro_kernel_hook_mid_accumulation():
    acc = zeros(2, 2)
    micro_kernel(np.array([[1, 2], [3, 4]], F), np.array([[5, 6], [7, 8]], F), acc, hook=[(0, 1, 0, -3.0)])
    assert acc.tolist() == [[19, 22], [40, 50]]


def test_micro_kernel_shape_error():
    with pytest.raises(DimensionMismatch):
        micro_kernel(zeros(2, 3), zeros(2, 2), zeros(2, 2))


def test_blocked_large_row_128():
    A, B = random_matrix(128, 128, 42), random_matrix(128, 128, 43)
    C = blocked_gemm(A, B, zeros(128, 128), LARGE)
    assert max_rel_diff(C, naive_gemm(A, B, zeros(128, 128))) <= 1e-4


@pytest.mark.parametrize("cls,p", CATALOG_ROWS, ids=[c.value for c, _ in CATALOG_ROWS])
def test_blocked_identity_copies_b(cls, p):
    B = random_matrix(37, 29, 5, (-2, 2))
    C0 = random_matrix(37, 29, 6)
    C = blocked_gemm(np.eye(37, dtype=F), B, C0.copy(), p)
    assert np.array_equal(C, C0 + B)


def test_blocked_scalar():
    C = blocked_gemm(np.array([[3.0]], F), np.array([[4.0]], F), np.array([[1.0]], F), SMALL)
    assert C[0, 0] == 13.0


@pytest.mark.parametrize("cls,p", CATALOG_ROWS, ids=[c.value for c, _ in CATALOG_ROWS])
def test_blocked_matches_naive_bitwise(cls, p):
    # same ascending-k accumulation from zero, so even the bits agree
    A, B = random_matrix(70, 150, 1), random_matrix(150, 90, 2)
    C0 = random_matrix(70, 90, 3)
    assert np.array_equal(blocked_gemm(A, B, C0.copy(), p), naive_gemm(A, B, C0.copy()))


def test_edge_totality():
    p = KernelParams(8, 8, 4, 4, 8, 2, 4)
    dims = sorted({1, p.m_t - 1, p.m_t, p.m_tb - 1, p.m_tb, p.m_tb + 1} - {0})
    for M, N, K in itertools.product(dims, repeat=3):
        A, B = random_matrix(M, K, M), random_matrix(K, N, N)
        C = blocked_gemm(A, B, zeros(M, N), p)
        assert np.array_equal(C, naive_gemm(A, B, zeros(M, N))), (M, N, K)


def test_generic_kernel_for_uncataloged_tiling():
    p = KernelParams(48, 48, 8, 24, 48, 8, 8)
    A, B = random_matrix(100, 70, 1), random_matrix(70, 130, 2)
    assert np.array_equal(blocked_gemm(A, B, zeros(100, 130), p), naive_gemm(A, B, zeros(100, 130)))


def test_deterministic_across_thread_counts():
    A, B = random_matrix(300, 200, 1), random_matrix(200, 260, 2)
    full = blocked_gemm(A, B, zeros(300, 260), HUGE)
    old = numba.get_num_threads()
    try:
        numba.set_num_threads(1)
        single = blocked_gemm(A, B, zeros(300, 260), HUGE)
    finally:
        numba.set_num_threads(old)
    assert np.array_equal(full, single)


def test_blocked_errors():
    with pytest.raises(DimensionMismatch):
        blocked_gemm(zeros(4, 3), zeros(4, 3), zeros(4, 3), SMALL)
    with pytest.raises(InvalidParams):
        blocked_gemm(zeros(4, 4), zeros(4, 4), zeros(4, 4), KernelParams(128, 128, 8, 48, 64, 8, 8))


@given(M=st.integers(1, 80), N=st.integers(1, 80), K=st.integers(1, 80), seed=st.integers(0, 1000))
def test_blocked_oracle_property(M, N, K, seed):
    A, B = random_matrix(M, K, seed, (-1, 1)), random_matrix(K, N, seed + 1, (-1, 1))
    C = blocked_gemm(A, B, zeros(M, N), SMALL)
    assert DEFAULT_TOLERANCE.holds(C, A.astype(np.float64) @ B)
