"""Blocked SGEMM with fused online algorithm-based fault tolerance."""
from .abft import (
    AbftConfig,
    ChecksumPrecision,
    ChecksumState,
    Granularity,
    Status,
    VerificationReport,
    abft_gemm_offline,
    abft_gemm_online,
    encode_col_checksum,
    encode_row_checksum,
    update_checksums,
    verify_and_correct,
)
from .blocked import KernelParams, PackedBlock, blocked_gemm, micro_kernel, pack_a_block, pack_b_block, validate_params
from .costmodel import CostModelResult, cost_model, monte_carlo, offline_expected_runs, overall_gamma
from .errors import *  # noqa: F403
from .faults import FaultEntry, FaultPlan, make_fault_plan, threshold_estimate
from .matrix import Tolerance, max_rel_diff, naive_gemm, random_matrix, read_ftgm, write_ftgm
from .select import ShapeClass, classify_shape, instantiate, params_for

__version__ = "0.1.0"
