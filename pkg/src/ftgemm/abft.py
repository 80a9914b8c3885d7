"""Checksum-protected GEMM: online correction and offline detect-and-recompute.

Each output block carries a column checksum (``e^T C``) and a row checksum
(``C e``) built from encoded operand slabs: ``e^T A`` is accumulated while A
is packed and ``B e`` while B is packed, and every slab adds
``(e^T A_slab) B_slab`` and ``A_slab (B_slab e)``. Every ``interval`` elements
of K the block's sums are compared with the checksums. One bad row and one
bad column locate a single corrupted element, which is repaired in place.

Granularity picks the size of the protected regions: a whole cache block,
each panel, or each micro-tile (whose checksums live inside the micro-kernel).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from ._engine import block_grid, cdiv, make_workspace, n_regions, plan_arrays, run, tiles_for
from .blocked import KernelParams, PackedBlock, require_valid
from .errors import DimensionMismatch, InvalidArguments, InvalidParams, NonTermination
from .matrix import _inout, as_matrix, check_gemm_shapes

MAX_CONSECUTIVE_FAILURES = 64


class Granularity(enum.Enum):
    MICRO_TILE = "microtile"
    PANEL = "panel"
    BLOCK = "block"

    @classmethod
    def parse(cls, text: str) -> "Granularity":
        t = text.strip().lower().replace("-", "").replace("_", "")
        for g in cls:
            if g.value == t:
                return g
        raise InvalidArguments(f"unknown granularity {text!r} (choose microtile, panel or block)")


class ChecksumPrecision(enum.Enum):
    SAME32 = "same32"
    WIDE64 = "wide64"


class Status(enum.IntEnum):
    CLEAN = K.ST_CLEAN
    CORRECTED = K.ST_CORRECTED
    UNRECOVERABLE = K.ST_UNRECOVERABLE
    DETECTED = K.ST_DETECTED  # detect-only verification found a single error


_MODE = {
    Granularity.MICRO_TILE: K.MODE_MICRO,
    Granularity.PANEL: K.MODE_PANEL,
    Granularity.BLOCK: K.MODE_BLOCK,
}


@dataclass(frozen=True)
class AbftConfig:
    granularity: Granularity = Granularity.BLOCK
    interval: int = 256
    threshold_scale: float = 8.0
    checksum_precision: ChecksumPrecision = ChecksumPrecision.SAME32

    def __post_init__(self):
        if isinstance(self.granularity, str):
            object.__setattr__(self, "granularity", Granularity.parse(self.granularity))
        if isinstance(self.checksum_precision, str):
            object.__setattr__(self, "checksum_precision", ChecksumPrecision(self.checksum_precision.lower()))
        if not isinstance(self.interval, (int, np.integer)) or self.interval < 1:
            raise InvalidArguments(f"interval must be a positive integer, got {self.interval!r}")
        if not self.threshold_scale > 0:
            raise InvalidArguments(f"threshold_scale must be > 0, got {self.threshold_scale!r}")

    @property
    def wide(self) -> bool:
        return self.checksum_precision is ChecksumPrecision.WIDE64

    @property
    def mode(self) -> int:
        return _MODE[self.granularity]

    def region(self, p: KernelParams) -> tuple[int, int]:
        return {
            Granularity.MICRO_TILE: (p.m_t, p.n_t),
            Granularity.PANEL: (p.m_w, p.n_w),
            Granularity.BLOCK: (p.m_tb, p.n_tb),
        }[self.granularity]

    def check(self, p: KernelParams) -> None:
        require_valid(p)
        if self.interval % p.k_tb:
            raise InvalidParams(f"interval {self.interval} is not a multiple of k_tb={p.k_tb}")


def threshold_for(cfg: AbftConfig, p: KernelParams, k_covered: int, mag_epoch: float, mag_total: float) -> float:
    """Detection threshold of one region check (see ``_kernels.threshold``)."""
    reg_m, reg_n = cfg.region(p)
    return float(K.threshold_entry(float(cfg.threshold_scale), int(k_covered), max(reg_m, reg_n), p.k_tb,
                                   float(mag_epoch), float(mag_total), cfg.wide))


class Correction(NamedTuple):
    block: tuple[int, int]
    row: int  # within the block
    col: int
    delta: float  # recovered offset, subtracted from C
    epoch: int = 0


class Mismatch(NamedTuple):
    block: tuple[int, int]
    epoch: int
    region: int
    status: Status
    bad_rows: int
    bad_cols: int
    max_residual: float
    tau: float
    row_residual: np.ndarray | None = None
    col_residual: np.ndarray | None = None


@dataclass
class VerificationReport:
    status: Status = Status.CLEAN
    corrections: list = field(default_factory=list)
    intervals_checked: int = 0
    mismatch_detail: list = field(default_factory=list)
    # per (block, epoch): worst region status, threshold and largest residual
    epoch_status: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), np.int8))
    taus: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    max_residual: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    grid: tuple[int, int] = (0, 0)
    flops: dict = field(default_factory=dict)
    fired: np.ndarray = field(default_factory=lambda: np.zeros(0, np.int64))

    @property
    def errors_corrected(self) -> int:
        return len(self.corrections)

    @property
    def errors_injected(self) -> int:
        return int(np.count_nonzero(self.fired))

    def count(self, status: Status) -> int:
        return int(np.count_nonzero(self.epoch_status == int(status)))


@dataclass
class ChecksumState:
    """Checksum accumulators of one protected block.

    ``col_checksum``/``row_checksum`` hold this epoch's contributions;
    ``col_ref``/``row_ref`` are the block's column/row sums at the epoch start.
    """

    col_checksum: np.ndarray
    row_checksum: np.ndarray
    col_ref: np.ndarray
    row_ref: np.ndarray
    k_covered: int = 0
    k_tb: int = 0
    mag_epoch: float = 0.0
    mag_total: float = 0.0

    @classmethod
    def zeros(cls, m: int, n: int, precision: ChecksumPrecision = ChecksumPrecision.SAME32) -> "ChecksumState":
        dt = np.float64 if precision is ChecksumPrecision.WIDE64 else np.float32
        return cls(np.zeros(n, dt), np.zeros(m, dt), np.zeros(n), np.zeros(m))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.row_checksum), len(self.col_checksum)


def encode_col_checksum(blk: PackedBlock) -> np.ndarray:
    """``e^T A`` over a staged A slab: one sum per k column."""
    if blk.kind != "A":
        raise InvalidArguments("encode_col_checksum expects an A-side packed block")
    out = np.zeros(blk.cols, np.float32)
    K.encode_a_entry(blk.payload, blk.rows, blk.cols, blk.strip, out)
    return out


def encode_row_checksum(blk: PackedBlock) -> np.ndarray:
    """``B e`` over a staged B slab: one sum per k row."""
    if blk.kind != "B":
        raise InvalidArguments("encode_row_checksum expects a B-side packed block")
    out = np.zeros(blk.rows, np.float32)
    K.encode_b_entry(blk.payload, blk.cols, blk.rows, blk.strip, out)
    return out


def update_checksums(cs: ChecksumState, a_colsum, b_rowsum, a_blk: PackedBlock, b_blk: PackedBlock) -> ChecksumState:
    """Fold one slab into ``cs``: ``col += (e^T A) B`` and ``row += A (B e)``."""
    m_tb, k_tb = a_blk.rows, a_blk.cols
    n_tb = b_blk.cols
    if b_blk.rows != k_tb:
        raise DimensionMismatch(f"slab k extents differ: {k_tb} vs {b_blk.rows}")
    if cs.shape != (m_tb, n_tb):
        raise DimensionMismatch(f"checksum state is {cs.shape}, slabs give {(m_tb, n_tb)}")
    dt = cs.col_checksum.dtype
    enca = np.asarray(a_colsum, dt).reshape(1, -1)
    encb = np.asarray(b_rowsum, dt).reshape(1, -1)
    if enca.shape[1] != k_tb or encb.shape[1] != k_tb:
        raise DimensionMismatch(f"encoded vectors must have length {k_tb}")
    K.update_entry(a_blk.payload, b_blk.payload, enca, encb,
                   cs.col_checksum.reshape(1, -1), cs.row_checksum.reshape(1, -1),
                   m_tb, n_tb, k_tb, a_blk.strip, b_blk.strip, dt.type(0))
    cs.k_covered += k_tb
    cs.k_tb = k_tb
    mag = float(np.max(np.abs(a_blk.payload), initial=0.0)) * float(np.max(np.abs(b_blk.payload), initial=0.0))
    cs.mag_epoch += mag
    cs.mag_total += mag
    return cs


def _outs(n: int = 1):
    return (np.zeros(n, np.int8), np.full(n, -1, np.int64), np.full(n, -1, np.int64), np.zeros(n),
            np.zeros(n, np.int64), np.zeros(n, np.int64), np.zeros(n))


def verify_and_correct(C_blk, cs: ChecksumState, cfg: AbftConfig | None = None, *, correct: bool = True) -> VerificationReport:
    """Compare ``C_blk`` with its checksums and repair a single corrupted element.

    ``C_blk`` is a float32 array updated in place. On return the checksum
    state has moved on to the next epoch (references advanced, accumulators
    cleared) unless ``correct=False`` found a problem.
    """
    cfg = cfg or AbftConfig()
    acc = _inout(C_blk)
    m, n = acc.shape
    if cs.shape != (m, n):
        raise DimensionMismatch(f"checksum state is {cs.shape}, block is {(m, n)}")
    k_tb = cs.k_tb or max(cs.k_covered, 1)
    tau = float(K.threshold_entry(float(cfg.threshold_scale), cs.k_covered, max(m, n), k_tb,
                                  cs.mag_epoch, cs.mag_total, cfg.wide))
    acc64 = acc.astype(np.float64)
    row_res = acc64.sum(axis=1) - cs.row_ref - cs.row_checksum
    col_res = acc64.sum(axis=0) - cs.col_ref - cs.col_checksum
    outs = _outs()
    st = Status(K.verify_entry(acc, cs.col_checksum.reshape(1, -1), cs.row_checksum.reshape(1, -1),
                               cs.col_ref.reshape(1, -1), cs.row_ref.reshape(1, -1), tau, correct, outs))
    report = VerificationReport(status=st, intervals_checked=1, grid=(1, 1),
                                epoch_status=np.array([[int(st)]], np.int8),
                                taus=np.array([[tau]]), max_residual=outs[6].reshape(1, 1))
    if st in (Status.CORRECTED, Status.DETECTED):
        report.corrections.append(Correction((0, 0), int(outs[1][0]), int(outs[2][0]), float(outs[3][0])))
    if st is not Status.CLEAN:
        report.mismatch_detail.append(Mismatch((0, 0), 0, 0, st, int(outs[4][0]), int(outs[5][0]),
                                               float(outs[6][0]), tau, row_res, col_res))
    if correct or st is Status.CLEAN:
        cs.k_covered = 0
        cs.mag_epoch = 0.0
    return report


def _report_from_run(out, p: KernelParams) -> VerificationReport:
    nbi, nbj = out.grid
    status = out.status
    worst = np.zeros(status.shape[:2], np.int8)
    # Unrecoverable outranks Corrected outranks Clean
    for s in (Status.CORRECTED, Status.UNRECOVERABLE):
        worst[np.any(status == int(s), axis=2)] = int(s)
    rep = VerificationReport(
        status=Status(int(worst.max())) if worst.size else Status.CLEAN,
        intervals_checked=int(worst.size),
        epoch_status=worst,
        taus=out.taus,
        max_residual=out.maxres.max(axis=2),
        grid=(nbi, nbj),
        flops={"gemm": int(out.counters[:, 0].sum()), "checksum": int(out.counters[:, 1].sum()),
               "encode": int(out.counters[:, 2].sum())},
    )
    fired = np.zeros(len(out.plan.order), np.int64)
    fired[out.plan.order] = out.plan.fired[: len(out.plan.order)]
    rep.fired = fired
    for blk, e, g in zip(*np.nonzero(status)):
        bidx = (int(blk) // nbj, int(blk) % nbj)
        st = Status(int(status[blk, e, g]))
        if st is Status.CORRECTED:
            rep.corrections.append(Correction(bidx, int(out.crow[blk, e, g]), int(out.ccol[blk, e, g]),
                                              float(out.cdelta[blk, e, g]), int(e)))
        rep.mismatch_detail.append(Mismatch(bidx, int(e), int(g), st, int(out.nbr[blk, e, g]),
                                            int(out.nbc[blk, e, g]), float(out.maxres[blk, e, g]),
                                            float(out.taus[blk, e])))
    return rep


def _prepare(A, B, C, p, cfg):
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    C = _inout(C)
    check_gemm_shapes(A, B, C)
    cfg = cfg or AbftConfig()
    cfg.check(p)
    return A, B, C, cfg


def abft_gemm_online(A, B, C, p: KernelParams, cfg: AbftConfig | None = None, plan=None, *,
                     specialized: bool | None = None):
    """``C += A @ B`` with checksum verification and single-error correction.

    Returns ``(C, report)``. An unrecoverable epoch does not stop the run;
    it shows up as ``report.status == Status.UNRECOVERABLE``.
    """
    A, B, C, cfg = _prepare(A, B, C, p, cfg)
    out = run(A, B, C, p, cfg.mode, interval=cfg.interval, scale=cfg.threshold_scale, wide=cfg.wide,
              plan=plan, specialized=specialized)
    return C, _report_from_run(out, p)


@dataclass
class OfflineResult:
    executions: np.ndarray  # [block, epoch] epoch executions counted
    detections: int

    @property
    def recompute_count(self) -> int:
        return int(self.executions.sum() - self.executions.size)


def abft_gemm_offline(A, B, C, p: KernelParams, cfg: AbftConfig | None = None, plan=None, *,
                      gamma0: float = 0.0, seed: int = 0, delta_range=(10.0, 1000.0),
                      specialized: bool | None = None, detail: bool = False):
    """Detect-only ABFT: an epoch whose check fails is recomputed from its start.

    Restart accounting follows a branching process: an execution that
    detects an error is replaced by two fresh executions of the same epoch,
    and only executions that finish clean are counted. A single detection
    therefore costs one extra execution, and with per-execution error
    probability ``g`` the expected count is ``(1 - g) / (1 - 2 g)``.

    ``plan`` entries fire once (a recomputation is clean unless something new
    hits it). ``gamma0`` additionally injects one random error into each epoch
    execution with that probability. Returns ``(C, recompute_count)``, or
    ``(C, OfflineResult)`` when ``detail`` is set.
    """
    from .faults import draw_delta

    A, B, C, cfg = _prepare(A, B, C, p, cfg)
    if not 0.0 <= gamma0 < 1.0:
        raise InvalidArguments(f"gamma0 must be in [0, 1), got {gamma0}")
    M, Kdim = A.shape
    N = B.shape[1]
    mode = cfg.mode
    nbi, nbj = block_grid(M, N, p)
    nep = cdiv(Kdim, cfg.interval)
    pl = plan_arrays(plan, M, N, Kdim, p)
    ws = make_workspace(p, mode, cfg.wide, 1, max(pl.max_per_block, 1))
    w = {name: arr[0] for name, arr in vars(ws).items()}
    runner = K.get_epoch_runner(tiles_for(p, specialized), mode)
    tiles = p.astuple()
    zero = np.float64(0.0) if cfg.wide else np.float32(0.0)
    rng = np.random.default_rng(seed)
    nreg = n_regions(p, mode)
    outs = _outs(nreg)
    counters = np.zeros(K.N_COUNTERS, np.int64)
    bufs = (w["pa"], w["pb"], w["enca"], w["encb"])
    hooks = (w["hk"], w["hr"], w["hc"], w["hd"], w["hidx"])
    state = (w["cs_col"], w["cs_row"], w["snap_col"], w["snap_row"], w["rowsum"], w["colsum"])
    acc, mu = w["acc"], w["mu"]
    plan_t = (pl.k, pl.row, pl.col, pl.delta, pl.fired)
    # one-entry plan reused for probabilistic injections
    x_k, x_r, x_c = np.zeros(1, np.int64), np.zeros(1, np.int64), np.zeros(1, np.int64)
    x_d, x_f = np.zeros(1, np.float32), np.zeros(1, np.int64)
    x_plan = (x_k, x_r, x_c, x_d, x_f)
    executions = np.zeros((nbi * nbj, nep), np.int64)
    detections = 0

    for blk in range(nbi * nbj):
        bi, bj = divmod(blk, nbj)
        i0, j0 = bi * p.m_tb, bj * p.n_tb
        rows, cols = min(p.m_tb, M - i0), min(p.n_tb, N - j0)
        acc[:] = 0.0
        mu[:] = 0.0
        for arr in state[:4]:
            arr[:] = 0.0
        lo, hi = int(pl.start[blk]), int(pl.start[blk + 1])
        for e in range(nep):
            kb = e * cfg.interval
            ke = min(Kdim, kb + cfg.interval)
            saved = (acc.copy(), state[2].copy(), state[3].copy(), mu[1])
            done = None
            pending, leaves, streak = 1, 0, 0
            while pending:
                pending -= 1
                acc[:] = saved[0]
                state[2][:] = saved[1]
                state[3][:] = saved[2]
                state[0][:] = 0.0
                state[1][:] = 0.0
                mu[0], mu[1] = 0.0, saved[3]
                if gamma0 > 0.0 and rng.random() < gamma0:
                    # this execution takes a random strike instead of the plan's entries
                    x_k[0] = rng.integers(kb, ke)
                    x_r[0] = rng.integers(0, rows)
                    x_c[0] = rng.integers(0, cols)
                    x_d[0] = draw_delta(rng, cfg, p, delta_range, kb, ke)
                    x_f[0] = 0
                    args = (0, 1, x_plan)
                else:
                    args = (lo, hi, plan_t)
                st, _ = runner(A, B, i0, j0, kb, ke, tiles, float(cfg.threshold_scale), cfg.wide,
                               acc, bufs, state, mu, *args, hooks, outs, counters, zero)
                if st == K.ST_CLEAN:
                    leaves += 1
                    streak = 0
                    if done is None:
                        done = (acc.copy(), state[2].copy(), state[3].copy(), mu[1])
                else:
                    detections += 1
                    streak += 1
                    if streak > MAX_CONSECUTIVE_FAILURES:
                        raise NonTermination(
                            f"block {(bi, bj)} epoch {e}: {streak} consecutive failed executions")
                    pending += 2
            executions[blk, e] = leaves
            acc[:] = done[0]
            state[2][:] = done[1]
            state[3][:] = done[2]
            state[0][:] = 0.0
            state[1][:] = 0.0
            mu[0], mu[1] = 0.0, done[3]
        C[i0:i0 + rows, j0:j0 + cols] += acc[:rows, :cols]

    res = OfflineResult(executions, detections)
    return C, (res if detail else res.recompute_count)
