"""Workspace allocation and driver dispatch shared by the public entry points."""
from __future__ import annotations

from dataclasses import dataclass, fields

import numba
import numpy as np

from . import _kernels as K
from .errors import InvalidArguments

CATALOG_TILES = {
    (16, 16, 16, 8, 16, 2, 2),
    (32, 32, 8, 16, 32, 4, 4),
    (64, 64, 8, 32, 64, 8, 8),
    (32, 128, 8, 16, 64, 4, 8),
    (128, 128, 8, 32, 64, 8, 8),
}


def cdiv(a: int, b: int) -> int:
    return -(-a // b)


def block_grid(M: int, N: int, p) -> tuple[int, int]:
    return cdiv(M, p.m_tb), cdiv(N, p.n_tb)


@dataclass
class PlanArrays:
    start: np.ndarray  # CSR offsets per linear block index
    k: np.ndarray
    row: np.ndarray
    col: np.ndarray
    delta: np.ndarray
    fired: np.ndarray
    order: np.ndarray  # plan entry index for each array slot

    @property
    def max_per_block(self) -> int:
        return int(np.max(np.diff(self.start))) if len(self.start) > 1 else 0


def plan_arrays(plan, M: int, N: int, K: int, p) -> PlanArrays:
    """Flatten a fault plan into per-block CSR arrays for the kernels."""
    entries = list(plan.entries) if plan is not None else []
    nbi, nbj = block_grid(M, N, p)
    nblk = nbi * nbj
    keyed = []
    for idx, e in enumerate(entries):
        bi, bj = e.block
        r, c = e.target
        if not (0 <= bi < nbi and 0 <= bj < nbj):
            raise InvalidArguments(f"fault entry {idx}: block {e.block} outside the {nbi}x{nbj} grid")
        if not (0 <= r < min(p.m_tb, M - bi * p.m_tb) and 0 <= c < min(p.n_tb, N - bj * p.n_tb)):
            raise InvalidArguments(f"fault entry {idx}: target {e.target} outside block {e.block}")
        if not 0 <= e.k_step < K:
            raise InvalidArguments(f"fault entry {idx}: k_step {e.k_step} outside [0, {K})")
        keyed.append((bi * nbj + bj, e.epoch, e.k_step, idx))
    keyed.sort()
    counts = np.zeros(nblk + 1, np.int64)
    for blk, *_ in keyed:
        counts[blk + 1] += 1
    start = np.cumsum(counts)
    n = len(keyed)
    k = np.empty(n, np.int64)
    row = np.empty(n, np.int64)
    col = np.empty(n, np.int64)
    delta = np.empty(n, np.float32)
    order = np.empty(n, np.int64)
    for slot, (_, _, _, idx) in enumerate(keyed):
        e = entries[idx]
        k[slot] = e.k_step
        row[slot], col[slot] = e.target
        delta[slot] = e.delta
        order[slot] = idx
    return PlanArrays(start, k, row, col, delta, np.zeros(max(n, 1), np.int64), order)


def tiles_for(p, specialized):
    t = p.astuple()
    if specialized is None:
        specialized = t in CATALOG_TILES
    return t if specialized else None


@dataclass
class Workspace:
    acc: np.ndarray
    pa: np.ndarray
    pb: np.ndarray
    enca: np.ndarray
    encb: np.ndarray
    cs_col: np.ndarray
    cs_row: np.ndarray
    snap_col: np.ndarray
    snap_row: np.ndarray
    rowsum: np.ndarray
    colsum: np.ndarray
    mu: np.ndarray
    hk: np.ndarray
    hr: np.ndarray
    hc: np.ndarray
    hd: np.ndarray
    hidx: np.ndarray

    def astuple(self) -> tuple:
        return tuple(getattr(self, f.name) for f in fields(self))


def make_workspace(p, mode: int, wide: bool, nworkers: int, hook_cap: int) -> Workspace:
    """Per-worker scratch: accumulators, double staging buffers, checksum state."""
    ct = np.float64 if wide else np.float32
    if mode == K.MODE_PLAIN:
        nr = nq = 1
        cm, cn = 1, 1
    else:
        reg_m, reg_n = {
            K.MODE_MICRO: (p.m_t, p.n_t),
            K.MODE_PANEL: (p.m_w, p.n_w),
            K.MODE_BLOCK: (p.m_tb, p.n_tb),
        }[mode]
        nr, nq = p.m_tb // reg_m, p.n_tb // reg_n
        cm, cn = p.m_tb, p.n_tb
    w = nworkers
    cap = max(hook_cap, 1)
    return Workspace(
        acc=np.zeros((w, p.m_tb, p.n_tb), np.float32),
        pa=np.zeros((w, 2, p.m_tb * p.k_tb), np.float32),
        pb=np.zeros((w, 2, p.k_tb * p.n_tb), np.float32),
        enca=np.zeros((w, 2, nr, p.k_tb), ct),
        encb=np.zeros((w, 2, nq, p.k_tb), ct),
        cs_col=np.zeros((w, nr, cn), ct),
        cs_row=np.zeros((w, nq, cm), ct),
        snap_col=np.zeros((w, nr, cn)),
        snap_row=np.zeros((w, nq, cm)),
        rowsum=np.zeros((w, nq, cm)),
        colsum=np.zeros((w, nr, cn)),
        mu=np.zeros((w, 2)),
        hk=np.zeros((w, cap), np.int64),
        hr=np.zeros((w, cap), np.int64),
        hc=np.zeros((w, cap), np.int64),
        hd=np.zeros((w, cap), np.float32),
        hidx=np.zeros((w, cap), np.int64),
    )


@dataclass
class RunOutput:
    status: np.ndarray  # [block, epoch, region]
    crow: np.ndarray
    ccol: np.ndarray
    cdelta: np.ndarray
    nbr: np.ndarray
    nbc: np.ndarray
    maxres: np.ndarray
    taus: np.ndarray  # [block, epoch]
    counters: np.ndarray  # [block, 3]
    plan: PlanArrays
    grid: tuple[int, int]
    n_epochs: int


def n_regions(p, mode: int) -> int:
    if mode == K.MODE_MICRO:
        return (p.m_tb // p.m_t) * (p.n_tb // p.n_t)
    if mode == K.MODE_PANEL:
        return (p.m_tb // p.m_w) * (p.n_tb // p.n_w)
    return 1


def run(A, B, C, p, mode, *, interval=None, scale=8.0, wide=False, plan=None, specialized=None) -> RunOutput:
    M, Kdim = A.shape
    N = B.shape[1]
    nbi, nbj = block_grid(M, N, p)
    nblk = nbi * nbj
    if mode == K.MODE_PLAIN or interval is None:
        interval = cdiv(Kdim, p.k_tb) * p.k_tb
    nep = cdiv(Kdim, interval)
    pl = plan_arrays(plan, M, N, Kdim, p)
    nworkers = numba.config.NUMBA_NUM_THREADS
    ws = make_workspace(p, mode, wide, nworkers, pl.max_per_block)
    if mode == K.MODE_PLAIN:
        shape3 = (1, 1, 1)
        shape2 = (1, 1)
    else:
        shape3 = (nblk, nep, n_regions(p, mode))
        shape2 = (nblk, nep)
    status = np.zeros(shape3, np.int8)
    crow = np.full(shape3, -1, np.int64)
    ccol = np.full(shape3, -1, np.int64)
    cdelta = np.zeros(shape3)
    nbr = np.zeros(shape3, np.int64)
    nbc = np.zeros(shape3, np.int64)
    maxres = np.zeros(shape3)
    taus = np.zeros(shape2)
    counters = np.zeros((nblk, K.N_COUNTERS), np.int64)
    zero = np.float64(0.0) if wide else np.float32(0.0)
    drv = K.get_driver(tiles_for(p, specialized), mode)
    drv(A, B, C, p.astuple(), interval, float(scale), bool(wide), ws.astuple(),
        (pl.start, pl.k, pl.row, pl.col, pl.delta, pl.fired),
        (status, crow, ccol, cdelta, nbr, nbc, maxres, taus, counters), zero)
    return RunOutput(status, crow, ccol, cdelta, nbr, nbc, maxres, taus, counters, pl, (nbi, nbj), nep)
