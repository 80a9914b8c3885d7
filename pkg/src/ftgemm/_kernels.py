"""Numba kernels shared by the plain and fault-tolerant GEMM paths.

Everything here works on raw arrays. Tile extents arrive either as runtime
integers (generic kernels) or as closure constants (catalog kernels, see
:func:`get_driver`); the loop bodies are the same ``inline='always'``
functions in both cases, so accumulation order and therefore the output bits
never depend on which one ran.

Packed layouts (one k-slab of ``k_tb`` columns of A / rows of B):

* A buffer: ``[m_tb // m_t][k_tb][m_t]``; micro-tile row strip ``s`` holds
  ``A[i0 + s*m_t + r, k0 + k]`` at ``s*k_tb*m_t + k*m_t + r``.
* B buffer: ``[n_tb // n_t][k_tb][n_t]``; ``B[k0 + k, j0 + s*n_t + c]`` at
  ``s*k_tb*n_t + k*n_t + c``.

Out-of-range entries are 0.0.
"""
from __future__ import annotations

import math
import os

import numba
import numpy as np
from numba import get_thread_id, njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    try:
        from numba.np.ufunc import omppool  # noqa: F401

        numba.config.THREADING_LAYER = "omp"
    except ImportError:
        numba.config.THREADING_LAYER = "workqueue"

MODE_PLAIN = 0
MODE_MICRO = 1
MODE_PANEL = 2
MODE_BLOCK = 3

ST_CLEAN = 0
ST_CORRECTED = 1
ST_UNRECOVERABLE = 2
ST_DETECTED = 3

# counters: [gemm flops, checksum-update flops, encoding adds]
N_COUNTERS = 3

EPS32 = float(np.finfo(np.float32).eps)


@njit(inline="always")
def _cdiv(a, b):
    return (a + b - 1) // b


@njit(inline="always")
def region_extent(mode, m_tb, n_tb, m_w, n_w, m_t, n_t):
    if mode == MODE_MICRO:
        return m_t, n_t
    if mode == MODE_PANEL:
        return m_w, n_w
    return m_tb, n_tb


@njit(cache=True)
def threshold(scale, k_covered, ext, k_tb, mag_epoch, mag_total, wide):
    """Detection threshold for one region check.

    ``mag_epoch`` / ``mag_total`` are sums over k-slabs of
    ``max|A_slab| * max|B_slab|`` for the current epoch / since block start,
    so ``k_tb * mag`` bounds an accumulated dot product. Two rounding sources
    are covered, each as a random-walk estimate ``eps * sqrt(#ops) * size``:
    the float32 checksum accumulators (magnitude ``ext * k_tb * mag_epoch``,
    skipped when checksums are kept in float64) and the float32 rounding of
    the ``ext`` accumulators being summed (magnitude ``k_tb * mag_total``).
    """
    if k_covered <= 0:
        return 0.0
    steps = math.sqrt(ext + k_covered)
    acc_term = math.sqrt(ext) * mag_total
    cs_term = 0.0 if wide else ext * mag_epoch
    return scale * EPS32 * k_tb * steps * (cs_term + acc_term)


@njit(cache=True)
def pack_a(A, i0, k0, m_tb, k_tb, m_t, buf, enc, reg_m, encode):
    """Stage ``A[i0:i0+m_tb, k0:k0+k_tb]``; optionally fuse the column sums
    ``enc[R, k] = sum of rows of region strip R``. Returns ``max |value|``."""
    M, K = A.shape
    amax = np.float32(0.0)
    if encode:
        for R in range(enc.shape[0]):
            for k in range(k_tb):
                enc[R, k] = 0.0
    for s in range(m_tb // m_t):
        base = s * k_tb * m_t
        for r in range(m_t):
            i = i0 + s * m_t + r
            row_ok = i < M
            R = (s * m_t + r) // reg_m
            for k in range(k_tb):
                kk = k0 + k
                v = np.float32(0.0)
                if row_ok and kk < K:
                    v = A[i, kk]
                buf[base + k * m_t + r] = v
                av = abs(v)
                if av > amax:
                    amax = av
                if encode:
                    enc[R, k] += v
    return amax


@njit(cache=True)
def pack_b(B, k0, j0, n_tb, k_tb, n_t, buf, enc, reg_n, encode):
    """Stage ``B[k0:k0+k_tb, j0:j0+n_tb]``; optionally fuse the row sums
    ``enc[Q, k] = sum over the columns of region strip Q``."""
    K, N = B.shape
    bmax = np.float32(0.0)
    if encode:
        for Q in range(enc.shape[0]):
            for k in range(k_tb):
                enc[Q, k] = 0.0
    for k in range(k_tb):
        kk = k0 + k
        k_ok = kk < K
        for s in range(n_tb // n_t):
            base = s * k_tb * n_t + k * n_t
            for c in range(n_t):
                j = j0 + s * n_t + c
                v = np.float32(0.0)
                if k_ok and j < N:
                    v = B[kk, j]
                buf[base + c] = v
                av = abs(v)
                if av > bmax:
                    bmax = av
                if encode:
                    enc[(s * n_t + c) // reg_n, k] += v
    return bmax


@njit(cache=True)
def update_region_checksums(pa, pb, enca, encb, cs_col, cs_row,
                            m_tb, n_tb, k_tb, m_t, n_t, reg_m, reg_n, zero):
    """``cs_col[R, j] += sum_k enca[R, k] * B[k, j]`` and
    ``cs_row[Q, i] += sum_k A[i, k] * encb[Q, k]`` for one staged slab."""
    for R in range(m_tb // reg_m):
        for j in range(n_tb):
            off = (j // n_t) * k_tb * n_t + (j % n_t)
            s = zero
            for k in range(k_tb):
                s += (zero + enca[R, k]) * pb[off + k * n_t]
            cs_col[R, j] += s
    for Q in range(n_tb // reg_n):
        for i in range(m_tb):
            off = (i // m_t) * k_tb * m_t + (i % m_t)
            s = zero
            for k in range(k_tb):
                s += (zero + pa[off + k * m_t]) * encb[Q, k]
            cs_row[Q, i] += s


@njit(inline="always")
def _fire_hooks(acc, k, r0, c0, m_t, n_t, hooks, nh, fired):
    hk, hr, hc, hd, hidx = hooks
    for h in range(nh):
        if hk[h] == k:
            r = hr[h]
            c = hc[h]
            if r >= r0 and r < r0 + m_t and c >= c0 and c < c0 + n_t:
                acc[r, c] += hd[h]
                fired[hidx[h]] += 1


@njit(inline="always")
def micro_kernel(pa, a_off, pb, b_off, acc, r0, c0, k_tb, m_t, n_t, k0, hooks, nh, fired):
    """``acc[r0:r0+m_t, c0:c0+n_t] += A_frag @ B_frag``, one k-step at a time,
    then any armed injections for that k-step."""
    for k in range(k_tb):
        ao = a_off + k * m_t
        bo = b_off + k * n_t
        for r in range(m_t):
            a = pa[ao + r]
            for c in range(n_t):
                acc[r0 + r, c0 + c] += a * pb[bo + c]
        if nh > 0:
            _fire_hooks(acc, k0 + k, r0, c0, m_t, n_t, hooks, nh, fired)


@njit(inline="always")
def micro_kernel_ft(pa, a_off, pb, b_off, acc, r0, c0, k_tb, m_t, n_t, k0, hooks, nh, fired,
                    cs_col, cs_row, zero):
    """Same main update as :func:`micro_kernel` plus per-micro-tile checksums:
    ``cs_col[c] += (e^T a_k) b_k[c]`` and ``cs_row[r] += a_k[r] (b_k e)``."""
    for k in range(k_tb):
        ao = a_off + k * m_t
        bo = b_off + k * n_t
        asum = zero
        for r in range(m_t):
            asum += pa[ao + r]
        bsum = zero
        for c in range(n_t):
            bsum += pb[bo + c]
        for r in range(m_t):
            a = pa[ao + r]
            for c in range(n_t):
                acc[r0 + r, c0 + c] += a * pb[bo + c]
        for c in range(n_t):
            cs_col[c0 + c] += asum * pb[bo + c]
        for r in range(m_t):
            cs_row[r0 + r] += pa[ao + r] * bsum
        if nh > 0:
            _fire_hooks(acc, k0 + k, r0, c0, m_t, n_t, hooks, nh, fired)


@njit(inline="always")
def run_epoch(A, B, i0, j0, kb, ke, tiles, mode, acc, bufs, cs_col, cs_row, mu,
              plan_lo, plan_hi, plan, hooks, counters, zero):
    """Accumulate k-range ``[kb, ke)`` of one output block into ``acc``.

    Two staging buffers alternate: slab ``t+1`` is packed (and, for Panel /
    Block granularity, encoded and folded into the checksums) before slab
    ``t`` is consumed by the micro-kernels.
    """
    m_tb, n_tb, k_tb, m_w, n_w, m_t, n_t = tiles
    pa, pb, enca, encb = bufs
    plan_k, plan_row, plan_col, plan_delta, fired = plan
    hk, hr, hc, hd, hidx = hooks
    reg_m, reg_n = region_extent(mode, m_tb, n_tb, m_w, n_w, m_t, n_t)
    encode = mode == MODE_PANEL or mode == MODE_BLOCK
    nslab = _cdiv(ke - kb, k_tb)
    n_micro = (m_tb // m_t) * (n_tb // n_t)

    amax = pack_a(A, i0, kb, m_tb, k_tb, m_t, pa[0], enca[0], reg_m, encode)
    bmax = pack_b(B, kb, j0, n_tb, k_tb, n_t, pb[0], encb[0], reg_n, encode)
    if encode:
        update_region_checksums(pa[0], pb[0], enca[0], encb[0], cs_col, cs_row,
                                m_tb, n_tb, k_tb, m_t, n_t, reg_m, reg_n, zero)
    for t in range(nslab):
        cur = t & 1
        k0 = kb + t * k_tb
        mu_cur = np.float64(amax) * np.float64(bmax)
        if t + 1 < nslab:
            nxt = 1 - cur
            amax = pack_a(A, i0, k0 + k_tb, m_tb, k_tb, m_t, pa[nxt], enca[nxt], reg_m, encode)
            bmax = pack_b(B, k0 + k_tb, j0, n_tb, k_tb, n_t, pb[nxt], encb[nxt], reg_n, encode)
            if encode:
                update_region_checksums(pa[nxt], pb[nxt], enca[nxt], encb[nxt], cs_col, cs_row,
                                        m_tb, n_tb, k_tb, m_t, n_t, reg_m, reg_n, zero)
        mu[0] += mu_cur
        mu[1] += mu_cur

        nh = 0
        for h in range(plan_lo, plan_hi):
            kh = plan_k[h]
            if fired[h] == 0 and kh >= k0 and kh < k0 + k_tb:
                hk[nh] = kh
                hr[nh] = plan_row[h]
                hc[nh] = plan_col[h]
                hd[nh] = plan_delta[h]
                hidx[nh] = h
                nh += 1

        pa_c = pa[cur]
        pb_c = pb[cur]
        for pr in range(m_tb // m_w):
            for pc in range(n_tb // n_w):
                for mr in range(m_w // m_t):
                    r0 = pr * m_w + mr * m_t
                    a_off = (r0 // m_t) * k_tb * m_t
                    for mc in range(n_w // n_t):
                        c0 = pc * n_w + mc * n_t
                        b_off = (c0 // n_t) * k_tb * n_t
                        if mode == MODE_MICRO:
                            micro_kernel_ft(pa_c, a_off, pb_c, b_off, acc, r0, c0, k_tb, m_t, n_t, k0,
                                            hooks, nh, fired, cs_col[r0 // m_t], cs_row[c0 // n_t], zero)
                        else:
                            micro_kernel(pa_c, a_off, pb_c, b_off, acc, r0, c0, k_tb, m_t, n_t, k0,
                                         hooks, nh, fired)

        counters[0] += 2 * m_t * n_t * k_tb * n_micro
        if mode == MODE_MICRO:
            counters[1] += 2 * (m_t + n_t) * k_tb * n_micro
            counters[2] += (m_t + n_t) * k_tb * n_micro
        elif encode:
            counters[1] += 2 * k_tb * ((m_tb // reg_m) * n_tb + (n_tb // reg_n) * m_tb)
            counters[2] += k_tb * (m_tb + n_tb)


@njit(cache=True)
def region_sums(acc, rowsum, colsum, m_tb, n_tb, reg_m, reg_n):
    """Per-region row and column sums of ``acc`` in float64, ascending order."""
    for Q in range(rowsum.shape[0]):
        for i in range(m_tb):
            rowsum[Q, i] = 0.0
    for R in range(colsum.shape[0]):
        for j in range(n_tb):
            colsum[R, j] = 0.0
    for i in range(m_tb):
        R = i // reg_m
        for j in range(n_tb):
            v = np.float64(acc[i, j])
            rowsum[j // reg_n, i] += v
            colsum[R, j] += v


@njit(cache=True)
def verify_regions(acc, state, m_tb, n_tb, reg_m, reg_n, tau, correct, outs):
    """Check every region against its checksums; locate and undo single errors.

    Row residual ``r_i = rowsum - snapshot - checksum`` (same for columns).
    Exactly one bad row and one bad column with agreeing magnitudes is a
    single error at their crossing, corrected by subtracting ``r_i``.
    Anything else with a bad residual is unrecoverable. With
    ``correct=False`` a single error is only flagged (``ST_DETECTED``).

    Snapshots then advance to the current sums and the checksums reset,
    starting the next epoch; in detect-only mode this happens only when every
    region was clean, so the caller can restore and recompute. Returns the
    worst status over all regions.
    """
    cs_col, cs_row, snap_col, snap_row, rowsum, colsum = state
    status, crow, ccol, cdelta, nbr, nbc, maxres = outs
    region_sums(acc, rowsum, colsum, m_tb, n_tb, reg_m, reg_n)
    nQ = n_tb // reg_n
    worst = ST_CLEAN
    for R in range(m_tb // reg_m):
        for Q in range(nQ):
            g = R * nQ + Q
            mres = 0.0
            br = 0
            ib = -1
            rb = 0.0
            for i in range(R * reg_m, (R + 1) * reg_m):
                res = rowsum[Q, i] - snap_row[Q, i] - cs_row[Q, i]
                a = abs(res)
                if a > mres:
                    mres = a
                if a > tau:
                    br += 1
                    ib = i
                    rb = res
            bc = 0
            jb = -1
            cb = 0.0
            for j in range(Q * reg_n, (Q + 1) * reg_n):
                res = colsum[R, j] - snap_col[R, j] - cs_col[R, j]
                a = abs(res)
                if a > mres:
                    mres = a
                if a > tau:
                    bc += 1
                    jb = j
                    cb = res
            st = ST_CLEAN
            if br == 0 and bc == 0:
                st = ST_CLEAN
            elif br == 1 and bc == 1 and abs(rb - cb) <= 2.0 * tau:
                if correct:
                    old = acc[ib, jb]
                    new = np.float32(np.float64(old) - rb)
                    acc[ib, jb] = new
                    change = np.float64(new) - np.float64(old)
                    rowsum[Q, ib] += change
                    colsum[R, jb] += change
                    r2 = rowsum[Q, ib] - snap_row[Q, ib] - cs_row[Q, ib]
                    c2 = colsum[R, jb] - snap_col[R, jb] - cs_col[R, jb]
                    if abs(r2) <= tau and abs(c2) <= tau:
                        st = ST_CORRECTED
                    else:
                        st = ST_UNRECOVERABLE
                else:
                    st = ST_DETECTED
                crow[g] = ib
                ccol[g] = jb
                cdelta[g] = rb
            else:
                st = ST_UNRECOVERABLE
            status[g] = st
            nbr[g] = br
            nbc[g] = bc
            maxres[g] = mres
            if st == ST_UNRECOVERABLE or (st == ST_DETECTED and worst != ST_UNRECOVERABLE):
                worst = st
            elif st == ST_CORRECTED and worst == ST_CLEAN:
                worst = st

    # online runs resynchronise even after an unrecoverable epoch
    if correct or worst == ST_CLEAN:
        for Q in range(snap_row.shape[0]):
            for i in range(m_tb):
                snap_row[Q, i] = rowsum[Q, i]
                cs_row[Q, i] = 0.0
        for R in range(snap_col.shape[0]):
            for j in range(n_tb):
                snap_col[R, j] = colsum[R, j]
                cs_col[R, j] = 0.0
    return worst


@njit(inline="always")
def _drive(A, B, C, tiles, mode, interval, scale, wide, ws, plan, outs, zero):
    m_tb, n_tb, k_tb, m_w, n_w, m_t, n_t = tiles
    (ws_acc, ws_pa, ws_pb, ws_enca, ws_encb, ws_cscol, ws_csrow,
     ws_snapcol, ws_snaprow, ws_rowsum, ws_colsum, ws_mu,
     ws_hk, ws_hr, ws_hc, ws_hd, ws_hidx) = ws
    plan_start, plan_k, plan_row, plan_col, plan_delta, fired = plan
    status, crow, ccol, cdelta, nbr, nbc, maxres, taus, counters = outs
    M, K = A.shape
    N = B.shape[1]
    nbj = _cdiv(N, n_tb)
    nblk = _cdiv(M, m_tb) * nbj
    nep = _cdiv(K, interval)
    reg_m, reg_n = region_extent(mode, m_tb, n_tb, m_w, n_w, m_t, n_t)
    ext = max(reg_m, reg_n)
    for blk in prange(nblk):
        tid = get_thread_id()
        bi = blk // nbj
        bj = blk - bi * nbj
        i0 = bi * m_tb
        j0 = bj * n_tb
        acc = ws_acc[tid]
        for i in range(m_tb):
            for j in range(n_tb):
                acc[i, j] = 0.0
        mu = ws_mu[tid]
        mu[0] = 0.0
        mu[1] = 0.0
        cs_col = ws_cscol[tid]
        cs_row = ws_csrow[tid]
        snap_col = ws_snapcol[tid]
        snap_row = ws_snaprow[tid]
        if mode != MODE_PLAIN:
            cs_col[:, :] = 0.0
            cs_row[:, :] = 0.0
            snap_col[:, :] = 0.0
            snap_row[:, :] = 0.0
        bufs = (ws_pa[tid], ws_pb[tid], ws_enca[tid], ws_encb[tid])
        hooks = (ws_hk[tid], ws_hr[tid], ws_hc[tid], ws_hd[tid], ws_hidx[tid])
        state = (cs_col, cs_row, snap_col, snap_row, ws_rowsum[tid], ws_colsum[tid])
        for e in range(nep):
            kb = e * interval
            ke = min(K, kb + interval)
            run_epoch(A, B, i0, j0, kb, ke, tiles, mode, acc, bufs, cs_col, cs_row, mu,
                      plan_start[blk], plan_start[blk + 1], (plan_k, plan_row, plan_col, plan_delta, fired),
                      hooks, counters[blk], zero)
            if mode != MODE_PLAIN:
                tau = threshold(scale, ke - kb, ext, k_tb, mu[0], mu[1], wide)
                taus[blk, e] = tau
                verify_regions(acc, state, m_tb, n_tb, reg_m, reg_n, tau, True,
                               (status[blk, e], crow[blk, e], ccol[blk, e], cdelta[blk, e],
                                nbr[blk, e], nbc[blk, e], maxres[blk, e]))
                mu[0] = 0.0
        for i in range(min(m_tb, M - i0)):
            for j in range(min(n_tb, N - j0)):
                C[i0 + i, j0 + j] += acc[i, j]


def _make_driver(tiles, mode):
    if tiles is None:
        @njit(parallel=True, cache=True)
        def driver(A, B, C, tiles, interval, scale, wide, ws, plan, outs, zero):
            _drive(A, B, C, tiles, mode, interval, scale, wide, ws, plan, outs, zero)
        return driver

    TILES = tuple(int(v) for v in tiles)

    # the tiles argument keeps the call signature uniform and is ignored
    @njit(parallel=True, cache=True)
    def driver(A, B, C, tiles, interval, scale, wide, ws, plan, outs, zero):
        _drive(A, B, C, TILES, mode, interval, scale, wide, ws, plan, outs, zero)
    return driver


@njit(inline="always")
def _epoch_body(A, B, i0, j0, kb, ke, tiles, mode, scale, wide, acc, bufs, state, mu,
                plan_lo, plan_hi, plan, hooks, outs, counters, zero):
    m_tb, n_tb, k_tb, m_w, n_w, m_t, n_t = tiles
    run_epoch(A, B, i0, j0, kb, ke, tiles, mode, acc, bufs, state[0], state[1], mu,
              plan_lo, plan_hi, plan, hooks, counters, zero)
    reg_m, reg_n = region_extent(mode, m_tb, n_tb, m_w, n_w, m_t, n_t)
    tau = threshold(scale, ke - kb, max(reg_m, reg_n), k_tb, mu[0], mu[1], wide)
    st = verify_regions(acc, state, m_tb, n_tb, reg_m, reg_n, tau, False, outs)
    return st, tau


def _make_epoch_runner(tiles, mode):
    """Serial single-(block, epoch) detect-only runner for the offline loop."""
    if tiles is None:
        @njit(cache=True)
        def runner(A, B, i0, j0, kb, ke, tiles, scale, wide, acc, bufs, state, mu,
                   plan_lo, plan_hi, plan, hooks, outs, counters, zero):
            return _epoch_body(A, B, i0, j0, kb, ke, tiles, mode, scale, wide, acc, bufs, state, mu,
                               plan_lo, plan_hi, plan, hooks, outs, counters, zero)
        return runner

    TILES = tuple(int(v) for v in tiles)

    @njit(cache=True)
    def runner(A, B, i0, j0, kb, ke, tiles, scale, wide, acc, bufs, state, mu,
               plan_lo, plan_hi, plan, hooks, outs, counters, zero):
        return _epoch_body(A, B, i0, j0, kb, ke, TILES, mode, scale, wide, acc, bufs, state, mu,
                           plan_lo, plan_hi, plan, hooks, outs, counters, zero)
    return runner


_DRIVERS: dict = {}
_RUNNERS: dict = {}


def get_driver(tiles, mode):
    """Parallel whole-GEMM driver; ``tiles`` is a 7-tuple to specialize on, or None."""
    key = (tiles, mode)
    if key not in _DRIVERS:
        _DRIVERS[key] = _make_driver(tiles, mode)
    return _DRIVERS[key]


def get_epoch_runner(tiles, mode):
    key = (tiles, mode)
    if key not in _RUNNERS:
        _RUNNERS[key] = _make_epoch_runner(tiles, mode)
    return _RUNNERS[key]


# entry points for the element-level public API ------------------------------

@njit(cache=True)
def pack_a_entry(A, i0, k0, m_tb, k_tb, m_t, buf):
    enc = np.zeros((1, k_tb), np.float32)
    pack_a(A, i0, k0, m_tb, k_tb, m_t, buf, enc, m_tb, False)


@njit(cache=True)
def pack_b_entry(B, k0, j0, n_tb, k_tb, n_t, buf):
    enc = np.zeros((1, k_tb), np.float32)
    pack_b(B, k0, j0, n_tb, k_tb, n_t, buf, enc, n_tb, False)


@njit(cache=True)
def micro_kernel_entry(pa, pb, acc, k_tb, m_t, n_t, hk, hr, hc, hd):
    nh = hk.shape[0]
    hidx = np.arange(nh)
    fired = np.zeros(max(nh, 1), np.int64)
    micro_kernel(pa, 0, pb, 0, acc, 0, 0, k_tb, m_t, n_t, 0, (hk, hr, hc, hd, hidx), nh, fired)
    return fired


@njit(cache=True)
def encode_a_entry(buf, m_tb, k_tb, m_t, out):
    # same visiting order as the fused encode in pack_a
    for s in range(m_tb // m_t):
        base = s * k_tb * m_t
        for r in range(m_t):
            for k in range(k_tb):
                out[k] += buf[base + k * m_t + r]


@njit(cache=True)
def encode_b_entry(buf, n_tb, k_tb, n_t, out):
    for k in range(k_tb):
        for s in range(n_tb // n_t):
            base = s * k_tb * n_t + k * n_t
            for c in range(n_t):
                out[k] += buf[base + c]


@njit(cache=True)
def update_entry(pa, pb, enca, encb, cs_col, cs_row, m_tb, n_tb, k_tb, m_t, n_t, zero):
    update_region_checksums(pa, pb, enca, encb, cs_col, cs_row,
                            m_tb, n_tb, k_tb, m_t, n_t, m_tb, n_tb, zero)


@njit(cache=True)
def verify_entry(acc, cs_col, cs_row, snap_col, snap_row, tau, correct, outs):
    m, n = acc.shape
    rowsum = np.zeros((1, m))
    colsum = np.zeros((1, n))
    state = (cs_col, cs_row, snap_col, snap_row, rowsum, colsum)
    return verify_regions(acc, state, m, n, m, n, tau, correct, outs)


@njit(cache=True)
def threshold_entry(scale, k_covered, ext, k_tb, mag_epoch, mag_total, wide):
    return threshold(scale, k_covered, ext, k_tb, mag_epoch, mag_total, wide)
