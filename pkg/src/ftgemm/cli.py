"""``ftgemm`` command line: benchmarks, injection runs, cost model, catalog dump."""
from __future__ import annotations

import argparse
import csv
import statistics
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import numba
import numpy as np

from .abft import AbftConfig, Granularity, Status, abft_gemm_offline, abft_gemm_online
from .blocked import blocked_gemm
from .costmodel import cost_model, monte_carlo
from .errors import FtGemmError
from .faults import FaultPlan, make_fault_plan
from .matrix import Tolerance, naive_gemm, random_matrix, read_ftgm, write_ftgm
from .select import DEFAULT_CATALOG, ShapeClass, catalog_text, classify_shape, load_catalog

BENCH_HEADER = ["mode", "granularity", "M", "N", "K", "params", "reps", "median_s", "gflops",
                "overhead_pct", "errors_injected", "errors_corrected", "status"]
MODES = ("naive", "blocked", "abft-online", "abft-offline")
WARMUP = 2


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _size_list(text: str) -> list[int]:
    try:
        sizes = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from None
    if not sizes or min(sizes) < 1:
        raise argparse.ArgumentTypeError(f"sizes must be >= 1, got {text!r}")
    return sizes


def _mnk(text: str) -> tuple[int, int, int]:
    parts = text.split(":")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        dims = ()
    if len(dims) != 3 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"expected M:N:K with positive integers, got {text!r}")
    return dims


def _range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}") from None
    return lo, hi


def _shapes(args) -> list[tuple[int, int, int]]:
    shapes = [(s, s, s) for s in (args.sizes or [])] + list(args.mnk or [])
    if not shapes:
        raise UsageError("give at least one of --sizes or --mnk")
    return shapes


def _catalog(args):
    return load_catalog(args.config) if args.config else dict(DEFAULT_CATALOG)


def _row(args, catalog, M, N, K):
    cls = classify_shape(M, N, K) if args.params_row == "auto" else ShapeClass.parse(args.params_row)
    return cls, catalog[cls]


def _cfg(args, granularity: Granularity) -> AbftConfig:
    return AbftConfig(granularity, args.interval, args.threshold_scale, args.checksum_precision)


@contextmanager
def _out(path):
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _median_time(fn, reps: int, warmup: int = WARMUP) -> float:
    for _ in range(warmup):
        fn()
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _fmt(x, digits=6):
    return "" if x is None else f"{x:.{digits}g}"


def cmd_bench(args) -> int:
    if args.reps < 3:
        raise UsageError("--reps must be >= 3")
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    bad = [m for m in modes if m not in MODES]
    if bad or not modes:
        raise UsageError(f"unknown mode(s) {bad}; choose from {', '.join(MODES)}")
    # baselines first so dependent rows can quote an overhead
    modes = sorted(set(modes), key=MODES.index)
    grans = [Granularity.parse(g) for g in args.granularity.split(",")]
    catalog = _catalog(args)
    rows = []
    for M, N, K in _shapes(args):
        cls, p = _row(args, catalog, M, N, K)
        A = random_matrix(M, K, args.seed)
        B = random_matrix(K, N, args.seed + 1)
        base = None
        for mode in modes:
            for g in grans if mode.startswith("abft") else [None]:
                C = np.zeros((M, N), np.float32)
                status = "ok"
                if mode == "naive":
                    fn = lambda: naive_gemm(A, B, C)  # noqa: E731
                elif mode == "blocked":
                    fn = lambda: blocked_gemm(A, B, C, p)  # noqa: E731
                elif mode == "abft-online":
                    cfg = _cfg(args, g)
                    fn = lambda cfg=cfg: abft_gemm_online(A, B, C, p, cfg)  # noqa: E731
                else:
                    cfg = _cfg(args, g)
                    fn = lambda cfg=cfg: abft_gemm_offline(A, B, C, p, cfg)  # noqa: E731
                med = _median_time(fn, args.reps)
                if mode == "abft-online":
                    C[:] = 0.0
                    _, rep = abft_gemm_online(A, B, C, p, _cfg(args, g))
                    status = rep.status.name.capitalize()
                elif mode == "abft-offline":
                    C[:] = 0.0
                    _, n = abft_gemm_offline(A, B, C, p, _cfg(args, g))
                    status = "Clean" if n == 0 else f"Recomputed{n}"
                if mode == "blocked":
                    base = med
                overhead = 100.0 * (med / base - 1.0) if (base is not None and mode.startswith("abft")) else None
                rows.append([mode, g.value if g else "", M, N, K, cls.value, args.reps, _fmt(med),
                             _fmt(2.0 * M * N * K / med / 1e9), _fmt(overhead, 4), 0, 0, status])
    with _out(args.csv) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        w.writerows(rows)
    return 0


def cmd_inject(args) -> int:
    catalog = _catalog(args)
    ok = True
    rows = []
    plans = []
    for M, N, K in _shapes(args):
        cls, p = _row(args, catalog, M, N, K)
        A = read_ftgm(args.a) if args.a else random_matrix(M, K, args.seed)
        B = read_ftgm(args.b) if args.b else random_matrix(K, N, args.seed + 1)
        if A.shape != (M, K) or B.shape != (K, N):
            raise UsageError(f"input matrices {A.shape} x {B.shape} do not match {M}:{N}:{K}")
        for g in (Granularity.parse(s) for s in args.granularity.split(",")):
            cfg = _cfg(args, g)
            if args.plan_in:
                plan = FaultPlan.load(args.plan_in)
            else:
                plan = make_fault_plan(args.seed, M, N, K, p, cfg, args.errors_per_epoch, args.delta_range,
                                       allow_seu_violation=args.allow_seu_violation)
            plans.append(plan)
            ref = blocked_gemm(A, B, np.zeros((M, N), np.float32), p)
            tol = Tolerance(rel=1e-4, abs=1e-5)

            C = np.zeros((M, N), np.float32)
            t0 = time.perf_counter()
            C, rep = abft_gemm_online(A, B, C, p, cfg, plan)
            dt = time.perf_counter() - t0
            match = tol.holds(C, ref)
            good = match and rep.status is not Status.UNRECOVERABLE
            ok &= good
            status = rep.status.name.capitalize() + ("" if match else "+Mismatch")
            rows.append(["abft-online", g.value, M, N, K, cls.value, 1, _fmt(dt), _fmt(2.0 * M * N * K / dt / 1e9),
                         "", rep.errors_injected, rep.errors_corrected, status])
            if args.out:
                write_ftgm(args.out, C)

            if args.offline:
                C = np.zeros((M, N), np.float32)
                t0 = time.perf_counter()
                C, res = abft_gemm_offline(A, B, C, p, cfg, plan, detail=True)
                dt = time.perf_counter() - t0
                match = tol.holds(C, ref)
                ok &= match
                status = ("Clean" if res.recompute_count == 0 else f"Recomputed{res.recompute_count}") + \
                    ("" if match else "+Mismatch")
                rows.append(["abft-offline", g.value, M, N, K, cls.value, 1, _fmt(dt),
                             _fmt(2.0 * M * N * K / dt / 1e9), "", len(plan), res.detections, status])
    if args.plan_out:
        text = "".join(pl.to_text() for pl in plans[:1])
        Path(args.plan_out).write_text(text)
    with _out(args.csv) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BENCH_HEADER)
        w.writerows(rows)
    return 0 if ok else 1


def cmd_costmodel(args) -> int:
    catalog = _catalog(args)
    rows = []
    for M, N, K in _shapes(args):
        cls, p = _row(args, catalog, M, N, K)
        r = cost_model(args.gamma0, M, N, p)
        rows.append([r.gamma0, M, N, cls.value, r.blocks, f"{r.gamma:.12g}", r.online_expected_runs,
                     f"{r.offline_expected_runs:.12g}"])
    with _out(args.csv) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma0", "M", "N", "params", "blocks", "gamma", "online_expected_runs", "offline_expected_runs"])
        w.writerows(rows)
    return 0


def cmd_montecarlo(args) -> int:
    if args.trials < 100:
        raise UsageError("--trials must be >= 100")
    r = monte_carlo(args.gamma, args.trials, args.seed)
    tol = 0.05 if args.gamma <= 0.4 else 0.10
    passed = args.trials < 10_000 or r.rel_error <= tol
    with _out(args.csv) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "trials", "empirical_mean", "closed_form", "rel_error", "tolerance", "pass"])
        w.writerow([r.gamma, r.trials, f"{r.empirical_mean:.6g}", f"{r.closed_form:.6g}", f"{r.rel_error:.4g}",
                    tol, int(passed)])
    return 0 if passed else 1


def cmd_gen_config(args) -> int:
    text = catalog_text(_catalog(args))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=_positive, default=None,
                        help="worker threads for the kernels (default: all)")
    common.add_argument("--csv", metavar="PATH", help="write CSV here instead of stdout")
    common.add_argument("--params-row", default="auto",
                        choices=["small", "medium", "large", "tall", "huge", "auto"])
    common.add_argument("--config", metavar="PATH", help="catalog overrides (key = value)")

    shapes = argparse.ArgumentParser(add_help=False)
    shapes.add_argument("--sizes", type=_size_list, help="square sizes, e.g. 256,512,1024")
    shapes.add_argument("--mnk", type=_mnk, action="append", help="irregular shape M:N:K (repeatable)")

    ft = argparse.ArgumentParser(add_help=False)
    ft.add_argument("--granularity", default="block", help="block, panel, microtile (comma list allowed)")
    ft.add_argument("--interval", type=_positive, default=256)
    ft.add_argument("--threshold-scale", type=float, default=8.0)
    ft.add_argument("--checksum-precision", choices=["same32", "wide64"], default="same32")

    ap = argparse.ArgumentParser(prog="ftgemm", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", parents=[common, shapes, ft], help="time GEMM variants")
    b.add_argument("--modes", default="naive,blocked", help="comma list of " + ", ".join(MODES))
    b.add_argument("--reps", type=int, default=5)
    b.set_defaults(func=cmd_bench)

    i = sub.add_parser("inject", parents=[common, shapes, ft], help="run under a fault plan")
    i.add_argument("--errors-per-epoch", type=int, default=1)
    i.add_argument("--delta-range", type=_range, default=(10.0, 1000.0), metavar="LO:HI")
    i.add_argument("--allow-seu-violation", action="store_true")
    i.add_argument("--offline", action="store_true", help="also run detect-and-recompute")
    i.add_argument("--plan-out", metavar="PATH")
    i.add_argument("--plan-in", metavar="PATH")
    i.add_argument("--a", metavar="PATH", help="A in FTGM format")
    i.add_argument("--b", metavar="PATH", help="B in FTGM format")
    i.add_argument("--out", metavar="PATH", help="write the corrected C (FTGM)")
    i.set_defaults(func=cmd_inject)

    c = sub.add_parser("costmodel", parents=[common, shapes], help="online vs offline expected runs")
    c.add_argument("--gamma0", type=float, required=True)
    c.set_defaults(func=cmd_costmodel)

    m = sub.add_parser("montecarlo", parents=[common], help="simulate offline restarts")
    m.add_argument("--gamma", type=float, required=True)
    m.add_argument("--trials", type=int, default=10_000)
    m.set_defaults(func=cmd_montecarlo)

    g = sub.add_parser("gen-config", parents=[common], help="print the tiling catalog")
    g.add_argument("--out", metavar="PATH")
    g.set_defaults(func=cmd_gen_config)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads:
        numba.set_num_threads(min(args.threads, numba.config.NUMBA_NUM_THREADS))
    try:
        return args.func(args)
    except UsageError as exc:
        ap.print_usage(sys.stderr)
        print(f"ftgemm: error: {exc}", file=sys.stderr)
        return 2
    except (FtGemmError, OSError) as exc:
        print(f"ftgemm: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
