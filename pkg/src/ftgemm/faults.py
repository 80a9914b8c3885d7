"""Seeded fault plans: which accumulator gets hit, when, and by how much.

A plan lists offsets to add to block accumulators right after a given global
k-step. The kernels fire each entry once. Plans round-trip through a small
text format, one entry per line::

    block_i block_j epoch k_step row col delta
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._engine import block_grid, cdiv
from .abft import AbftConfig, threshold_for
from .blocked import KernelParams, require_valid
from .errors import FormatError, InvalidArguments, SEUViolation

DETECT_MARGIN = 8.0


@dataclass(frozen=True, order=True)
class FaultEntry:
    block: tuple[int, int]
    epoch: int
    k_step: int  # global k index
    target: tuple[int, int]  # (row, col) inside the block
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "block", tuple(int(v) for v in self.block))
        object.__setattr__(self, "target", tuple(int(v) for v in self.target))
        object.__setattr__(self, "delta", float(np.float32(self.delta)))


@dataclass(frozen=True)
class FaultPlan:
    seed: int
    entries: tuple[FaultEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=_sort_key)))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def for_block(self, bi: int, bj: int) -> list[FaultEntry]:
        return [e for e in self.entries if e.block == (bi, bj)]

    def to_text(self) -> str:
        lines = [f"# seed {self.seed}"]
        for e in self.entries:
            lines.append(f"{e.block[0]} {e.block[1]} {e.epoch} {e.k_step} {e.target[0]} {e.target[1]} {e.delta!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "FaultPlan":
        seed = 0
        entries = []
        for n, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "seed":
                    seed = int(parts[1])
                continue
            parts = line.split()
            if len(parts) != 7:
                raise FormatError(f"line {n}: expected 7 fields, got {len(parts)}")
            try:
                bi, bj, ep, k, r, c = (int(v) for v in parts[:6])
                delta = float(parts[6])
            except ValueError as exc:
                raise FormatError(f"line {n}: {exc}") from None
            entries.append(FaultEntry((bi, bj), ep, k, (r, c), delta))
        return cls(seed, tuple(entries))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "FaultPlan":
        return cls.from_text(Path(path).read_text())


def _sort_key(e: FaultEntry):
    return (e.block, e.epoch, e.k_step)


def threshold_estimate(p: KernelParams, cfg: AbftConfig, k_end: int, epoch_len: int | None = None,
                       value_bound: float = 1.0) -> float:
    """Threshold the engine will use at the end of an epoch finishing at ``k_end``,
    assuming every operand entry is bounded by ``value_bound`` in magnitude."""
    epoch_len = cfg.interval if epoch_len is None else epoch_len
    per_slab = float(value_bound) ** 2
    mag_epoch = cdiv(epoch_len, p.k_tb) * per_slab
    mag_total = cdiv(k_end, p.k_tb) * per_slab
    return threshold_for(cfg, p, epoch_len, mag_epoch, mag_total)


def draw_delta(rng, cfg: AbftConfig, p: KernelParams, delta_range, kb: int, ke: int,
               value_bound: float = 1.0) -> float:
    """Random-sign offset with magnitude uniform in ``[max(lo, 8 tau), hi]``."""
    lo, hi = float(delta_range[0]), float(delta_range[1])
    floor = DETECT_MARGIN * threshold_estimate(p, cfg, ke, ke - kb, value_bound)
    lo = max(lo, floor)
    if lo > hi:
        raise InvalidArguments(
            f"delta range upper bound {hi} is below the detectability floor {floor:.4g}")
    mag = rng.uniform(lo, hi)
    sign = 1.0 if rng.random() < 0.5 else -1.0
    return float(np.float32(sign * mag))


def make_fault_plan(seed: int, M: int, N: int, K: int, p: KernelParams, cfg: AbftConfig | None = None,
                    errors_per_epoch: int = 1, delta_range=(10.0, 1000.0), *,
                    allow_seu_violation: bool = False, value_bound: float = 1.0) -> FaultPlan:
    """Inject ``errors_per_epoch`` offsets into every (block, epoch).

    Each offset hits a uniformly random element of the block (inside the
    matrix) after a uniformly random k-step of the epoch. Magnitudes stay
    at least 8x the estimated threshold for operands bounded by
    ``value_bound``. More than one per epoch breaks the single-upset
    assumption and needs ``allow_seu_violation``.
    """
    cfg = cfg or AbftConfig()
    require_valid(p)
    cfg.check(p)
    if min(M, N, K) < 1:
        raise InvalidArguments(f"M, N, K must be >= 1, got {M}, {N}, {K}")
    if errors_per_epoch < 0:
        raise InvalidArguments(f"errors_per_epoch must be >= 0, got {errors_per_epoch}")
    if errors_per_epoch > 1 and not allow_seu_violation:
        raise SEUViolation(f"{errors_per_epoch} errors per epoch violates the single-upset assumption")
    if not 0 <= delta_range[0] <= delta_range[1]:
        raise InvalidArguments(f"bad delta range {tuple(delta_range)}")
    rng = np.random.default_rng(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    nbi, nbj = block_grid(M, N, p)
    nep = cdiv(K, cfg.interval)
    entries = []
    for bi in range(nbi):
        rows = min(p.m_tb, M - bi * p.m_tb)
        for bj in range(nbj):
            cols = min(p.n_tb, N - bj * p.n_tb)
            for e in range(nep):
                kb = e * cfg.interval
                ke = min(K, kb + cfg.interval)
                for _ in range(errors_per_epoch):
                    k = int(rng.integers(kb, ke))
                    r = int(rng.integers(0, rows))
                    c = int(rng.integers(0, cols))
                    d = draw_delta(rng, cfg, p, delta_range, kb, ke, value_bound)
                    entries.append(FaultEntry((bi, bj), e, k, (r, c), d))
    return FaultPlan(int(seed), tuple(entries))
