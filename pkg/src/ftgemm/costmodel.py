"""Expected executions of online vs offline ABFT under random soft errors.

Online correction never repeats work, so one run always suffices. Offline
detection restarts on every error; modelled as a branching process in which
a failed execution is replaced by two fresh ones, the expected number of
clean executions is ``(1 - g) / (1 - 2 g)``, finite only for ``g < 1/2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._engine import block_grid
from .blocked import KernelParams
from .errors import GammaTooLarge, InvalidArguments


def overall_gamma(gamma0: float, blocks: int) -> float:
    if not 0.0 <= gamma0 < 1.0:
        raise InvalidArguments(f"gamma0 must be in [0, 1), got {gamma0}")
    if blocks < 1:
        raise InvalidArguments(f"blocks must be >= 1, got {blocks}")
    return -float(np.expm1(blocks * np.log1p(-gamma0)))


def offline_expected_runs(gamma: float) -> float:
    if not 0.0 <= gamma < 1.0:
        raise InvalidArguments(f"gamma must be in [0, 1), got {gamma}")
    if gamma >= 0.5:
        raise GammaTooLarge(f"gamma = {gamma:.6g} >= 1/2: offline restarts never settle")
    return (1.0 - gamma) / (1.0 - 2.0 * gamma)


@dataclass(frozen=True)
class CostModelResult:
    gamma0: float
    blocks: int
    gamma: float
    online_expected_runs: float
    offline_expected_runs: float


def cost_model(gamma0: float, M: int, N: int, p: KernelParams) -> CostModelResult:
    nbi, nbj = block_grid(M, N, p)
    blocks = nbi * nbj
    g = overall_gamma(gamma0, blocks)
    return CostModelResult(gamma0, blocks, g, 1.0, offline_expected_runs(g))


def simulate_offline(gamma: float, trials: int, seed: int = 0, max_nodes: int = 10_000_000) -> np.ndarray:
    """Executions counted per trial of the branching restart process.

    Each execution fails with probability ``gamma``; a failure spawns two
    executions, a success is one counted execution.
    """
    if not 0.0 <= gamma < 1.0:
        raise InvalidArguments(f"gamma must be in [0, 1), got {gamma}")
    if trials < 1:
        raise InvalidArguments(f"trials must be >= 1, got {trials}")
    rng = np.random.default_rng(seed)
    counts = np.zeros(trials, np.int64)
    for t in range(trials):
        pending, leaves, nodes = 1, 0, 0
        while pending:
            # settle the whole pending generation at once
            fails = int(rng.binomial(pending, gamma))
            nodes += pending
            leaves += pending - fails
            pending = 2 * fails
            if nodes > max_nodes:
                raise InvalidArguments(f"trial {t} exceeded {max_nodes} executions; gamma too close to 1/2")
        counts[t] = leaves
    return counts


@dataclass(frozen=True)
class MonteCarloResult:
    gamma: float
    trials: int
    empirical_mean: float
    closed_form: float

    @property
    def rel_error(self) -> float:
        return abs(self.empirical_mean - self.closed_form) / self.closed_form


def monte_carlo(gamma: float, trials: int, seed: int = 0) -> MonteCarloResult:
    counts = simulate_offline(gamma, trials, seed)
    return MonteCarloResult(gamma, trials, float(counts.mean()), offline_expected_runs(gamma))
