"""
Runs many independent simulations of one ModelConfig and merges their
snapshots. Run i always gets the generator seeded by derive_run_seed(seed, i)
and results are folded in run-index order, so the outcome does not depend on
how many worker threads executed the runs.
"""

import os
import math
import time
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from errors import ContractViolation, EnsembleRunError
from model_config import ModelConfig, Snapshot
from models import run_model
from stats import DensityAccumulator, DensityEstimate, estimate_density, gini, max_share

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1
_GOLDEN_GAMMA = 0x9E3779B97F4A7C15

# runs in flight per worker before results are folded
_RUNS_PER_WORKER_IN_FLIGHT = 4


def derive_run_seed(master_seed: int, run_index: int) -> int:
    """
    SplitMix64 output for state master_seed + (run_index + 1) * golden gamma.
    The state step is odd and the finalizer is a bijection, so seeds are
    distinct for every run_index below 2^64.
    """
    if run_index < 0:
        raise ContractViolation(f"run_index must be non-negative, got {run_index}")
    z = (int(master_seed) + _GOLDEN_GAMMA * (int(run_index) + 1)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def default_thread_count() -> int:
    configured = os.environ.get("WEALTHSIM_THREADS", "").strip()
    if configured:
        try:
            value = int(configured)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning("Ignoring invalid WEALTHSIM_THREADS=%r", configured)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class SnapshotScalars:
    """Per-time diagnostics averaged over the ensemble"""
    agent_count: float
    total_wealth: float
    max_share: float
    mean_wealth: float
    gini: float


@dataclass(frozen=True)
class _RunScalars:
    agent_count: int
    total_wealth: float
    max_share: float
    mean_wealth: float
    gini: float


@dataclass(frozen=True)
class _RunOutcome:
    densities: Dict[int, DensityEstimate]
    scalars: Dict[int, _RunScalars]


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    config: ModelConfig
    per_time: Dict[int, DensityEstimate]
    per_time_scalars: Dict[int, SnapshotScalars]
    runs: int


def _summarize(snapshot: Snapshot) -> _RunScalars:
    return _RunScalars(
        agent_count=snapshot.agent_count,
        total_wealth=snapshot.total_wealth,
        max_share=max_share(snapshot),
        mean_wealth=snapshot.total_wealth / snapshot.agent_count,
        gini=gini(snapshot.normalized_wealths),
    )


def _run_one(config: ModelConfig, run_index: int) -> _RunOutcome:
    rng = np.random.default_rng(derive_run_seed(config.seed, run_index))
    snapshots = run_model(config, rng)
    return _RunOutcome(
        densities={s.time: estimate_density(s.normalized_wealths, config.bins, 0.0, 1.0) for s in snapshots},
        scalars={s.time: _summarize(s) for s in snapshots},
    )


def _mean(values: List[float]) -> float:
    return math.fsum(values) / len(values)


class _EnsembleFold:
    """Ordered reduction of run outcomes"""

    def __init__(self, times: tuple) -> None:
        self.accumulators = {t: DensityAccumulator() for t in times}
        self.scalars: Dict[int, List[_RunScalars]] = {t: [] for t in times}

    def add(self, outcome: _RunOutcome) -> None:
        for t, accumulator in self.accumulators.items():
            accumulator.add(outcome.densities[t])
            self.scalars[t].append(outcome.scalars[t])

    def result(self, config: ModelConfig, runs: int) -> EnsembleResult:
        per_time_scalars = {}
        for t, rows in self.scalars.items():
            per_time_scalars[t] = SnapshotScalars(
                agent_count=_mean([float(r.agent_count) for r in rows]),
                total_wealth=_mean([r.total_wealth for r in rows]),
                max_share=_mean([r.max_share for r in rows]),
                mean_wealth=_mean([r.mean_wealth for r in rows]),
                gini=_mean([r.gini for r in rows]),
            )
        return EnsembleResult(
            config=config,
            per_time={t: acc.result() for t, acc in self.accumulators.items()},
            per_time_scalars=per_time_scalars,
            runs=runs,
        )


def run_ensemble(config: ModelConfig, threads: Optional[int] = None) -> EnsembleResult:
    """
    Execute config.ensembles runs on a thread pool. A failing run raises
    EnsembleRunError naming the lowest failing run index.
    """
    workers = threads if threads is not None else default_thread_count()
    if workers < 1:
        raise ContractViolation(f"threads must be positive, got {workers}")
    workers = min(workers, config.ensembles)

    start_time = time.time()
    logger.info("run_ensemble: %s, %d runs on %d threads, seed=%d",
                config.variant.value, config.ensembles, workers, config.seed)

    fold = _EnsembleFold(config.snapshot_times)
    chunk = max(1, workers * _RUNS_PER_WORKER_IN_FLIGHT)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        for first in range(0, config.ensembles, chunk):
            indexes = range(first, min(first + chunk, config.ensembles))
            future_to_index = {executor.submit(_run_one, config, i): i for i in indexes}

            outcomes: Dict[int, _RunOutcome] = {}
            failures: Dict[int, BaseException] = {}
            for future in as_completed(future_to_index):
                index = future_to_index[future]
                try:
                    outcomes[index] = future.result()
                except Exception as e:
                    failures[index] = e

            if failures:
                index = min(failures)
                logger.error("run_ensemble: run %d failed: %s", index, failures[index])
                raise EnsembleRunError(index, failures[index]) from failures[index]

            for index in indexes:
                fold.add(outcomes[index])
            logger.debug("run_ensemble: folded runs %d..%d", indexes[0], indexes[-1])

    result = fold.result(config, config.ensembles)
    logger.info("run_ensemble: %s finished in %.1fs", config.variant.value, time.time() - start_time)
    return result
