"""
Model schedulers: yard-sale/theft-fraud transactions composed with agent
injection and wealth fragmentation, one function per event type plus the
run loop that strings them together for each model variant.
"""

import logging
from typing import List, Optional

import numpy as np

import kernels
from core_exchange import AgentPool, AlphaMode
from errors import ContractViolation
from model_config import EventLedger, ModelConfig, ModelVariant, ScheduleUnit, Snapshot

logger = logging.getLogger(__name__)

# Upper bound on agents one event boundary can add, per variant
_NEW_AGENTS_PER_EVENT = {
    ModelVariant.PURE_YS: 0,
    ModelVariant.PURE_TF: 0,
    ModelVariant.MODEL_A: 1,
    ModelVariant.MODEL_B: 1,
    ModelVariant.MODEL_C1: 2,
    ModelVariant.MODEL_C2: 2,
    ModelVariant.MODEL_C3: 2,
}

_EVENTS_EVERY_TAU = (ModelVariant.MODEL_B, ModelVariant.MODEL_C3)


def inject_agent(pool: AgentPool, rng: np.random.Generator, alpha_mode: Optional[AlphaMode] = None) -> float:
    """Append an agent with wealth drawn from U[0,1); returns that wealth."""
    pool.ensure_capacity(1)
    ledger = np.zeros(kernels.LEDGER_SIZE, dtype=np.float64)
    mode_code = alpha_mode.code if alpha_mode is not None else kernels.ALPHA_FIXED
    pool.size = int(kernels.inject(pool.wealth_buffer, pool.alpha_buffer, pool.size, mode_code, rng, ledger))
    wealth = float(ledger[kernels.LEDGER_INJECTED_WEALTH])
    pool.cached_total += wealth
    return wealth


def attempt_fragmentation(pool: AgentPool, split_fraction: float, rng: np.random.Generator,
                          alpha_mode: Optional[AlphaMode] = None) -> bool:
    """
    Pick an agent uniformly and, with probability min(1, x_k), split it into
    split_fraction * x_k (kept) and a new agent holding the rest.
    """
    if pool.size < 1:
        raise ContractViolation("cannot fragment an empty pool")
    if not 0.0 < split_fraction < 1.0:
        raise ContractViolation(f"split_fraction must lie in (0, 1), got {split_fraction}")

    pool.ensure_capacity(1)
    ledger = np.zeros(kernels.LEDGER_SIZE, dtype=np.float64)
    ledger[kernels.LEDGER_INITIAL_WEALTH] = pool.cached_total
    mode_code = alpha_mode.code if alpha_mode is not None else kernels.ALPHA_FIXED
    new_size, accepted = kernels.fragment(pool.wealth_buffer, pool.alpha_buffer, pool.size,
                                          float(split_fraction), mode_code, rng, ledger)
    pool.size = int(new_size)
    return bool(accepted)


def mean_wealth(pool: AgentPool) -> float:
    if pool.size < 1:
        raise ContractViolation("mean wealth of an empty pool is undefined")
    return pool.cached_total / pool.size


def _event_boundaries(config: ModelConfig, start: int, stop: int) -> int:
    if config.variant in _EVENTS_EVERY_TAU:
        return stop // config.tau - start // config.tau
    return stop - start


def _take_snapshot(pool: AgentPool, time: int, ledger: np.ndarray) -> Snapshot:
    total = pool.recompute_total()
    if total <= 0.0:
        raise ContractViolation(f"pool holds no wealth at t={time}; normalized wealth undefined")
    return Snapshot(
        time=time,
        agent_count=pool.size,
        total_wealth=total,
        normalized_wealths=pool.wealths / total,
        ledger=EventLedger.from_array(ledger),
    )


def run_model(config: ModelConfig, rng: np.random.Generator) -> List[Snapshot]:
    """
    Execute config.duration schedule units of the configured variant and
    return a snapshot at every requested time, in ascending order.
    """
    pool = AgentPool.from_uniform(config.n0, rng, config.alpha_mode)
    ledger = np.zeros(kernels.LEDGER_SIZE, dtype=np.float64)
    ledger[kernels.LEDGER_INITIAL_WEALTH] = pool.cached_total

    per_sweep = config.schedule_unit is ScheduleUnit.SWEEP
    snapshot_times = set(config.snapshot_times)
    stops = list(config.snapshot_times)
    if stops[-1] < config.duration:
        stops.append(config.duration)

    snapshots: List[Snapshot] = []
    elapsed = 0
    for stop in stops:
        pool.ensure_capacity(_NEW_AGENTS_PER_EVENT[config.variant] * _event_boundaries(config, elapsed, stop))
        pool.size = int(kernels.advance(
            pool.wealth_buffer, pool.alpha_buffer, pool.size, elapsed, stop,
            config.variant.code, per_sweep, config.tau,
            config.kernel.code, config.alpha_mode.code, float(config.alpha_mode.value),
            float(config.split_fraction), rng, ledger,
        ))
        pool.cached_total = ledger[kernels.LEDGER_INITIAL_WEALTH] + ledger[kernels.LEDGER_INJECTED_WEALTH]
        logger.debug("run_model: %s reached t=%d with %d agents", config.variant.value, stop, pool.size)
        elapsed = stop
        if stop in snapshot_times:
            snapshots.append(_take_snapshot(pool, stop, ledger))

    return snapshots
