"""
Validation runs of the pure exchange models and the wealth bookkeeping of
the composite models. Each check owns its run size; `scale` shrinks the
run for quick smoke runs but the thresholds stay the same.
"""

import time
import logging
from typing import *

import numpy as np

from baseline_check import BaselineCheck
from core_exchange import AlphaMode
from model_config import ModelConfig, ModelVariant, ScheduleUnit
from models import run_model
from stats import ks_distance_exponential, max_share

logger = logging.getLogger(__name__)


def _scaled(value: int, scale: float) -> int:
    return max(1, int(round(value * scale)))


class CondensationCheck(BaselineCheck):
    """Pure yard-sale exchange condenses: the richest agent ends up with nearly everything"""

    def __init__(self, n0: int = 100, sweeps: int = 100_000, scale: float = 1.0) -> None:
        super().__init__()
        self.name = "pure_ys_condensation"
        self.threshold = 0.99
        self.n0 = n0
        self.sweeps = _scaled(sweeps, scale)

    def measure(self, seed: int) -> float:
        start_time = time.time()
        config = ModelConfig(variant=ModelVariant.PURE_YS, duration=self.sweeps, seed=seed, n0=self.n0,
                             alpha_mode=AlphaMode.fixed(0.5), bins=100)
        snapshot = run_model(config, np.random.default_rng(seed))[-1]
        value = max_share(snapshot)
        self._latency = int((time.time() - start_time) * 1000)
        return value

    def passes(self, value: float) -> bool:
        return value > self.threshold


class ExponentialEquilibriumCheck(BaselineCheck):
    """Pure theft-fraud exchange relaxes to the exponential (Boltzmann-Gibbs) law"""

    def __init__(self, n0: int = 1000, sweeps: int = 100_000, scale: float = 1.0) -> None:
        super().__init__()
        self.name = "pure_tf_exponential"
        self.threshold = 0.02
        self.n0 = n0
        self.sweeps = _scaled(sweeps, scale)

    def measure(self, seed: int) -> float:
        start_time = time.time()
        config = ModelConfig(variant=ModelVariant.PURE_TF, duration=self.sweeps, seed=seed, n0=self.n0, bins=100)
        snapshot = run_model(config, np.random.default_rng(seed))[-1]
        value = ks_distance_exponential(snapshot.normalized_wealths)
        self._latency = int((time.time() - start_time) * 1000)
        return value

    def passes(self, value: float) -> bool:
        return value < self.threshold


class LedgerConservationCheck(BaselineCheck):
    """
    Recomputed total wealth against initial + injected wealth from the event
    ledger; returns the relative drift.
    """

    def __init__(self, variant: ModelVariant, duration: int, unit: ScheduleUnit, scale: float = 1.0) -> None:
        super().__init__()
        self.name = f"{variant.value}_wealth_ledger"
        self.threshold = 1e-9
        self.variant = variant
        self.unit = unit
        self.duration = _scaled(duration, scale)

    def measure(self, seed: int) -> float:
        start_time = time.time()
        config = ModelConfig(variant=self.variant, duration=self.duration, seed=seed,
                             schedule_unit=self.unit, bins=100)
        snapshot = run_model(config, np.random.default_rng(seed))[-1]
        expected = snapshot.ledger.expected_total
        value = abs(snapshot.total_wealth - expected) / expected
        self._latency = int((time.time() - start_time) * 1000)
        return value

    def passes(self, value: float) -> bool:
        return value <= self.threshold


def default_checks(scale: float = 1.0) -> List[BaselineCheck]:
    return [
        CondensationCheck(scale=scale),
        ExponentialEquilibriumCheck(scale=scale),
        LedgerConservationCheck(ModelVariant.MODEL_A, 2_000, ScheduleUnit.SWEEP, scale=scale),
        LedgerConservationCheck(ModelVariant.MODEL_B, 1_000_000, ScheduleUnit.TRANSACTION, scale=scale),
    ]
