"""
Dataclasses and enums describing a simulation run and what it produces
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Optional, Tuple

import numpy as np

import kernels
from core_exchange import AlphaMode, KernelKind
from errors import ConfigError

MIN_BINS = 100
MAX_SEED = 2 ** 64


class ModelVariant(Enum):
    PURE_YS = "PureYS"
    PURE_TF = "PureTF"
    MODEL_A = "ModelA"
    MODEL_B = "ModelB"
    MODEL_C1 = "ModelC1"
    MODEL_C2 = "ModelC2"
    MODEL_C3 = "ModelC3"

    @property
    def code(self) -> int:
        return _VARIANT_CODES[self]

    @property
    def kernel(self) -> KernelKind:
        return KernelKind.THEFT_FRAUD if self is ModelVariant.PURE_TF else KernelKind.YARD_SALE


class ScheduleUnit(Enum):
    SWEEP = "sweep"              # as many transactions as current agents
    TRANSACTION = "transaction"  # a single transaction

    @classmethod
    def _missing_(cls, value: object) -> Optional["ScheduleUnit"]:
        if isinstance(value, str):
            for member in cls:
                if member.value == value.lower():
                    return member
        return None


_VARIANT_CODES: Dict[ModelVariant, int] = {
    ModelVariant.PURE_YS: kernels.VARIANT_PURE_YS,
    ModelVariant.PURE_TF: kernels.VARIANT_PURE_TF,
    ModelVariant.MODEL_A: kernels.VARIANT_MODEL_A,
    ModelVariant.MODEL_B: kernels.VARIANT_MODEL_B,
    ModelVariant.MODEL_C1: kernels.VARIANT_MODEL_C1,
    ModelVariant.MODEL_C2: kernels.VARIANT_MODEL_C2,
    ModelVariant.MODEL_C3: kernels.VARIANT_MODEL_C3,
}

_BOTH_UNITS = frozenset({ScheduleUnit.SWEEP, ScheduleUnit.TRANSACTION})
_SWEEP_ONLY = frozenset({ScheduleUnit.SWEEP})

# A, C-I and C-II are defined per round of transactions, so only sweeps make sense there
_ALLOWED_UNITS: Dict[ModelVariant, FrozenSet[ScheduleUnit]] = {
    ModelVariant.PURE_YS: _BOTH_UNITS,
    ModelVariant.PURE_TF: _BOTH_UNITS,
    ModelVariant.MODEL_A: _SWEEP_ONLY,
    ModelVariant.MODEL_B: _BOTH_UNITS,
    ModelVariant.MODEL_C1: _SWEEP_ONLY,
    ModelVariant.MODEL_C2: _SWEEP_ONLY,
    ModelVariant.MODEL_C3: _BOTH_UNITS,
}


def default_schedule_unit(variant: ModelVariant) -> ScheduleUnit:
    if variant in (ModelVariant.MODEL_B, ModelVariant.MODEL_C3):
        return ScheduleUnit.TRANSACTION
    return ScheduleUnit.SWEEP


def allowed_schedule_units(variant: ModelVariant) -> FrozenSet[ScheduleUnit]:
    return _ALLOWED_UNITS[variant]


def default_bins(variant: ModelVariant) -> int:
    return 10_000 if variant is ModelVariant.MODEL_B else 100_000


@dataclass(frozen=True)
class ModelConfig:
    """
    Full description of a run or an ensemble of runs.
    schedule_unit, bins and snapshot_times get variant-dependent defaults when left as None.
    """
    variant: ModelVariant
    duration: int
    seed: int
    n0: int = 100
    tau: int = 10
    schedule_unit: Optional[ScheduleUnit] = None
    alpha_mode: AlphaMode = field(default_factory=AlphaMode.fixed)
    split_fraction: float = 0.5
    bins: Optional[int] = None
    ensembles: int = 1
    snapshot_times: Optional[Tuple[int, ...]] = None

    def __post_init__(self) -> None:
        if self.schedule_unit is None:
            object.__setattr__(self, "schedule_unit", default_schedule_unit(self.variant))
        if self.bins is None:
            object.__setattr__(self, "bins", default_bins(self.variant))
        if self.snapshot_times is None:
            object.__setattr__(self, "snapshot_times", (self.duration,))
        else:
            object.__setattr__(self, "snapshot_times", tuple(int(t) for t in self.snapshot_times))
        self._validate()

    def _validate(self) -> None:
        if self.n0 < 2:
            raise ConfigError("must be at least 2 so agents can trade", field="n0")
        if self.duration < 1:
            raise ConfigError("must be a positive integer", field="duration")
        if self.tau < 1:
            raise ConfigError("must be at least 1", field="tau")
        if not 0 <= self.seed < MAX_SEED:
            raise ConfigError("must be an unsigned 64-bit integer", field="seed")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError("must lie strictly between 0 and 1", field="split_fraction")
        if self.bins < MIN_BINS:
            raise ConfigError(f"must be at least {MIN_BINS}", field="bins")
        if self.ensembles < 1:
            raise ConfigError("must be a positive integer", field="ensembles")
        if self.schedule_unit not in allowed_schedule_units(self.variant):
            raise ConfigError(
                f"{self.variant.value} does not support {self.schedule_unit.value} units",
                field="schedule_unit",
            )

        times = self.snapshot_times
        if not times:
            raise ConfigError("must list at least one time", field="snapshot_times")
        if any(t < 1 for t in times):
            raise ConfigError("times must be positive", field="snapshot_times")
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError("times must be strictly ascending", field="snapshot_times")
        if times[-1] > self.duration:
            raise ConfigError("times must not exceed duration", field="snapshot_times")

    @property
    def kernel(self) -> KernelKind:
        return self.variant.kernel


@dataclass(frozen=True)
class EventLedger:
    """Cumulative event bookkeeping of one run up to a snapshot"""
    initial_wealth: float
    injections: int
    injected_wealth: float
    fragmentation_attempts: int
    fragmentations: int
    fragmented_wealth: float
    mean_wealth_at_fragmentation: float

    @classmethod
    def from_array(cls, ledger: np.ndarray) -> "EventLedger":
        return cls(
            initial_wealth=float(ledger[kernels.LEDGER_INITIAL_WEALTH]),
            injections=int(ledger[kernels.LEDGER_INJECTIONS]),
            injected_wealth=float(ledger[kernels.LEDGER_INJECTED_WEALTH]),
            fragmentation_attempts=int(ledger[kernels.LEDGER_FRAGMENTATION_ATTEMPTS]),
            fragmentations=int(ledger[kernels.LEDGER_FRAGMENTATIONS]),
            fragmented_wealth=float(ledger[kernels.LEDGER_FRAGMENTED_WEALTH]),
            mean_wealth_at_fragmentation=float(ledger[kernels.LEDGER_MEAN_AT_FRAGMENTATION]),
        )

    @property
    def expected_total(self) -> float:
        return self.initial_wealth + self.injected_wealth


@dataclass(frozen=True, eq=False)
class Snapshot:
    time: int
    agent_count: int
    total_wealth: float
    normalized_wealths: np.ndarray
    ledger: EventLedger
