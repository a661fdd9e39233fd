"""
Ready-made run configurations for the five composite models at two scales.

FULL mirrors the published protocol; DESK uses run lengths and ensemble
sizes that finish in minutes on a workstation and are what the
reproduction checks are calibrated against.
"""

from enum import Enum
from typing import Dict, Tuple

from model_config import ModelConfig, ModelVariant, ScheduleUnit

DEFAULT_SEED = 20_160_927

TABLE_VARIANTS: Tuple[ModelVariant, ...] = (
    ModelVariant.MODEL_A,
    ModelVariant.MODEL_B,
    ModelVariant.MODEL_C1,
    ModelVariant.MODEL_C2,
    ModelVariant.MODEL_C3,
)


class Scale(Enum):
    DESK = "desk"
    FULL = "paper"


# (duration, snapshot_times, ensembles) per variant and scale
_PROTOCOLS: Dict[Scale, Dict[ModelVariant, Tuple[int, Tuple[int, ...], int]]] = {
    Scale.DESK: {
        ModelVariant.MODEL_A: (10_000, (5_000, 10_000), 20),
        ModelVariant.MODEL_B: (1_000_000, (10_000, 100_000, 1_000_000), 200),
        ModelVariant.MODEL_C1: (10_000, (5_000, 10_000), 20),
        ModelVariant.MODEL_C2: (10_000, (5_000, 10_000), 20),
        ModelVariant.MODEL_C3: (1_000_000, (1_000_000,), 20),
    },
    Scale.FULL: {
        ModelVariant.MODEL_A: (100_000, (10_000, 100_000), 100),
        ModelVariant.MODEL_B: (1_000_000, (10_000, 100_000, 1_000_000), 3000),
        ModelVariant.MODEL_C1: (100_000, (10_000, 100_000), 100),
        ModelVariant.MODEL_C2: (100_000, (10_000, 100_000), 100),
        ModelVariant.MODEL_C3: (1_000_000, (1_000_000,), 100),
    },
}


def preset_config(variant: ModelVariant, scale: Scale, seed: int = DEFAULT_SEED) -> ModelConfig:
    if variant not in _PROTOCOLS[scale]:
        raise ValueError(f"no {scale.value} preset for {variant.value}")
    duration, snapshot_times, ensembles = _PROTOCOLS[scale][variant]
    unit = ScheduleUnit.TRANSACTION if variant in (ModelVariant.MODEL_B, ModelVariant.MODEL_C3) else ScheduleUnit.SWEEP
    return ModelConfig(
        variant=variant,
        duration=duration,
        seed=seed,
        schedule_unit=unit,
        ensembles=ensembles,
        snapshot_times=snapshot_times,
    )


def preset_configs(scale: Scale, seed: int = DEFAULT_SEED) -> Dict[ModelVariant, ModelConfig]:
    return {variant: preset_config(variant, scale, seed) for variant in TABLE_VARIANTS}
