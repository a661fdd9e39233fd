"""
Serialization of simulation and analysis output: density CSVs, summary and
fit/collapse JSON documents, and the run manifest.

Everything except the manifest's wall-clock field is a deterministic function
of its inputs; JSON keys are written in a fixed order.
"""

import sys
import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from config_parser import emit_config, format_alpha_mode, parse_config
from ensemble import EnsembleResult, SnapshotScalars
from errors import ContractViolation, OutputError
from fitting import CollapseResult, FitFailure, FitResult
from model_config import ModelConfig
from stats import DensityEstimate, density_bin_centers

logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"
SCHEMA_VERSION = 1
DENSITY_COLUMNS = ("bin_center", "density")

FitOutcome = Union[FitResult, FitFailure]


def _ensure_parent(path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)


def emit_density_csv(d: DensityEstimate, path: Union[str, Path]) -> None:
    target = Path(path)
    frame = pd.DataFrame({
        DENSITY_COLUMNS[0]: density_bin_centers(d),
        DENSITY_COLUMNS[1]: d.densities,
    })
    try:
        _ensure_parent(target)
        frame.to_csv(target, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        raise OutputError(str(target), e) from e
    logger.info("Wrote density (%d bins) to %s", d.bins, target)


def read_density_csv(path: Union[str, Path]) -> DensityEstimate:
    """
    Inverse of emit_density_csv. Densities come back bit-exact; lo, hi and the
    bin width are rebuilt from the centers and sample_count is unknown (0).
    """
    frame = pd.read_csv(path, float_precision="round_trip")
    if tuple(frame.columns) != DENSITY_COLUMNS:
        raise ContractViolation(f"{path}: expected columns {','.join(DENSITY_COLUMNS)}, got {','.join(frame.columns)}")
    if len(frame) < 2:
        raise ContractViolation(f"{path}: need at least two bins to recover the bin width")

    centers = frame[DENSITY_COLUMNS[0]].to_numpy(dtype=np.float64)
    width = (centers[-1] - centers[0]) / (len(centers) - 1)
    if not width > 0.0:
        raise ContractViolation(f"{path}: bin centers must be ascending")
    return DensityEstimate(
        lo=float(centers[0] - width / 2.0),
        hi=float(centers[-1] + width / 2.0),
        densities=frame[DENSITY_COLUMNS[1]].to_numpy(dtype=np.float64),
        sample_count=0,
    )


def _clean(value: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to null."""
    if isinstance(value, dict):
        return {str(k): _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_clean(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        return number if math.isfinite(number) else None
    return value


def render_json(document: Mapping[str, Any]) -> str:
    return json.dumps(_clean(document), indent=2, allow_nan=False) + "\n"


def write_json(document: Mapping[str, Any], path: Optional[Union[str, Path]]) -> None:
    """Write to path, or to stdout when path is None."""
    text = render_json(document)
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    try:
        _ensure_parent(target)
        with open(target, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
    except OSError as e:
        raise OutputError(str(target), e) from e
    logger.info("Wrote %s", target)


def config_to_dict(config: ModelConfig) -> Dict[str, Any]:
    return {
        "variant": config.variant.value,
        "duration": config.duration,
        "seed": config.seed,
        "n0": config.n0,
        "tau": config.tau,
        "schedule_unit": config.schedule_unit.value,
        "alpha_mode": format_alpha_mode(config.alpha_mode),
        "split_fraction": config.split_fraction,
        "bins": config.bins,
        "ensembles": config.ensembles,
        "snapshot_times": list(config.snapshot_times),
    }


def fit_to_dict(outcome: FitOutcome) -> Dict[str, Any]:
    if isinstance(outcome, FitFailure):
        return {"family": outcome.family.value, "error": outcome.code, "message": outcome.message}
    entry: Dict[str, Any] = {"family": outcome.family.value}
    if outcome.method is not None:
        entry["method"] = outcome.method
    entry["params"] = dict(outcome.params)
    if "tail_exponent" in outcome.params:
        entry["pareto_index"] = outcome.pareto_index
    entry["window"] = list(outcome.window)
    entry["chi2_per_dof"] = outcome.chi2_per_dof
    entry["r_squared"] = outcome.r_squared
    entry["points_used"] = outcome.points_used
    if outcome.degenerate:
        entry["degenerate"] = True
    return entry


def scalars_to_dict(scalars: SnapshotScalars) -> Dict[str, Any]:
    return {
        "mean_agent_count": scalars.agent_count,
        "mean_total_wealth": scalars.total_wealth,
        "mean_max_share": scalars.max_share,
        "mean_wealth": scalars.mean_wealth,
        "mean_gini": scalars.gini,
    }


def collapse_to_dict(collapse: CollapseResult, include_curves: bool = True) -> Dict[str, Any]:
    entry: Dict[str, Any] = {
        "scaling_exponent": collapse.scaling_exponent,
        "inverted": collapse.inverted,
        "quality": collapse.quality,
    }
    if collapse.profile:
        entry["profile"] = [{"alpha": a, "quality": q} for a, q in sorted(collapse.profile.items())]
    if include_curves:
        entry["curves"] = [
            {"time": c.time, "scaled_x": c.scaled_x, "scaled_y": c.scaled_y} for c in collapse.curves
        ]
    return entry


def build_summary(result: EnsembleResult, fits: Mapping[int, Sequence[FitOutcome]],
                  collapse: Optional[Sequence[CollapseResult]] = None) -> Dict[str, Any]:
    snapshots: List[Dict[str, Any]] = []
    for t in result.config.snapshot_times:
        snapshots.append({
            "time": t,
            "fits": [fit_to_dict(f) for f in fits.get(t, ())],
            "scalars": scalars_to_dict(result.per_time_scalars[t]),
        })
    document: Dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
        "config": config_to_dict(result.config),
        "runs": result.runs,
        "snapshots": snapshots,
    }
    if collapse:
        document["collapse"] = [collapse_to_dict(c, include_curves=False) for c in collapse]
    return document


def emit_summary_json(result: EnsembleResult, fits: Mapping[int, Sequence[FitOutcome]],
                      path: Union[str, Path], collapse: Optional[Sequence[CollapseResult]] = None) -> None:
    write_json(build_summary(result, fits, collapse), path)


@dataclass
class RunManifest:
    config: ModelConfig
    wall_clock_seconds: float
    outputs: Dict[int, str] = field(default_factory=dict)
    summary: Optional[str] = None
    tool_version: str = TOOL_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "config": config_to_dict(self.config),
            "config_text": emit_config(self.config),
            "wall_clock_seconds": round(self.wall_clock_seconds, 3),
            "outputs": [{"time": t, "path": p} for t, p in sorted(self.outputs.items())],
            "summary": self.summary,
        }

    @classmethod
    def from_dict(cls, document: Mapping[str, Any]) -> "RunManifest":
        return cls(
            config=parse_config(document["config_text"]),
            wall_clock_seconds=float(document["wall_clock_seconds"]),
            outputs={int(o["time"]): str(o["path"]) for o in document.get("outputs", [])},
            summary=document.get("summary"),
            tool_version=str(document["tool_version"]),
        )


def emit_manifest(manifest: RunManifest, path: Union[str, Path]) -> None:
    write_json(manifest.to_dict(), path)


def read_manifest(path: Union[str, Path]) -> RunManifest:
    with open(path, "r", encoding="utf-8") as f:
        return RunManifest.from_dict(json.load(f))
