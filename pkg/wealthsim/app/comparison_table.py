"""
Power-law versus lognormal comparison across the composite models.
"""

import logging
from typing import Dict, List, Mapping, Optional, Tuple

import pandas as pd

from ensemble import EnsembleResult
from fitting import FitFailure, FitFamily, LognormalMethod, fit_families
from model_config import ModelVariant

logger = logging.getLogger(__name__)

TABLE_COLUMNS = [
    "model", "time", "family", "tail_exponent", "pareto_index", "mu", "sigma",
    "chi2_per_dof", "r_squared", "window_lo", "window_hi", "points_used", "error",
]


def comparison_rows(variant: ModelVariant, result: EnsembleResult,
                    window: Optional[Tuple[float, float]] = None) -> List[Dict[str, object]]:
    """One row per fit family at the last snapshot time of the ensemble."""
    time = result.config.snapshot_times[-1]
    rows: List[Dict[str, object]] = []
    for outcome in fit_families(result.per_time[time], window, LognormalMethod.MOMENTS):
        row: Dict[str, object] = {column: None for column in TABLE_COLUMNS}
        row.update(model=variant.value, time=time, family=outcome.family.value)
        if isinstance(outcome, FitFailure):
            row["error"] = outcome.code
        else:
            if outcome.family is FitFamily.POWER_LAW:
                row["tail_exponent"] = outcome.tail_exponent
                row["pareto_index"] = outcome.pareto_index
            else:
                row["mu"] = outcome.params["mu"]
                row["sigma"] = outcome.params["sigma"]
            row.update(
                chi2_per_dof=outcome.chi2_per_dof,
                r_squared=outcome.r_squared,
                window_lo=outcome.window[0],
                window_hi=outcome.window[1],
                points_used=outcome.points_used,
            )
        rows.append(row)
    return rows


def build_comparison_table(results: Mapping[ModelVariant, EnsembleResult],
                           window: Optional[Tuple[float, float]] = None) -> pd.DataFrame:
    rows: List[Dict[str, object]] = []
    for variant, result in results.items():
        rows.extend(comparison_rows(variant, result, window))
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def power_law_preferred(table: pd.DataFrame) -> Dict[str, bool]:
    """
    Per model: True when the power law has both the higher R^2 and the lower
    chi^2/DoF. Models with a failed fit are reported False.
    """
    verdicts: Dict[str, bool] = {}
    for model, rows in table.groupby("model", sort=False):
        by_family = rows.set_index("family")
        try:
            power = by_family.loc[FitFamily.POWER_LAW.value]
            lognormal = by_family.loc[FitFamily.LOGNORMAL.value]
        except KeyError:
            verdicts[str(model)] = False
            continue
        if pd.notna(power["error"]) or pd.notna(lognormal["error"]):
            verdicts[str(model)] = False
            continue
        verdicts[str(model)] = bool(
            power["r_squared"] > lognormal["r_squared"] and power["chi2_per_dof"] < lognormal["chi2_per_dof"]
        )
        logger.info("%s: power law preferred = %s", model, verdicts[str(model)])
    return verdicts
