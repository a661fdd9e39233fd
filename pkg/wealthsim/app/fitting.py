"""
Tail fits (power law and lognormal), goodness-of-fit metrics and the
scaling collapse of time-ordered densities.

All fits are linear least squares on the log-log curve, so they reproduce
what one reads off the plotted distributions rather than a likelihood optimum.
"""

import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.stats as st

from errors import (
    CollapseUndefinedError, ContractViolation, FitInfeasibleError, MetricUndefinedError, WealthSimError,
)
from stats import DensityEstimate, density_bin_centers

logger = logging.getLogger(__name__)

MIN_FIT_POINTS = 5
COLLAPSE_GRID_POINTS = 200
_LN10 = math.log(10.0)


class FitFamily(Enum):
    POWER_LAW = "PowerLaw"
    LOGNORMAL = "Lognormal"


class LognormalMethod(Enum):
    REGRESSION = "regression"  # parabola in log-log over the window
    MOMENTS = "moments"        # log-moments of the whole density


@dataclass(frozen=True)
class FitResult:
    family: FitFamily
    params: Dict[str, float]
    window: Tuple[float, float]
    chi2_per_dof: float
    r_squared: float
    points_used: int
    method: Optional[str] = None
    degenerate: bool = False

    @property
    def tail_exponent(self) -> float:
        return self.params["tail_exponent"]

    @property
    def pareto_index(self) -> float:
        return self.params["tail_exponent"] - 1.0


@dataclass(frozen=True, eq=False)
class CollapseCurve:
    time: int
    scaled_x: np.ndarray
    scaled_y: np.ndarray


@dataclass(frozen=True, eq=False)
class CollapseResult:
    scaling_exponent: float
    curves: Tuple[CollapseCurve, ...]
    quality: float
    inverted: bool = False
    profile: Dict[float, Optional[float]] = field(default_factory=dict)


def goodness_of_fit(observed: Sequence[float], predicted: Sequence[float], n_params: int = 2) -> Tuple[float, float]:
    """
    Pearson chi^2 per degree of freedom on the densities, and R^2 of the
    log10 densities (the space the fit is done in).
    """
    obs = np.asarray(observed, dtype=np.float64)
    pred = np.asarray(predicted, dtype=np.float64)
    if obs.shape != pred.shape or obs.ndim != 1:
        raise ContractViolation("observed and predicted must be equal-length 1-d sequences")
    if obs.size < n_params + 2:
        raise ContractViolation(f"need at least {n_params + 2} points for {n_params} parameters, got {obs.size}")
    dof = obs.size - n_params
    if np.any(pred <= 0.0):
        raise MetricUndefinedError("predicted values must be positive")
    if np.any(obs <= 0.0):
        raise MetricUndefinedError("observed values must be positive in log space")

    chi2 = float(np.sum((obs - pred) ** 2 / pred) / dof)

    log_obs = np.log10(obs)
    ss_res = float(np.sum((log_obs - np.log10(pred)) ** 2))
    ss_tot = float(np.sum((log_obs - log_obs.mean()) ** 2))
    if ss_tot == 0.0:
        r_squared = 1.0 if ss_res == 0.0 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return chi2, r_squared


def default_fit_window(d: DensityEstimate, lower_q: float = 0.90, upper_q: float = 0.999) -> Tuple[float, float]:
    """Bin centers at the lower_q and upper_q quantiles of the probability mass."""
    if not 0.0 <= lower_q < upper_q <= 1.0:
        raise ContractViolation(f"need 0 <= lower_q < upper_q <= 1, got ({lower_q}, {upper_q})")
    mass = d.densities * d.bin_width
    total = float(mass.sum())
    if total <= 0.0:
        raise FitInfeasibleError("density carries no mass")

    cdf = np.cumsum(mass) / total
    centers = density_bin_centers(d)
    x_min = float(centers[min(int(np.searchsorted(cdf, lower_q)), d.bins - 1)])
    x_max = float(centers[min(int(np.searchsorted(cdf, upper_q)), d.bins - 1)])
    if not x_min < x_max:
        raise FitInfeasibleError(f"quantile window collapsed to a single bin at {x_min}")
    logger.debug("default_fit_window: [%g, %g]", x_min, x_max)
    return x_min, x_max


def _window_points(d: DensityEstimate, window: Tuple[float, float]) -> Tuple[np.ndarray, np.ndarray]:
    x_min, x_max = window
    if not x_min < x_max:
        raise ContractViolation(f"window must satisfy x_min < x_max, got {window}")
    if x_max < d.lo or x_min > d.hi:
        raise ContractViolation(f"window {window} lies outside the density support [{d.lo}, {d.hi}]")

    centers = density_bin_centers(d)
    mask = (centers >= x_min) & (centers <= x_max) & (d.densities > 0.0)
    # log10 needs positive abscissas
    mask &= centers > 0.0
    count = int(np.count_nonzero(mask))
    if count < MIN_FIT_POINTS:
        raise FitInfeasibleError(f"only {count} nonzero bins in window [{x_min:g}, {x_max:g}]; need {MIN_FIT_POINTS}")
    return centers[mask], d.densities[mask]


def fit_power_law(d: DensityEstimate, window: Tuple[float, float]) -> FitResult:
    xs, ys = _window_points(d, window)
    slope, intercept = np.polyfit(np.log10(xs), np.log10(ys), 1)
    amplitude = 10.0 ** intercept
    predicted = amplitude * xs ** slope
    chi2, r_squared = goodness_of_fit(ys, predicted, n_params=2)
    return FitResult(
        family=FitFamily.POWER_LAW,
        params={"amplitude": float(amplitude), "tail_exponent": float(-slope)},
        window=(float(window[0]), float(window[1])),
        chi2_per_dof=chi2,
        r_squared=r_squared,
        points_used=int(xs.size),
    )


def _lognormal_by_regression(xs: np.ndarray, ys: np.ndarray) -> Tuple[Dict[str, float], np.ndarray, bool]:
    lx = np.log10(xs)
    curvature, linear, constant = np.polyfit(lx, np.log10(ys), 2)
    predicted = 10.0 ** (constant + linear * lx + curvature * lx * lx)

    if curvature >= 0.0:
        # no maximum in log-log: the best parabola is a power law or convex
        params = {"amplitude": math.nan, "mu": math.nan, "sigma": math.nan}
        return params, predicted, True

    variance = -_LN10 / (2.0 * curvature)
    mu = (linear + 1.0) * variance
    sigma = math.sqrt(variance)
    log_norm = constant * _LN10 + mu * mu / (2.0 * variance)
    amplitude = math.exp(log_norm) * sigma * math.sqrt(2.0 * math.pi)
    return {"amplitude": amplitude, "mu": mu, "sigma": sigma}, predicted, False


def _lognormal_by_moments(d: DensityEstimate, xs: np.ndarray) -> Tuple[Dict[str, float], np.ndarray]:
    centers = density_bin_centers(d)
    occupied = (d.densities > 0.0) & (centers > 0.0)
    weights = d.densities[occupied] * d.bin_width
    mass = float(weights.sum())
    log_x = np.log(centers[occupied])
    mu = float(np.sum(weights * log_x) / mass)
    sigma = float(math.sqrt(np.sum(weights * (log_x - mu) ** 2) / mass))
    if sigma <= 0.0:
        raise FitInfeasibleError("all mass sits in one bin; lognormal scale is zero")
    predicted = mass * st.lognorm.pdf(xs, s=sigma, scale=math.exp(mu))
    return {"amplitude": mass, "mu": mu, "sigma": sigma}, predicted


def fit_lognormal(d: DensityEstimate, window: Tuple[float, float],
                  method: LognormalMethod = LognormalMethod.REGRESSION) -> FitResult:
    """
    REGRESSION fits log10 p against (log10 x, (log10 x)^2) on the window; a
    non-negative curvature is returned with degenerate=True and NaN shape
    parameters. MOMENTS matches ln x mean and spread of the whole density and
    only scores it on the window.
    """
    xs, ys = _window_points(d, window)
    degenerate = False
    if method is LognormalMethod.REGRESSION:
        params, predicted, degenerate = _lognormal_by_regression(xs, ys)
    else:
        params, predicted = _lognormal_by_moments(d, xs)

    if np.any(predicted <= 0.0):
        # pdf underflow far in the tail
        raise FitInfeasibleError("lognormal prediction underflows inside the window")
    chi2, r_squared = goodness_of_fit(ys, predicted, n_params=3)
    return FitResult(
        family=FitFamily.LOGNORMAL,
        params=params,
        window=(float(window[0]), float(window[1])),
        chi2_per_dof=chi2,
        r_squared=r_squared,
        points_used=int(xs.size),
        method=method.value,
        degenerate=degenerate,
    )


def _collapse_curve(time: int, d: DensityEstimate, alpha: float, inverted: bool) -> CollapseCurve:
    centers = density_bin_centers(d)
    mask = (d.densities > 0.0) & (centers > 0.0)
    xs = centers[mask]
    ys = d.densities[mask]
    exponent = -alpha if inverted else alpha
    scaled_x = xs ** exponent * time
    scaled_y = ys * xs ** (-exponent)
    order = np.argsort(scaled_x, kind="stable")
    return CollapseCurve(time=int(time), scaled_x=scaled_x[order], scaled_y=scaled_y[order])


def _pair_deviation(a: CollapseCurve, b: CollapseCurve) -> Optional[float]:
    if a.scaled_x.size < 2 or b.scaled_x.size < 2:
        return None
    ax, ay = np.log10(a.scaled_x), np.log10(a.scaled_y)
    bx, by = np.log10(b.scaled_x), np.log10(b.scaled_y)
    lo = max(ax[0], bx[0])
    hi = min(ax[-1], bx[-1])
    if not lo < hi:
        return None
    grid = np.linspace(lo, hi, COLLAPSE_GRID_POINTS)
    diff = np.interp(grid, ax, ay) - np.interp(grid, bx, by)
    return float(np.mean(diff * diff))


def scaling_collapse(snapshots: Sequence[Tuple[int, DensityEstimate]], alpha: float,
                     invert_exponent: bool = False) -> CollapseResult:
    """
    Rescale each density to (x^alpha * t, p * x^-alpha) and score how well the
    curves overlap: mean squared log10 gap on each pair's common abscissa
    range, averaged over every pair that overlaps.
    """
    if len(snapshots) < 2:
        raise ContractViolation(f"collapse needs at least two snapshots, got {len(snapshots)}")
    if alpha == 0.0:
        raise ContractViolation("collapse exponent must be non-zero")

    curves = tuple(_collapse_curve(t, d, alpha, invert_exponent) for t, d in snapshots)
    deviations: List[float] = []
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            gap = _pair_deviation(curves[i], curves[j])
            if gap is not None:
                deviations.append(gap)
    if not deviations:
        raise CollapseUndefinedError(f"rescaled curves share no support at alpha={alpha}")

    return CollapseResult(
        scaling_exponent=float(alpha),
        curves=curves,
        quality=float(np.mean(deviations)),
        inverted=invert_exponent,
    )


def collapse_search(snapshots: Sequence[Tuple[int, DensityEstimate]], alpha_grid: Iterable[float],
                    invert_exponent: bool = False) -> Tuple[float, CollapseResult]:
    """Grid point with the lowest collapse quality; ties go to the smaller exponent."""
    grid = sorted({float(a) for a in alpha_grid})
    if not grid:
        raise ContractViolation("alpha grid is empty")

    best: Optional[CollapseResult] = None
    profile: Dict[float, Optional[float]] = {}
    for alpha in grid:
        if alpha == 0.0:
            profile[alpha] = None
            continue
        try:
            result = scaling_collapse(snapshots, alpha, invert_exponent)
        except CollapseUndefinedError as e:
            logger.warning("collapse_search: skipping alpha=%g: %s", alpha, e)
            profile[alpha] = None
            continue
        logger.debug("collapse_search: alpha=%g quality=%g", alpha, result.quality)
        profile[alpha] = result.quality
        if best is None or result.quality < best.quality:
            best = result

    if best is None:
        raise CollapseUndefinedError("no grid point produced a defined collapse")
    best = CollapseResult(
        scaling_exponent=best.scaling_exponent,
        curves=best.curves,
        quality=best.quality,
        inverted=best.inverted,
        profile=profile,
    )
    return best.scaling_exponent, best


@dataclass(frozen=True)
class FitFailure:
    """Stands in for a FitResult when a family could not be fitted"""
    family: FitFamily
    code: str
    message: str


def fit_families(d: DensityEstimate, window: Optional[Tuple[float, float]] = None,
                 lognormal_method: LognormalMethod = LognormalMethod.MOMENTS) -> List[Union[FitResult, FitFailure]]:
    """
    Power-law and lognormal fits on one window, the default window when none
    is given. Failures are returned as FitFailure entries instead of raised.
    """
    outcomes: List[Union[FitResult, FitFailure]] = []
    try:
        fit_window = window if window is not None else default_fit_window(d)
    except WealthSimError as e:
        logger.warning("fit_families: no usable window: %s", e)
        return [FitFailure(family, e.code, str(e)) for family in FitFamily]

    for family in FitFamily:
        try:
            if family is FitFamily.POWER_LAW:
                outcomes.append(fit_power_law(d, fit_window))
            else:
                outcomes.append(fit_lognormal(d, fit_window, lognormal_method))
        except WealthSimError as e:
            logger.warning("fit_families: %s fit failed on [%g, %g]: %s",
                           family.value, fit_window[0], fit_window[1], e)
            outcomes.append(FitFailure(family, e.code, str(e)))
    return outcomes
