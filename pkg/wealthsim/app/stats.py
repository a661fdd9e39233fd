"""
Density estimation, CCDFs and inequality summaries over normalized wealth.
"""

import math
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import scipy.stats as st

from errors import BinningMismatchError, ContractViolation, MetricUndefinedError
from model_config import Snapshot

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Uniform-bin probability density over [lo, hi]: count / (sample_count * bin_width) per bin."""
    lo: float
    hi: float
    densities: np.ndarray
    sample_count: int

    def __post_init__(self) -> None:
        values = np.asarray(self.densities, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ContractViolation("densities must be a non-empty one-dimensional array")
        if not self.hi > self.lo:
            raise ContractViolation(f"need hi > lo, got [{self.lo}, {self.hi}]")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ContractViolation("densities must be finite and non-negative")
        object.__setattr__(self, "densities", values)

    @property
    def bins(self) -> int:
        return int(self.densities.size)

    @property
    def bin_width(self) -> float:
        return (self.hi - self.lo) / self.bins

    def total_mass(self) -> float:
        return float(np.sum(self.densities) * self.bin_width)

    def same_binning(self, other: "DensityEstimate") -> bool:
        return self.lo == other.lo and self.hi == other.hi and self.bins == other.bins


@dataclass(frozen=True, eq=False)
class Ccdf:
    """f(x) = mass at or above x, tabulated at the left bin edges"""
    xs: np.ndarray
    values: np.ndarray


def density_bin_centers(d: DensityEstimate) -> np.ndarray:
    return d.lo + (np.arange(d.bins) + 0.5) * d.bin_width


def estimate_density(samples: Sequence[float], bins: int, lo: float = 0.0, hi: float = 1.0) -> DensityEstimate:
    """
    Histogram normalized by the total number of observations and the bin width.
    Samples outside [lo, hi] still count toward sample_count.
    """
    data = np.asarray(samples, dtype=np.float64).ravel()
    if data.size == 0:
        raise ContractViolation("cannot estimate a density from zero samples")
    if bins < 1:
        raise ContractViolation(f"bins must be positive, got {bins}")
    if not hi > lo:
        raise ContractViolation(f"need hi > lo, got [{lo}, {hi}]")

    # numpy closes the last bin on the right and ignores out-of-range values
    counts, _ = np.histogram(data, bins=int(bins), range=(lo, hi))
    width = (hi - lo) / bins
    return DensityEstimate(lo=float(lo), hi=float(hi), densities=counts / (data.size * width),
                           sample_count=int(data.size))


def ccdf_from_density(d: DensityEstimate) -> Ccdf:
    mass = d.densities * d.bin_width
    values = np.cumsum(mass[::-1])[::-1]
    xs = d.lo + np.arange(d.bins) * d.bin_width
    return Ccdf(xs=xs, values=values)


def max_share(snapshot: Snapshot) -> float:
    if snapshot.normalized_wealths.size == 0:
        raise ContractViolation("snapshot holds no agents")
    return float(np.max(snapshot.normalized_wealths))


def top_share(snapshot: Snapshot, fraction: float = 0.2) -> float:
    """Share of total wealth held by the richest `fraction` of agents."""
    if not 0.0 < fraction <= 1.0:
        raise ContractViolation(f"fraction must lie in (0, 1], got {fraction}")
    shares = np.sort(snapshot.normalized_wealths)[::-1]
    if shares.size == 0:
        raise ContractViolation("snapshot holds no agents")
    k = max(1, math.ceil(fraction * shares.size))
    return float(np.sum(shares[:k]))


def gini(wealths: Sequence[float]) -> float:
    values = np.sort(np.asarray(wealths, dtype=np.float64))
    if values.size == 0:
        raise ContractViolation("gini coefficient of an empty population is undefined")
    total = values.sum()
    if total <= 0.0:
        return 0.0
    count = values.size
    indexes = np.arange(1, count + 1)
    return float(2.0 * np.sum(indexes * values) / (count * total) - (count + 1) / count)


def ks_distance_exponential(wealths: Sequence[float]) -> float:
    """Kolmogorov-Smirnov distance to the exponential law with the sample's own mean."""
    values = np.asarray(wealths, dtype=np.float64)
    if values.size == 0:
        raise ContractViolation("KS distance of an empty sample is undefined")
    mean = float(values.mean())
    if mean <= 0.0:
        raise MetricUndefinedError("exponential reference needs a positive mean")
    return float(st.kstest(values, "expon", args=(0.0, mean)).statistic)


def ccdf_max_relative_gap(a: Ccdf, b: Ccdf, window: Tuple[float, float]) -> float:
    """Largest |f_a - f_b| / max(f_a, f_b) over grid points inside the window."""
    if a.xs.shape != b.xs.shape or not np.allclose(a.xs, b.xs, rtol=0.0, atol=1e-12):
        raise BinningMismatchError("CCDFs are tabulated on different grids")
    lo, hi = window
    mask = (a.xs >= lo) & (a.xs <= hi) & (a.values > 0.0) & (b.values > 0.0)
    if not np.any(mask):
        raise MetricUndefinedError(f"no common support inside window [{lo}, {hi}]")
    fa = a.values[mask]
    fb = b.values[mask]
    return float(np.max(np.abs(fa - fb) / np.maximum(fa, fb)))


class DensityAccumulator:
    """
    Sample-count-weighted running merge of densities sharing one binning.
    Folding in a fixed order gives bit-identical results across runs.
    """

    def __init__(self) -> None:
        self._first: Optional[DensityEstimate] = None
        self._weighted: Optional[np.ndarray] = None
        self._sample_count = 0
        self._members = 0

    @property
    def members(self) -> int:
        return self._members

    def add(self, d: DensityEstimate) -> None:
        if self._first is None:
            self._first = d
            self._weighted = d.densities * d.sample_count
        else:
            if not self._first.same_binning(d):
                raise BinningMismatchError(
                    f"cannot merge [{d.lo}, {d.hi}]x{d.bins} into "
                    f"[{self._first.lo}, {self._first.hi}]x{self._first.bins}"
                )
            self._weighted = self._weighted + d.densities * d.sample_count
        self._sample_count += d.sample_count
        self._members += 1

    def result(self) -> DensityEstimate:
        if self._first is None:
            raise ContractViolation("nothing to merge")
        if self._members == 1:
            return self._first
        if self._sample_count <= 0:
            raise ContractViolation("merged densities carry no samples")
        return DensityEstimate(lo=self._first.lo, hi=self._first.hi,
                               densities=self._weighted / self._sample_count,
                               sample_count=self._sample_count)


def merge_densities(ds: Iterable[DensityEstimate]) -> DensityEstimate:
    accumulator = DensityAccumulator()
    for d in ds:
        accumulator.add(d)
    return accumulator.result()
