"""
Pairwise exchange kernels (yard-sale and theft-fraud) and the agent pool they act on.
"""

import math
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np

import kernels
from errors import ContractViolation

logger = logging.getLogger(__name__)


class KernelKind(Enum):
    YARD_SALE = "yard_sale"
    THEFT_FRAUD = "theft_fraud"

    @property
    def code(self) -> int:
        return kernels.KERNEL_YARD_SALE if self is KernelKind.YARD_SALE else kernels.KERNEL_THEFT_FRAUD


class AlphaKind(Enum):
    FIXED = "fixed"
    PER_TRANSACTION_UNIFORM = "per_transaction_uniform"
    QUENCHED_PER_AGENT = "quenched_per_agent"


_ALPHA_CODES = {
    AlphaKind.FIXED: kernels.ALPHA_FIXED,
    AlphaKind.PER_TRANSACTION_UNIFORM: kernels.ALPHA_UNIFORM,
    AlphaKind.QUENCHED_PER_AGENT: kernels.ALPHA_QUENCHED,
}


@dataclass(frozen=True)
class AlphaMode:
    """
    How the yard-sale stake fraction is chosen.
    Only FIXED uses `value`; the other kinds draw alpha from U(0,1].
    """
    kind: AlphaKind
    value: float = 0.5

    def __post_init__(self) -> None:
        if self.kind is AlphaKind.FIXED and not 0.0 < self.value <= 1.0:
            raise ContractViolation(f"fixed alpha must lie in (0, 1], got {self.value}")

    @classmethod
    def fixed(cls, value: float = 0.5) -> "AlphaMode":
        return cls(AlphaKind.FIXED, float(value))

    @classmethod
    def per_transaction_uniform(cls) -> "AlphaMode":
        return cls(AlphaKind.PER_TRANSACTION_UNIFORM)

    @classmethod
    def quenched_per_agent(cls) -> "AlphaMode":
        return cls(AlphaKind.QUENCHED_PER_AGENT)

    @property
    def code(self) -> int:
        return _ALPHA_CODES[self.kind]

    @property
    def is_quenched(self) -> bool:
        return self.kind is AlphaKind.QUENCHED_PER_AGENT


class AgentPool:
    """
    Wealth vector of the living agents plus a cached total.

    Storage is an over-allocated buffer so injection and fragmentation append
    in place; `wealths` and `alphas` are views of the live prefix and must be
    re-read after anything that can grow the pool.
    """

    def __init__(self, wealths: Sequence[float], alphas: Optional[Sequence[float]] = None,
                 capacity: Optional[int] = None) -> None:
        values = np.asarray(wealths, dtype=np.float64)
        if values.ndim != 1:
            raise ContractViolation("wealths must be one-dimensional")
        if not np.all(np.isfinite(values)) or np.any(values < 0.0):
            raise ContractViolation("every wealth must be finite and non-negative")

        size = int(values.size)
        cap = max(int(capacity or 0), size, 2)
        self._wealths = np.zeros(cap, dtype=np.float64)
        self._wealths[:size] = values
        self._alphas = np.ones(cap, dtype=np.float64)
        if alphas is not None:
            alpha_values = np.asarray(alphas, dtype=np.float64)
            if alpha_values.shape != values.shape:
                raise ContractViolation("alphas must match wealths in length")
            if np.any(alpha_values <= 0.0) or np.any(alpha_values > 1.0):
                raise ContractViolation("every per-agent alpha must lie in (0, 1]")
            self._alphas[:size] = alpha_values
        self.size = size
        self.cached_total = math.fsum(values)

    @classmethod
    def from_uniform(cls, n0: int, rng: np.random.Generator,
                     alpha_mode: Optional[AlphaMode] = None, capacity: Optional[int] = None) -> "AgentPool":
        """Initial pool: n0 wealths drawn from U[0,1), plus per-agent alphas in quenched mode."""
        if n0 < 1:
            raise ContractViolation(f"initial agent count must be positive, got {n0}")
        wealths = rng.random(n0)
        alphas = None
        if alpha_mode is not None and alpha_mode.is_quenched:
            alphas = 1.0 - rng.random(n0)
        return cls(wealths, alphas=alphas, capacity=capacity)

    def __len__(self) -> int:
        return self.size

    @property
    def wealths(self) -> np.ndarray:
        return self._wealths[:self.size]

    @property
    def alphas(self) -> np.ndarray:
        return self._alphas[:self.size]

    @property
    def wealth_buffer(self) -> np.ndarray:
        return self._wealths

    @property
    def alpha_buffer(self) -> np.ndarray:
        return self._alphas

    @property
    def capacity(self) -> int:
        return int(self._wealths.size)

    def ensure_capacity(self, extra: int) -> None:
        needed = self.size + int(extra)
        if needed <= self.capacity:
            return
        new_capacity = max(2 * self.capacity, needed)
        logger.debug("AgentPool: growing buffers %d -> %d", self.capacity, new_capacity)
        wealths = np.zeros(new_capacity, dtype=np.float64)
        wealths[:self.size] = self.wealths
        alphas = np.ones(new_capacity, dtype=np.float64)
        alphas[:self.size] = self.alphas
        self._wealths = wealths
        self._alphas = alphas

    def recompute_total(self) -> float:
        return math.fsum(self.wealths)


def ys_exchange(x_i: float, x_j: float, alpha: float, winner_is_i: bool) -> Tuple[float, float]:
    """Yard-sale rule: the winner takes alpha * min(x_i, x_j) from the loser."""
    if not 0.0 < alpha <= 1.0:
        raise ContractViolation(f"alpha must lie in (0, 1], got {alpha}")
    if x_i < 0.0 or x_j < 0.0:
        raise ContractViolation(f"wealths must be non-negative, got ({x_i}, {x_j})")

    delta = alpha * min(x_i, x_j)
    if winner_is_i:
        return x_i + delta, x_j - delta
    return x_i - delta, x_j + delta


def tf_exchange(x_i: float, x_j: float, epsilon: float) -> Tuple[float, float]:
    """Theft-fraud rule: the pair's combined wealth is split epsilon : 1 - epsilon."""
    if not 0.0 <= epsilon <= 1.0:
        raise ContractViolation(f"epsilon must lie in [0, 1], got {epsilon}")
    if x_i < 0.0 or x_j < 0.0:
        raise ContractViolation(f"wealths must be non-negative, got ({x_i}, {x_j})")

    total = x_i + x_j
    share = epsilon * total
    return share, total - share


def pick_distinct_pair(pool_size: int, rng: np.random.Generator) -> Tuple[int, int]:
    if pool_size < 2:
        raise ContractViolation(f"need at least two agents to trade, pool has {pool_size}")
    i, j = kernels.pick_pair(rng, int(pool_size))
    return int(i), int(j)


def sample_pairs(pool_size: int, count: int, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    if pool_size < 2:
        raise ContractViolation(f"need at least two agents to trade, pool has {pool_size}")
    if count < 0:
        raise ContractViolation(f"count must be non-negative, got {count}")
    return kernels.sample_pairs(rng, int(pool_size), int(count))


def transact(pool: AgentPool, kernel: KernelKind, alpha_mode: AlphaMode, rng: np.random.Generator) -> None:
    """One transaction between two distinct random agents. cached_total is unaffected."""
    if pool.size < 2:
        raise ContractViolation(f"need at least two agents to trade, pool has {pool.size}")
    kernels.transact_once(pool.wealth_buffer, pool.alpha_buffer, pool.size,
                          kernel.code, alpha_mode.code, float(alpha_mode.value), rng)
