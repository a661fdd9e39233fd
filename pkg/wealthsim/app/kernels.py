"""
Compiled hot loops for the exchange simulation.

Everything here is numba nopython code that takes a numpy Generator directly,
so one run never touches shared random state and runs on different threads
never contend for the GIL. The functions do no argument checking; the Python
wrappers in core_exchange.py and models.py validate before calling in.
"""

import numpy as np
from numba import njit

KERNEL_YARD_SALE = 0
KERNEL_THEFT_FRAUD = 1

ALPHA_FIXED = 0
ALPHA_UNIFORM = 1
ALPHA_QUENCHED = 2

VARIANT_PURE_YS = 0
VARIANT_PURE_TF = 1
VARIANT_MODEL_A = 2
VARIANT_MODEL_B = 3
VARIANT_MODEL_C1 = 4
VARIANT_MODEL_C2 = 5
VARIANT_MODEL_C3 = 6

# Slots of the per-run event ledger array
LEDGER_INITIAL_WEALTH = 0
LEDGER_INJECTIONS = 1
LEDGER_INJECTED_WEALTH = 2
LEDGER_INJECTED_COMPENSATION = 3
LEDGER_FRAGMENTATION_ATTEMPTS = 4
LEDGER_FRAGMENTATIONS = 5
LEDGER_FRAGMENTED_WEALTH = 6
LEDGER_MEAN_AT_FRAGMENTATION = 7
LEDGER_SIZE = 8


@njit(cache=True, nogil=True)
def uniform_index(rng, n):
    k = int(rng.random() * n)
    if k >= n:
        k = n - 1
    return k


@njit(cache=True, nogil=True)
def pick_pair(rng, n):
    """Two distinct indices, each marginally uniform over range(n)."""
    i = uniform_index(rng, n)
    j = uniform_index(rng, n - 1)
    if j >= i:
        j += 1
    return i, j


@njit(cache=True, nogil=True)
def sample_pairs(rng, n, count):
    first = np.empty(count, dtype=np.int64)
    second = np.empty(count, dtype=np.int64)
    for k in range(count):
        i, j = pick_pair(rng, n)
        first[k] = i
        second[k] = j
    return first, second


@njit(cache=True, nogil=True)
def draw_alpha(rng):
    # U(0, 1]
    return 1.0 - rng.random()


@njit(cache=True, nogil=True)
def transact_once(wealths, alphas, size, kernel, alpha_mode, alpha_value, rng):
    i, j = pick_pair(rng, size)
    x_i = wealths[i]
    x_j = wealths[j]

    if kernel == KERNEL_THEFT_FRAUD:
        total = x_i + x_j
        share = rng.random() * total
        wealths[i] = share
        wealths[j] = total - share
        return

    if alpha_mode == ALPHA_FIXED:
        alpha = alpha_value
    elif alpha_mode == ALPHA_UNIFORM:
        alpha = draw_alpha(rng)
    elif x_i <= x_j:
        alpha = alphas[i]
    else:
        alpha = alphas[j]

    # one delta for both sides keeps the pair sum exact
    delta = alpha * min(x_i, x_j)
    if rng.random() < 0.5:
        wealths[i] = x_i + delta
        wealths[j] = x_j - delta
    else:
        wealths[i] = x_i - delta
        wealths[j] = x_j + delta


@njit(cache=True, nogil=True)
def inject(wealths, alphas, size, alpha_mode, rng, ledger):
    """Append one agent with U[0,1) wealth. Caller guarantees capacity."""
    wealth = rng.random()
    wealths[size] = wealth
    if alpha_mode == ALPHA_QUENCHED:
        alphas[size] = draw_alpha(rng)

    # Kahan-compensated running sum of injected wealth
    y = wealth - ledger[LEDGER_INJECTED_COMPENSATION]
    t = ledger[LEDGER_INJECTED_WEALTH] + y
    ledger[LEDGER_INJECTED_COMPENSATION] = (t - ledger[LEDGER_INJECTED_WEALTH]) - y
    ledger[LEDGER_INJECTED_WEALTH] = t
    ledger[LEDGER_INJECTIONS] += 1.0
    return size + 1


@njit(cache=True, nogil=True)
def fragment(wealths, alphas, size, split_fraction, alpha_mode, rng, ledger):
    """
    Pick an agent uniformly and split it with probability min(1, wealth).
    Returns the new size and whether the split happened.
    """
    ledger[LEDGER_FRAGMENTATION_ATTEMPTS] += 1.0
    k = uniform_index(rng, size)
    wealth = wealths[k]
    if not rng.random() < min(1.0, wealth):
        return size, False

    kept = split_fraction * wealth
    wealths[k] = kept
    wealths[size] = wealth - kept
    if alpha_mode == ALPHA_QUENCHED:
        alphas[size] = draw_alpha(rng)

    population_total = ledger[LEDGER_INITIAL_WEALTH] + ledger[LEDGER_INJECTED_WEALTH]
    ledger[LEDGER_FRAGMENTATIONS] += 1.0
    ledger[LEDGER_FRAGMENTED_WEALTH] += wealth
    ledger[LEDGER_MEAN_AT_FRAGMENTATION] += population_total / size
    return size + 1, True


@njit(cache=True, nogil=True)
def advance(wealths, alphas, size, start_unit, stop_unit, variant, per_sweep, tau,
            kernel, alpha_mode, alpha_value, split_fraction, rng, ledger):
    """
    Run schedule units start_unit+1 .. stop_unit and the variant's event hooks.
    The buffers must already hold room for every agent the segment can add.
    """
    for unit in range(start_unit + 1, stop_unit + 1):
        n_transactions = size if per_sweep else 1
        for _ in range(n_transactions):
            transact_once(wealths, alphas, size, kernel, alpha_mode, alpha_value, rng)

        if variant == VARIANT_MODEL_A:
            size = inject(wealths, alphas, size, alpha_mode, rng, ledger)
        elif variant == VARIANT_MODEL_B:
            if unit % tau == 0:
                size, _ = fragment(wealths, alphas, size, split_fraction, alpha_mode, rng, ledger)
        elif variant == VARIANT_MODEL_C1:
            size, accepted = fragment(wealths, alphas, size, split_fraction, alpha_mode, rng, ledger)
            if accepted:
                size = inject(wealths, alphas, size, alpha_mode, rng, ledger)
        elif variant == VARIANT_MODEL_C2:
            size = inject(wealths, alphas, size, alpha_mode, rng, ledger)
            size, _ = fragment(wealths, alphas, size, split_fraction, alpha_mode, rng, ledger)
        elif variant == VARIANT_MODEL_C3:
            if unit % tau == 0:
                population = size
                size, _ = fragment(wealths, alphas, size, split_fraction, alpha_mode, rng, ledger)
                if rng.random() * population < 1.0:
                    size = inject(wealths, alphas, size, alpha_mode, rng, ledger)
    return size
