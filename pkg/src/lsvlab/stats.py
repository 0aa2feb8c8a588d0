"""Shared statistical helpers: Wilson score intervals and monotonicity checks."""

import math

# Normal quantile at 0.995, i.e. the z used by every 99% interval in the library.
Z99 = 2.5758293035489004


def wilson_interval(count, trials, z=Z99):
    """Wilson score interval for a binomial proportion.

    Returns (low, high). Well behaved for count == 0 and count == trials,
    which is why it is used for all event-probability estimates here.
    """
    if trials <= 0:
        raise ValueError("trials must be positive")
    if not 0 <= count <= trials:
        raise ValueError("count must lie in [0, trials]")
    phat = count / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = phat + z2 / (2.0 * trials)
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials))
    low = (center - half) / denom
    high = (center + half) / denom
    return max(0.0, low), min(1.0, high)


def strictly_decreasing(values):
    """True iff the sequence strictly decreases (length < 2 vacuously True)."""
    return all(a > b for a, b in zip(values, values[1:]))


def nonincreasing(values):
    return all(a >= b for a, b in zip(values, values[1:]))
