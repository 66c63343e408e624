"""Reproducible Monte-Carlo plumbing.

Every random draw in the package is addressed by a 64-bit master seed, a
domain tag naming the experiment component, and an integer substream index
(usually the replicate number). Results never depend on how replicates are
scheduled across threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidArgument

# Domain tags keep unrelated simulations on disjoint streams even when they
# share a master seed.
DOMAIN_OBSERVATION = 1
DOMAIN_CRITICAL = 2
DOMAIN_COUPLING = 3
DOMAIN_TOY_PATH = 4
DOMAIN_TOY_KAPPA = 5
DOMAIN_FAMILY = 6
DOMAIN_DIRECT = 7


def substream(seed: int, index: int, domain: int = 0) -> np.random.Generator:
    """Generator for substream ``index`` of ``domain`` under master ``seed``."""
    if seed < 0 or index < 0:
        raise InvalidArgument("seed and substream index must be nonnegative")
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=(int(domain), int(index)))
    return np.random.Generator(np.random.PCG64(ss))


def map_replicates(func: Callable[[int], object], reps: int, threads: int = 1,
                   chunk: int = 64) -> list:
    """Evaluate ``func(r)`` for ``r = 0..reps-1`` and return results in index order.

    With ``threads > 1`` chunks of indices run on a thread pool; numba kernels
    used by the callers release the GIL. Ordering is by index regardless of
    completion order.
    """
    if threads <= 1 or reps <= chunk:
        return [func(r) for r in range(reps)]
    starts = range(0, reps, chunk)

    def run(start: int) -> list:
        return [func(r) for r in range(start, min(start + chunk, reps))]

    out: list = []
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for block in pool.map(run, starts):
            out.extend(block)
    return out


def order_statistic_index(reps: int, alpha: float) -> int:
    """0-based index of the ceil((1-alpha)*reps)-th order statistic."""
    if not 0.0 < alpha < 1.0:
        raise InvalidArgument(f"alpha must lie in (0, 1), got {alpha}")
    # guard against (1 - 0.9) * 5000 = 500.00000000000006 style rounding
    r = math.ceil((1.0 - alpha) * reps - 1e-9)
    return min(max(r, 1), reps) - 1


def upper_quantile(samples: np.ndarray, alpha: float | Sequence[float]):
    """Conservative empirical (1-alpha)-quantile(s): order statistic ceil((1-alpha)*reps)."""
    s = np.sort(np.asarray(samples, dtype=float))
    if np.ndim(alpha) == 0:
        return float(s[order_statistic_index(s.size, float(alpha))])
    return np.array([s[order_statistic_index(s.size, float(a))] for a in alpha])


def binomial_se(p: float, reps: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / reps)
