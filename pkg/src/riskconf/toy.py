"""Confidence sets for the argmin of a drifted Brownian motion on a grid.

Y(t) = F(t) + W(t) is observed on N equispaced points of [0, 1]. Two sets
are provided: a naive one thresholding Y at its minimum plus the range
quantile of W, and a multiscale one comparing every pair of grid points
with the scale-dependent penalty sqrt(2 log(e / |s - t|)).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numba as nb
import numpy as np

from .errors import InvalidArgument, ResourceLimit
from .mc import DOMAIN_TOY_KAPPA, DOMAIN_TOY_PATH, map_replicates, substream, upper_quantile

DEFAULT_MAX_N = 2048


@dataclass(frozen=True)
class Drift:
    """Drift presets: ``zero``, ``kink`` scale*|t - center|^gamma, ``two_well`` with tied minima."""

    kind: str = "zero"
    scale: float = 1.0
    center: float = 0.5
    gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in ("zero", "kink", "two_well"):
            raise InvalidArgument(f"unknown drift kind {self.kind!r}")

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "kink":
            return self.scale * np.abs(t - self.center) ** self.gamma
        d = np.minimum(np.abs(t - 0.25), np.abs(t - 0.75))
        return self.scale * d**self.gamma

    def minimizers(self, grid: np.ndarray) -> np.ndarray:
        """Boolean mask of grid points minimizing the drift."""
        f = self(grid)
        return f == f.min()


@dataclass(frozen=True)
class ToyPath:
    grid: np.ndarray
    y: np.ndarray
    f: np.ndarray

    @property
    def N(self) -> int:
        return self.grid.size


def _grid(N: int) -> np.ndarray:
    if N < 2:
        raise InvalidArgument("need at least two grid points")
    return np.linspace(0.0, 1.0, N)


def brownian(N: int, rng: np.random.Generator) -> np.ndarray:
    """W on N equispaced points of [0, 1], W(0) = 0."""
    w = np.empty(N)
    w[0] = 0.0
    np.cumsum(rng.standard_normal(N - 1) * math.sqrt(1.0 / (N - 1)), out=w[1:])
    return w


def simulate_path(drift: Drift, N: int, rng: np.random.Generator) -> ToyPath:
    grid = _grid(N)
    f = drift(grid)
    return ToyPath(grid, f + brownian(N, rng), f)


def _lag_penalties(N: int):
    lag = np.arange(N, dtype=float)
    lag[0] = 1.0
    h = lag / (N - 1)
    inv_sqrt = 1.0 / np.sqrt(h)
    pen = np.sqrt(2.0 * (1.0 - np.log(h)))
    return inv_sqrt, pen


@nb.njit(cache=True, nogil=True)
def _multiscale_sup(w, inv_sqrt, pen):
    N = w.size
    best = -np.inf
    for lag in range(1, N):
        a = inv_sqrt[lag]
        b = pen[lag]
        for i in range(N - lag):
            v = abs(w[i + lag] - w[i]) * a - b
            if v > best:
                best = v
    return best


def multiscale_statistic(w: np.ndarray) -> float:
    """sup over grid pairs of |W(s)-W(t)|/sqrt|s-t| - sqrt(2 log(e/|s-t|))."""
    w = np.asarray(w, dtype=float)
    inv_sqrt, pen = _lag_penalties(w.size)
    return float(_multiscale_sup(w, inv_sqrt, pen))


def simulate_toy_statistics(N: int, reps: int, seed: int, threads: int = 1,
                            max_n: int = DEFAULT_MAX_N) -> tuple[np.ndarray, np.ndarray]:
    """(range of W, multiscale statistic) for ``reps`` independent paths."""
    if N > max_n:
        raise ResourceLimit(f"N={N} exceeds the pair-enumeration cap {max_n}")
    inv_sqrt, pen = _lag_penalties(N)

    def one(r: int):
        w = brownian(N, substream(seed, r, DOMAIN_TOY_KAPPA))
        return w.max() - w.min(), _multiscale_sup(w, inv_sqrt, pen)

    out = np.array(map_replicates(one, reps, threads))
    return out[:, 0], out[:, 1]


def kappa_naive(N: int, reps: int, alpha, seed: int, threads: int = 1):
    rng_range, _ = simulate_toy_statistics(N, reps, seed, threads)
    return upper_quantile(rng_range, alpha)


def kappa_multiscale(N: int, reps: int, alpha, seed: int, threads: int = 1):
    _, ms = simulate_toy_statistics(N, reps, seed, threads)
    return upper_quantile(ms, alpha)


def confset_naive(path: ToyPath, kappa: float) -> np.ndarray:
    """Mask of grid points with Y(s) <= min Y + kappa."""
    return path.y <= path.y.min() + kappa


@nb.njit(cache=True, nogil=True)
def _multiscale_set(y, sqrt_h, pen, kappa):
    N = y.size
    keep = np.ones(N, dtype=np.bool_)
    for s in range(N):
        ys = y[s]
        for t in range(N):
            if t == s:
                continue
            lag = abs(t - s)
            if ys > y[t] + sqrt_h[lag] * (pen[lag] + kappa):
                keep[s] = False
                break
    return keep


def confset_multiscale(path: ToyPath, kappa: float) -> np.ndarray:
    """Mask of s with Y(s) <= Y(t) + sqrt|s-t| (sqrt(2 log(e/|s-t|)) + kappa) for all t."""
    inv_sqrt, pen = _lag_penalties(path.N)
    return _multiscale_set(path.y, 1.0 / inv_sqrt, pen, float(kappa))


def max_distance(path: ToyPath, mask: np.ndarray, s0: float) -> float:
    return float(np.max(np.abs(path.grid[mask] - s0)))


@dataclass(frozen=True)
class RateRow:
    c: float
    naive_dist: float
    multi_dist: float


def rate_experiment(scales: Sequence[float], N: int, reps: int, alpha: float, seed: int,
                    kappa_reps: int = 2000, gamma: float = 1.0, threads: int = 1):
    """Median max-distance of both sets from the kink location, per drift scale.

    Returns rows (c, naive median, multiscale median) and the two kappas.
    """
    k_naive, k_multi = (upper_quantile(s, alpha)
                        for s in simulate_toy_statistics(N, kappa_reps, seed, threads))
    rows = []
    for ci, c in enumerate(scales):
        drift = Drift("kink", float(c), 0.5, gamma)

        def one(r: int):
            rng = substream(seed, ci * 1_000_000 + r, DOMAIN_TOY_PATH)
            path = simulate_path(drift, N, rng)
            return (max_distance(path, confset_naive(path, k_naive), 0.5),
                    max_distance(path, confset_multiscale(path, k_multi), 0.5))

        d = np.array(map_replicates(one, reps, threads))
        rows.append(RateRow(float(c), float(np.median(d[:, 0])), float(np.median(d[:, 1]))))
    return rows, k_naive, k_multi


def rate_slopes(rows: Sequence[RateRow]) -> tuple[float, float]:
    """Least-squares slopes of log distance on log scale for both sets."""
    dists = np.array([[r.naive_dist, r.multi_dist] for r in rows])
    if np.any(dists <= 0):
        raise InvalidArgument("a set collapsed to the kink point; refine the grid or lower the scales")
    lc = np.log([r.c for r in rows])
    naive = np.polyfit(lc, np.log([r.naive_dist for r in rows]), 1)[0]
    multi = np.polyfit(lc, np.log([r.multi_dist for r in rows]), 1)[0]
    return float(naive), float(multi)


def rates_csv(rows: Sequence[RateRow]) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["c_n", "naive_dist", "multi_dist"])
    for r in rows:
        wr.writerow([repr(r.c), repr(r.naive_dist), repr(r.multi_dist)])
    return buf.getvalue()
