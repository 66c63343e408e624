"""Joint construction of the ratio statistics T_jk under a signal theta and
under the constant-risk signal theta* on one probability space.

Both families are built from a single unit-rate Poisson process, shared
Gaussians G_i and Z_s, and one chi2_m variate S^2. Noncentrality enters
only through the Poisson counts at the "times" t_k / 2 and t*_k / 2, where
t_k = sum_{i <= k} theta_i^2 / sigma^2 and t*_k = t_j0 + k - j0 for a fixed
optimal index j0. Because t <= t* pointwise, with equality exactly on the
optimal set, the statistics are ordered pathwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .mc import DOMAIN_COUPLING, map_replicates, substream
from .seqmodel import CandidateFamily, SignalSpec, optimal_set


@dataclass(frozen=True)
class CouplingTimepoints:
    t: np.ndarray
    t_star: np.ndarray
    j_anchor: int
    optimal: np.ndarray = field(repr=False)  # boolean mask over 0..n

    @property
    def n(self) -> int:
        return self.t.size - 1


def build_timepoints(spec: SignalSpec) -> CouplingTimepoints:
    opt = optimal_set(spec, CandidateFamily.nested(spec.n))
    mask = np.zeros(spec.n + 1, dtype=bool)
    mask[opt] = True
    t = np.concatenate([[0.0], np.cumsum(spec.snr**2)])
    j0 = min(opt)
    t_star = t[j0] + np.arange(spec.n + 1, dtype=float) - j0
    # mathematically t* - t = R(k) - R(j0) >= 0 with equality on the optimal set;
    # pin both facts against rounding
    t_star[mask] = t[mask]
    t_star = np.maximum(t_star, t)
    return CouplingTimepoints(t, t_star, int(j0), mask)


def _poisson_process(horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Event times of a unit-rate Poisson process on [0, horizon]."""
    chunk = int(horizon + 5.0 * math.sqrt(horizon) + 10.0)
    times = np.cumsum(rng.standard_exponential(chunk))
    while times[-1] <= horizon:
        more = times[-1] + np.cumsum(rng.standard_exponential(chunk))
        times = np.concatenate([times, more])
    return times[: np.searchsorted(times, horizon, side="right")]


def _ratio_matrix(g_cum: np.ndarray, z_cum: np.ndarray, counts: np.ndarray, factor: float) -> np.ndarray:
    """T[j, k] for j < k, NaN elsewhere."""
    n = g_cum.size - 1
    zc = z_cum[2 * counts]
    num = (g_cum[None, :] - g_cum[:, None]) + (zc[None, :] - zc[:, None])
    lag = np.arange(n + 1)[None, :] - np.arange(n + 1)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = factor * num / lag
    out[lag <= 0] = np.nan
    return out


def sample_coupled_pair(tp: CouplingTimepoints, m: float, rng: np.random.Generator):
    """One draw of the coupled matrices (T, T*), entries [j, k] for 0 <= j < k <= n."""
    n = tp.n
    events = _poisson_process(float(tp.t_star.max()) / 2.0, rng)
    g = rng.standard_normal(n)
    z = rng.standard_normal(2 * events.size)
    if m == math.inf:
        factor = 1.0
    else:
        factor = m / rng.chisquare(int(m))
    g_cum = np.concatenate([[0.0], np.cumsum(g * g)])
    z_cum = np.concatenate([[0.0], np.cumsum(z * z)])
    count = np.searchsorted(events, tp.t / 2.0, side="right")
    count_star = np.searchsorted(events, tp.t_star / 2.0, side="right")
    return (_ratio_matrix(g_cum, z_cum, count, factor),
            _ratio_matrix(g_cum, z_cum, count_star, factor))


def ordering_violations(tp: CouplingTimepoints, T: np.ndarray, T_star: np.ndarray) -> int:
    """Count pairs breaking T <= T* (j optimal) or T >= T* (k optimal)."""
    opt = tp.optimal
    upper = np.triu(np.ones_like(T, dtype=bool), 1)
    bad_j = upper & opt[:, None] & (T > T_star)
    bad_k = upper & opt[None, :] & (T < T_star)
    return int(bad_j.sum() + bad_k.sum())


@dataclass(frozen=True)
class CouplingRun:
    violations: int
    samples: int
    pairs_checked: int
    T: np.ndarray = field(repr=False)       # (reps, len(pairs)) selected entries
    T_star: np.ndarray = field(repr=False)
    pairs: tuple = ()


def run_coupling(spec: SignalSpec, m: float, reps: int, seed: int, pairs=None, threads: int = 1) -> CouplingRun:
    """Sample ``reps`` coupled pairs; count ordering violations and keep the
    entries at ``pairs`` (default: (0, n)) for marginal checks."""
    tp = build_timepoints(spec)
    n = spec.n
    pairs = tuple(pairs) if pairs is not None else ((0, n),)
    for j, k in pairs:
        if not 0 <= j < k <= n:
            raise InvalidArgument(f"bad pair ({j}, {k})")
    jj = np.array([p[0] for p in pairs])
    kk = np.array([p[1] for p in pairs])

    def one(r: int):
        T, Ts = sample_coupled_pair(tp, m, substream(seed, r, DOMAIN_COUPLING))
        return ordering_violations(tp, T, Ts), T[jj, kk], Ts[jj, kk]

    res = map_replicates(one, reps, threads)
    v = sum(r[0] for r in res)
    return CouplingRun(v, reps, reps * n * (n + 1) // 2,
                       np.array([r[1] for r in res]), np.array([r[2] for r in res]), pairs)


def direct_ratio_samples(spec: SignalSpec, m: float, j: int, k: int, reps: int, rng: np.random.Generator) -> np.ndarray:
    """T_jk = sum_{j<i<=k} X_i^2 / ((k-j) s2) simulated straight from the model."""
    sig = spec.sigma
    eps = rng.standard_normal((reps, k - j))
    x = spec.theta[j:k][None, :] + sig * eps
    s2 = np.full(reps, sig**2) if m == math.inf else sig**2 * rng.chisquare(int(m), size=reps) / m
    return np.sum(x**2, axis=1) / ((k - j) * s2)
