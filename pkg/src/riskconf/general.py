"""Confidence region for the risk-optimal member of an arbitrary family of
index sets.

For every nonvoid difference J = D \\ C between family members, the
noncentrality delta^2(J) = sum_{i in J} theta_i^2 / sigma^2 gets a
Bonferroni-simultaneous interval by inverting the noncentral chi-square CDF
of T(J) = sum_{i in J} X_i^2 / sigma^2 at level alpha / (2 M), M being the
number of nonvoid differences. A member C is retained when no other member
D is certainly better:

    up(C \\ D) - lo(D \\ C) + |D| - |C| >= 0   for all D.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import ncchi2
from .errors import InvalidArgument, ResourceLimit
from .seqmodel import CandidateFamily

DEFAULT_CATALOG_CAP = 1_000_000
EMPTY: tuple[int, ...] = ()


def canonical(s: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted({int(i) for i in s}))


@dataclass(frozen=True)
class DifferenceCatalog:
    """All pairwise differences D \\ C of a family, with index arrays for the region scan."""

    family: CandidateFamily
    entries: tuple[tuple[int, ...], ...]   # entries[0] is the empty set
    diff_index: np.ndarray = field(repr=False)  # [a, b] -> index of C_a \ C_b
    sizes: np.ndarray = field(repr=False)       # |C_a|
    indicator: np.ndarray = field(repr=False)   # (M, n) 0/1 rows for the nonvoid entries

    @property
    def M(self) -> int:
        """Number of nonvoid differences."""
        return len(self.entries) - 1

    def index(self, J: Iterable[int]) -> int:
        return self.entries.index(canonical(J))


def build_catalog(family: CandidateFamily, cap: int = DEFAULT_CATALOG_CAP) -> DifferenceCatalog:
    if family.is_nested:
        family = CandidateFamily.prefixes(family.n)
    sets = family.members()
    f = len(sets)
    if f * f > cap:
        raise ResourceLimit(f"{f} candidates give {f * f} differences, above the cap {cap}")
    entries: dict[tuple[int, ...], int] = {EMPTY: 0}
    diff_index = np.empty((f, f), dtype=np.int64)
    as_sets = [frozenset(s) for s in sets]
    for a in range(f):
        for b in range(f):
            J = tuple(sorted(as_sets[a] - as_sets[b]))
            idx = entries.get(J)
            if idx is None:
                idx = entries[J] = len(entries)
            diff_index[a, b] = idx
    sizes = np.array([len(s) for s in sets], dtype=np.int64)
    indicator = np.zeros((len(entries) - 1, family.n))
    for J, idx in entries.items():
        if idx:
            indicator[idx - 1, np.asarray(J) - 1] = 1.0
    return DifferenceCatalog(family, tuple(entries), diff_index, sizes, indicator)


def statistic_T(x, sigma2: float, J: Iterable[int]) -> float:
    """sum_{i in J} X_i^2 / sigma^2 (1-based indices)."""
    idx = np.fromiter((int(i) - 1 for i in J), dtype=int)
    x = np.asarray(x, dtype=float)
    if idx.size == 0:
        return 0.0
    return float(np.sum(x[idx] ** 2) / sigma2)


def _sum_squares(x: np.ndarray, catalog: DifferenceCatalog) -> tuple[np.ndarray, np.ndarray]:
    """(|J|, sum_{i in J} X_i^2) for every nonvoid catalog entry."""
    x2 = np.asarray(x, dtype=float) ** 2
    return catalog.indicator.sum(axis=1), catalog.indicator @ x2


@dataclass(frozen=True)
class SimultaneousBounds:
    lower: np.ndarray  # aligned with catalog.entries; entry 0 (empty set) is 0
    upper: np.ndarray
    level: float       # per-test tail probability alpha / (2 M)


def _bounds_from_stats(ks, t_lower, t_upper, u) -> SimultaneousBounds:
    lo = np.zeros(ks.size + 1)
    up = np.zeros(ks.size + 1)
    if ks.size:
        lo[1:] = ncchi2.invert_noncentrality_batch(ks, t_lower, u, upper=False)
        up[1:] = ncchi2.invert_noncentrality_batch(ks, t_upper, u, upper=True)
    return SimultaneousBounds(lo, up, u)


def simultaneous_bounds(x, sigma2: float, catalog: DifferenceCatalog, alpha: float) -> SimultaneousBounds:
    """Intervals [lo(J), up(J)] covering every delta^2(J) jointly with probability >= 1 - alpha."""
    if not 0 < alpha < 1:
        raise InvalidArgument(f"alpha must lie in (0, 1), got {alpha}")
    if not sigma2 > 0:
        raise InvalidArgument("sigma2 must be positive")
    _check_x(x, catalog)
    if catalog.M == 0:
        return SimultaneousBounds(np.zeros(1), np.zeros(1), float("nan"))
    u = alpha / (2.0 * catalog.M)
    ks, ss = _sum_squares(x, catalog)
    t = ss / sigma2
    return _bounds_from_stats(ks, t, t, u)


def _check_x(x, catalog: DifferenceCatalog) -> None:
    if np.asarray(x).size != catalog.family.n:
        raise InvalidArgument(f"observation length {np.asarray(x).size} != family n={catalog.family.n}")


@dataclass(frozen=True)
class GeneralRegion:
    retained: list
    alpha: float
    n: int
    bounds: SimultaneousBounds = field(repr=False)
    worst_slack: np.ndarray = field(repr=False)
    worst_partner: np.ndarray = field(repr=False)
    members: list = field(repr=False, default_factory=list)

    def __contains__(self, c) -> bool:
        return canonical(c) in {canonical(s) for s in self.retained}

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n": self.n,
            "retained": [list(c) for c in self.retained],
            "diagnostics": [
                {"candidate": list(c), "worst_d": list(self.members[int(self.worst_partner[a])]),
                 "slack": float(self.worst_slack[a])}
                for a, c in enumerate(self.members)
            ],
        }


def region_from_bounds(catalog: DifferenceCatalog, bounds: SimultaneousBounds, alpha: float) -> GeneralRegion:
    idx = catalog.diff_index
    sz = catalog.sizes
    # margin[a, b] for candidate C_a against competitor C_b
    margin = bounds.upper[idx] - bounds.lower[idx.T] + sz[None, :] - sz[:, None]
    worst_b = np.argmin(margin, axis=1)
    worst = margin[np.arange(margin.shape[0]), worst_b]
    members = catalog.family.members()
    retained = [members[a] for a in np.flatnonzero(worst >= 0)]
    return GeneralRegion(retained, alpha, catalog.family.n, bounds, worst, worst_b, members)


def general_region(x, sigma2: float, family: CandidateFamily, alpha: float,
                   catalog: DifferenceCatalog | None = None) -> GeneralRegion:
    """Region for the optimal member of ``family`` with known noise variance ``sigma2``."""
    catalog = catalog or build_catalog(family)
    bounds = simultaneous_bounds(x, sigma2, catalog, alpha)
    return region_from_bounds(catalog, bounds, alpha)


def variance_ratio_bounds(m: int, alpha: float) -> tuple[float, float, float]:
    """(alpha', tau_l, tau_u): sigma^2 / s2 lies in [tau_l, tau_u] with probability 1 - alpha'."""
    a2 = 1.0 - math.sqrt(1.0 - alpha)
    if m == math.inf:
        return a2, 1.0, 1.0
    p = ncchi2.NcChi2Params(int(m), 0.0)
    tau_l = m / ncchi2.quantile(p, 1.0 - a2 / 2.0)
    tau_u = m / ncchi2.quantile(p, a2 / 2.0)
    return a2, tau_l, tau_u


def general_region_unknown_sigma(x, sigma_hat2: float, m: float, family: CandidateFamily, alpha: float,
                                 catalog: DifferenceCatalog | None = None) -> GeneralRegion:
    """Region with sigma^2 replaced by an independent chi2_m-based estimate.

    The level is split: alpha' = 1 - sqrt(1 - alpha) for the variance ratio and
    alpha' for the noncentrality intervals. Since sigma^2/s2 lies in
    [tau_l, tau_u], T(J) lies in [S(J)/(s2 tau_u), S(J)/(s2 tau_l)]; the lower
    noncentrality bound inverts the smaller statistic and the upper bound the
    larger one. ``m = inf`` falls back to the known-variance region at level alpha.
    """
    if not (m == math.inf or m >= 1):
        raise InvalidArgument("m must be >= 1")
    if not sigma_hat2 > 0:
        raise InvalidArgument("sigma_hat2 must be positive")
    catalog = catalog or build_catalog(family)
    if m == math.inf:
        return general_region(x, sigma_hat2, family, alpha, catalog)
    _check_x(x, catalog)
    a2, tau_l, tau_u = variance_ratio_bounds(int(m), alpha)
    if catalog.M == 0:
        bounds = SimultaneousBounds(np.zeros(1), np.zeros(1), float("nan"))
    else:
        u = a2 / (2.0 * catalog.M)
        ks, ss = _sum_squares(x, catalog)
        bounds = _bounds_from_stats(ks, ss / (sigma_hat2 * tau_u), ss / (sigma_hat2 * tau_l), u)
    return region_from_bounds(catalog, bounds, alpha)
