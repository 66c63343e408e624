"""Multiscale confidence region for the risk-optimal nested model.

The region keeps candidate ``j`` when every pairwise comparison with another
candidate ``k`` passes a scale-dependent threshold,

    T_jk = sum_{j<i<=k} X_i^2 / ((k - j) s2),
    c_jk = sqrt(6 / |k-j|) (Gamma((k-j)/n) + kappa) + 3 Gamma((k-j)/n)^2 / |k-j|,
    Gamma(t) = sqrt(2 log(e / t)),

and ``kappa`` is a simulated quantile of the penalized multiscale statistic
``dhat`` under the constant-risk signal theta = (+-sigma)_i.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numba as nb
import numpy as np

from .errors import InvalidArgument, ResourceLimit
from .mc import DOMAIN_CRITICAL, map_replicates, substream, upper_quantile
from .seqmodel import SignalSpec, VarianceModel

DEFAULT_C_CONST = 3.0
DEFAULT_MAX_N = 2048
MIN_REPS = 1000


def gamma_penalty(tau2):
    """sqrt(2 log(e / tau2)) for tau2 in (0, 1]; accepts arrays."""
    t = np.asarray(tau2, dtype=float)
    if np.any(t <= 0) or np.any(t > 1 + 1e-12):
        raise InvalidArgument("tau^2 must lie in (0, 1]")
    out = np.sqrt(2.0 * (1.0 - np.log(np.minimum(t, 1.0))))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ScaleContext:
    """Normalizer sqrt(4 ||theta/sigma||^2 + 2n) and prefix sums of 4 (theta_i/sigma)^2 + 2."""

    n: int
    theta_over_sigma_sq_norm: float
    cum: np.ndarray = field(repr=False)

    @classmethod
    def from_snr(cls, theta_over_sigma) -> "ScaleContext":
        r = np.asarray(theta_over_sigma, dtype=float) ** 2
        cum = np.concatenate([[0.0], np.cumsum(4.0 * r + 2.0)])
        return cls(r.size, float(r.sum()), cum)

    @classmethod
    def least_favorable(cls, n: int) -> "ScaleContext":
        return cls.from_snr(np.ones(n))

    @property
    def denom(self) -> float:
        return math.sqrt(4.0 * self.theta_over_sigma_sq_norm + 2.0 * self.n)

    def tau(self, j: int, k: int) -> float:
        """Standard deviation of the difference process at (j, k)."""
        if not (0 <= j < k <= self.n):
            raise InvalidArgument(f"need 0 <= j < k <= n, got ({j}, {k})")
        return math.sqrt(self.cum[k] - self.cum[j]) / math.sqrt(self.cum[self.n])


def tau(ctx: ScaleContext, j: int, k: int) -> float:
    return ctx.tau(j, k)


def c_jkn(n: int, j: int, k: int, kappa: float) -> float:
    """Comparison slack for candidates j and k."""
    if j == k:
        raise InvalidArgument("c_jkn needs j != k")
    if not (0 <= j <= n and 0 <= k <= n):
        raise InvalidArgument("indices must lie in 0..n")
    lag = abs(k - j)
    g = gamma_penalty(lag / n)
    return math.sqrt(6.0 / lag) * (g + kappa) + 3.0 * g * g / lag


def c_by_lag(n: int, kappa: float) -> np.ndarray:
    """c[lag] for lag = 1..n (index 0 unused)."""
    lag = np.arange(1, n + 1, dtype=float)
    g2 = 2.0 * (1.0 - np.log(lag / n))
    out = np.empty(n + 1)
    out[0] = np.nan
    out[1:] = np.sqrt(6.0 / lag) * (np.sqrt(g2) + kappa) + 3.0 * g2 / lag
    return out


# ---------------------------------------------------------------------------
# the multiscale statistic


@nb.njit(cache=True, nogil=True)
def _dhat_general(s, cum, denom, s2, sigma2, c_const):
    n = s.size - 1
    total = cum[n]
    sup_ratio = 0.0
    best = 0.0
    for j in range(n):
        for k in range(j + 1, n + 1):
            lag = k - j
            d = (s[k] - s[j] - 2.0 * lag * (s2 - sigma2)) / (s2 * denom)
            t2 = (cum[k] - cum[j]) / total
            tau_ = math.sqrt(t2)
            g2 = 2.0 * (1.0 - math.log(t2))
            ratio = abs(d) / tau_
            if ratio > sup_ratio:
                sup_ratio = ratio
            v = ratio - math.sqrt(g2) - c_const * g2 / (denom * tau_)
            if v > best:
                best = v
    return sup_ratio, best


@nb.njit(cache=True, nogil=True)
def _dhat_lag(s, shift_unit, scale, inv_tau, pen):
    # inv_tau, pen indexed by lag; valid when tau depends only on k - j
    n = s.size - 1
    best = 0.0
    for lag in range(1, n + 1):
        a = inv_tau[lag] * scale
        b = pen[lag]
        sh = lag * shift_unit
        for j in range(n - lag + 1):
            v = abs(s[j + lag] - s[j] - sh) * a - b
            if v > best:
                best = v
    return best


def dhat_statistic(x, sigma_hat2: float, spec: SignalSpec, c_const: float = DEFAULT_C_CONST):
    """(sup |Dhat|/tau, dhat) for observation ``x`` under the known signal ``spec``.

    Exhaustive over 0 <= j < k <= n using prefix sums.
    """
    x = np.asarray(x, dtype=float)
    if x.size != spec.n:
        raise InvalidArgument("observation and signal lengths differ")
    if sigma_hat2 <= 0:
        raise InvalidArgument("sigma_hat2 must be positive")
    sigma2 = spec.sigma**2
    ctx = ScaleContext.from_snr(spec.snr)
    s = np.concatenate([[0.0], np.cumsum(x**2 - sigma2 - spec.theta**2)])
    sup_ratio, d = _dhat_general(s, ctx.cum, ctx.denom, float(sigma_hat2), sigma2, float(c_const))
    return float(sup_ratio), float(d)


def _lf_penalties(n: int, c_const: float):
    lag = np.arange(0, n + 1, dtype=float)
    lag[0] = 1.0
    tau2 = lag / n
    inv_tau = 1.0 / np.sqrt(tau2)
    g2 = 2.0 * (1.0 - np.log(tau2))
    denom = math.sqrt(6.0 * n)
    pen = np.sqrt(g2) + c_const * g2 / (denom * np.sqrt(tau2))
    return inv_tau, pen, denom


def least_favorable_dhat(n: int, var: VarianceModel, rng: np.random.Generator,
                         c_const: float = DEFAULT_C_CONST, _pen=None) -> float:
    """One draw of dhat under theta = (sigma, ..., sigma), sigma = 1."""
    inv_tau, pen, denom = _pen if _pen is not None else _lf_penalties(n, c_const)
    eps = rng.standard_normal(n)
    s2 = 1.0 if var.known else rng.chisquare(int(var.m)) / var.m
    s = np.empty(n + 1)
    s[0] = 0.0
    np.cumsum((1.0 + eps) ** 2 - 2.0, out=s[1:])
    return float(_dhat_lag(s, 2.0 * (s2 - 1.0), 1.0 / (s2 * denom), inv_tau, pen))


# ---------------------------------------------------------------------------
# critical values


def _m_token(m: float):
    return "inf" if m == math.inf else int(m)


def _m_from_token(tok) -> float:
    if isinstance(tok, str):
        if tok.lower() in ("inf", "infinity"):
            return math.inf
        tok = int(tok)
    return float(tok)


@dataclass(frozen=True)
class CriticalValueTable:
    n: int
    m: float
    c_const: float
    reps: int
    seed: int
    quantiles: dict  # alpha -> kappa

    def key(self) -> tuple:
        return (self.n, _m_token(self.m), float(self.c_const), self.reps, self.seed)

    def kappa(self, alpha: float) -> float:
        for a, k in self.quantiles.items():
            if abs(a - alpha) <= 1e-12:
                return k
        raise InvalidArgument(f"alpha={alpha} not in critical value table (have {sorted(self.quantiles)})")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": _m_token(self.m),
            "c_const": float(self.c_const),
            "reps": self.reps,
            "seed": self.seed,
            "entries": [{"alpha": a, "kappa": self.quantiles[a]} for a in sorted(self.quantiles)],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CriticalValueTable":
        try:
            q = {float(e["alpha"]): float(e["kappa"]) for e in d["entries"]}
            return cls(int(d["n"]), _m_from_token(d["m"]), float(d["c_const"]), int(d["reps"]),
                       int(d["seed"]), q)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgument(f"malformed critical value table: {exc}") from exc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "CriticalValueTable":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise InvalidArgument(f"{path}: not a valid table file ({exc})") from exc


def simulate_least_favorable_dhat(n: int, var: VarianceModel, reps: int, seed: int,
                                  c_const: float = DEFAULT_C_CONST, threads: int = 1,
                                  max_n: int = DEFAULT_MAX_N) -> np.ndarray:
    """dhat draws under the constant-risk signal, in replicate order."""
    if n < 1:
        raise InvalidArgument("n must be >= 1")
    if n > max_n:
        raise ResourceLimit(f"n={n} exceeds the pair-enumeration cap {max_n}")
    pen = _lf_penalties(n, float(c_const))

    def one(r: int) -> float:
        return least_favorable_dhat(n, var, substream(seed, r, DOMAIN_CRITICAL), c_const, pen)

    return np.array(map_replicates(one, reps, threads))


def critical_values(n: int, var: VarianceModel, alphas: Sequence[float], reps: int, seed: int,
                    c_const: float = DEFAULT_C_CONST, threads: int = 1,
                    max_n: int = DEFAULT_MAX_N) -> CriticalValueTable:
    """Monte-Carlo (1-alpha)-quantiles kappa_{n,alpha} of dhat under theta*."""
    if reps < MIN_REPS:
        raise InvalidArgument(f"reps must be >= {MIN_REPS}, got {reps}")
    alphas = [float(a) for a in alphas]
    if not alphas or any(not 0 < a < 1 for a in alphas):
        raise InvalidArgument("alphas must be a nonempty list in (0, 1)")
    draws = simulate_least_favorable_dhat(n, var, reps, seed, c_const, threads, max_n)
    kap = upper_quantile(draws, alphas)
    return CriticalValueTable(n, var.m, float(c_const), reps, seed,
                              {a: float(k) for a, k in zip(alphas, kap)})


# ---------------------------------------------------------------------------
# region


@dataclass(frozen=True)
class NestedRegion:
    retained: list
    alpha: float
    n: int
    kappa: float
    worst_slack: np.ndarray = field(repr=False)  # per j, in T units
    worst_partner: np.ndarray = field(repr=False)

    def __contains__(self, j) -> bool:
        return j in set(self.retained)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "n": self.n,
            "kappa": self.kappa,
            "retained": [int(j) for j in self.retained],
            "diagnostics": [
                {"j": j, "worst_k": int(self.worst_partner[j]), "slack": float(self.worst_slack[j])}
                for j in range(self.n + 1)
            ],
        }


@nb.njit(cache=True, nogil=True)
def _region_scan(p, s2, c):
    n = p.size - 1
    slack = np.empty(n + 1)
    partner = np.empty(n + 1, dtype=np.int64)
    for j in range(n + 1):
        w = np.inf
        wk = -1
        for i in range(j):
            lag = j - i
            v = (p[j] - p[i]) / (lag * s2) - (2.0 - c[lag])
            if v < w:
                w = v
                wk = i
        for k in range(j + 1, n + 1):
            lag = k - j
            v = (2.0 + c[lag]) - (p[k] - p[j]) / (lag * s2)
            if v < w:
                w = v
                wk = k
        slack[j] = w
        partner[j] = wk
    return slack, partner


def nested_region_kappa(x, sigma_hat2: float, kappa: float, alpha: float = float("nan"),
                        max_n: int = DEFAULT_MAX_N) -> NestedRegion:
    """Region for a given critical value ``kappa``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 1:
        raise InvalidArgument("empty observation")
    if n > max_n:
        raise ResourceLimit(f"n={n} exceeds the pair-enumeration cap {max_n}")
    if not sigma_hat2 > 0:
        raise InvalidArgument("sigma_hat2 must be positive")
    p = np.concatenate([[0.0], np.cumsum(x**2)])
    slack, partner = _region_scan(p, float(sigma_hat2), c_by_lag(n, float(kappa)))
    retained = [int(j) for j in np.flatnonzero(slack >= 0.0)]
    return NestedRegion(retained, alpha, n, float(kappa), slack, partner)


def nested_region(x, sigma_hat2: float, table: CriticalValueTable, alpha: float,
                  m: float | None = None, max_n: int = DEFAULT_MAX_N) -> NestedRegion:
    """Confidence region for the set of risk-minimizing nested candidates."""
    x = np.asarray(x, dtype=float)
    if table.n != x.size:
        raise InvalidArgument(f"table built for n={table.n}, observation has n={x.size}")
    if m is not None and float(m) != float(table.m):
        raise InvalidArgument(f"table built for m={_m_token(table.m)}, data use m={_m_token(m)}")
    return nested_region_kappa(x, sigma_hat2, table.kappa(alpha), alpha, max_n)
