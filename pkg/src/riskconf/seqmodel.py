"""Gaussian sequence model X = theta + sigma * eps: signals, variance models,
observations, risks, losses, estimated risks and candidate families.

Candidate indices are 1-based, as in {1, ..., n}. The nested candidate ``k``
keeps coordinates 1..k; ``k = 0`` is the empty model.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgument
from .mc import DOMAIN_OBSERVATION, substream

Candidate = int | tuple[int, ...]


@dataclass(frozen=True)
class SignalSpec:
    theta: np.ndarray
    sigma: float = 1.0

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        if theta.size < 1:
            raise InvalidArgument("signal must have at least one coordinate")
        if not np.all(np.isfinite(theta)):
            raise InvalidArgument("signal entries must be finite")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise InvalidArgument(f"sigma must be positive, got {self.sigma}")
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "sigma", float(self.sigma))

    @property
    def n(self) -> int:
        return self.theta.size

    @property
    def snr(self) -> np.ndarray:
        """theta / sigma."""
        return self.theta / self.sigma

    # presets -------------------------------------------------------------

    @classmethod
    def least_favorable(cls, n: int, sigma: float = 1.0, signs: Sequence[int] | None = None):
        """theta* = (+-sigma)_i: every nested candidate has risk n * sigma^2."""
        s = np.ones(n) if signs is None else np.sign(np.asarray(signs, dtype=float))
        if s.size != n or np.any(s == 0):
            raise InvalidArgument("signs must be n nonzero values")
        return cls(sigma * s, sigma)

    @classmethod
    def zero(cls, n: int, sigma: float = 1.0):
        return cls(np.zeros(n), sigma)

    @classmethod
    def spike(cls, n: int, sigma: float = 1.0, head: Sequence[float] = (2.0, 1.0, 0.5)):
        """Leading coordinates ``head`` (in units of sigma), zeros after."""
        theta = np.zeros(n)
        h = np.asarray(head, dtype=float)[:n]
        theta[: h.size] = h * sigma
        return cls(theta, sigma)

    @classmethod
    def polynomial_decay(cls, n: int, amplitude: float, exponent: float, sigma: float = 1.0):
        """theta_i = sigma * amplitude * i^(-exponent)."""
        i = np.arange(1, n + 1, dtype=float)
        return cls(sigma * amplitude * i ** (-exponent), sigma)


@dataclass(frozen=True)
class VarianceModel:
    """Known sigma (``m = inf``) or an independent estimate with m * s2 / sigma^2 ~ chi2_m."""

    m: float = math.inf

    def __post_init__(self):
        m = self.m
        if not (m == math.inf or (float(m).is_integer() and m >= 1)):
            raise InvalidArgument(f"m must be a positive integer or inf, got {m}")

    @property
    def known(self) -> bool:
        return self.m == math.inf

    def beta2_for(self, n: int) -> float:
        """beta_n^2 = 2n / m."""
        return 0.0 if self.known else 2.0 * n / self.m

    def draw(self, sigma: float, rng: np.random.Generator) -> float:
        if self.known:
            return sigma * sigma
        return sigma * sigma * rng.chisquare(int(self.m)) / self.m


@dataclass(frozen=True)
class Observation:
    x: np.ndarray
    sigma_hat2: float
    rng_tag: tuple = field(default=())

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        if not np.all(np.isfinite(x)):
            raise InvalidArgument("observation entries must be finite")
        if not self.sigma_hat2 > 0:
            raise InvalidArgument("sigma_hat2 must be positive")
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.x.size


def simulate_observation(spec: SignalSpec, var: VarianceModel, seed: int, index: int = 0,
                         rng: np.random.Generator | None = None) -> Observation:
    """One draw of (X, sigma_hat2), determined by (seed, index) unless ``rng`` is given."""
    if rng is None:
        rng = substream(seed, index, DOMAIN_OBSERVATION)
        tag = (seed, index)
    else:
        tag = ()
    x = spec.theta + spec.sigma * rng.standard_normal(spec.n)
    s2 = var.draw(spec.sigma, rng)
    return Observation(x, s2, tag)


# ---------------------------------------------------------------------------
# nested candidates


def _check_k(k: int, n: int) -> None:
    if not (0 <= k <= n) or int(k) != k:
        raise InvalidArgument(f"candidate k must lie in 0..{n}, got {k}")


def _tail_sums(v: np.ndarray) -> np.ndarray:
    """out[k] = sum_{i > k} v_i (1-based i), k = 0..n."""
    out = np.zeros(v.size + 1)
    out[:-1] = np.cumsum(v[::-1])[::-1]
    return out


def risks_nested(spec: SignalSpec) -> np.ndarray:
    """R_n(k) for k = 0..n."""
    return spec.sigma**2 * normalized_risks_nested(spec)


def normalized_risks_nested(spec: SignalSpec) -> np.ndarray:
    """R_n(k) / sigma^2; exact ties for theta = +-sigma."""
    r = spec.snr**2
    return _tail_sums(r) + np.arange(spec.n + 1)


def risk_nested(spec: SignalSpec, k: int) -> float:
    _check_k(k, spec.n)
    return float(risks_nested(spec)[k])


def losses_nested(spec: SignalSpec, obs: Observation) -> np.ndarray:
    """L_n(k) for k = 0..n."""
    bias = _tail_sums(spec.theta**2)
    err = np.concatenate([[0.0], np.cumsum((obs.x - spec.theta) ** 2)])
    return bias + err


def loss_nested(spec: SignalSpec, obs: Observation, k: int) -> float:
    _check_k(k, spec.n)
    return float(losses_nested(spec, obs)[k])


def estimated_risks_nested(x: np.ndarray, sigma_hat2: float) -> np.ndarray:
    """Bias-corrected estimates sum_{i>k} (X_i^2 - s2) + k s2 for k = 0..n."""
    x = np.asarray(x, dtype=float)
    return _tail_sums(x**2 - sigma_hat2) + np.arange(x.size + 1) * sigma_hat2


def estimated_risk_nested(obs: Observation, k: int) -> float:
    _check_k(k, obs.n)
    return float(estimated_risks_nested(obs.x, obs.sigma_hat2)[k])


# ---------------------------------------------------------------------------
# candidate families


@dataclass(frozen=True)
class CandidateFamily:
    """Nested prefix models 0..n, or an explicit list of index sets."""

    n: int
    sets: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument("n must be >= 1")
        if self.sets is not None:
            seen: dict[tuple[int, ...], None] = {}
            for s in self.sets:
                c = tuple(sorted({int(i) for i in s}))
                if c and (c[0] < 1 or c[-1] > self.n):
                    raise InvalidArgument(f"index set {list(s)} has indices outside 1..{self.n}")
                seen.setdefault(c)
            if not seen:
                raise InvalidArgument("candidate family is empty")
            object.__setattr__(self, "sets", tuple(seen))

    @classmethod
    def nested(cls, n: int) -> "CandidateFamily":
        return cls(n)

    @classmethod
    def explicit(cls, n: int, sets: Iterable[Iterable[int]]) -> "CandidateFamily":
        return cls(n, tuple(tuple(s) for s in sets))

    @classmethod
    def prefixes(cls, n: int) -> "CandidateFamily":
        """The nested family written out as explicit index sets."""
        return cls.explicit(n, [tuple(range(1, k + 1)) for k in range(n + 1)])

    @classmethod
    def random(cls, n: int, size: int, rng: np.random.Generator, p: float = 0.5) -> "CandidateFamily":
        """``size`` distinct random subsets; each index included with probability p."""
        if size > 2**n:
            raise InvalidArgument("more sets requested than exist")
        sets: dict[tuple[int, ...], None] = {}
        while len(sets) < size:
            mask = rng.random(n) < p
            sets.setdefault(tuple(int(i) + 1 for i in np.flatnonzero(mask)))
        return cls.explicit(n, list(sets))

    @property
    def is_nested(self) -> bool:
        return self.sets is None

    def members(self) -> list[Candidate]:
        if self.sets is None:
            return list(range(self.n + 1))
        return list(self.sets)

    def __len__(self) -> int:
        return self.n + 1 if self.sets is None else len(self.sets)


def risk_general(spec: SignalSpec, c: Iterable[int]) -> float:
    """R_n(C) = sum_{i not in C} theta_i^2 + |C| sigma^2."""
    return spec.sigma**2 * _normalized_risk_general(spec, c)


def _normalized_risk_general(spec: SignalSpec, c: Iterable[int]) -> float:
    idx = np.fromiter((int(i) - 1 for i in c), dtype=int)
    if idx.size and (idx.min() < 0 or idx.max() >= spec.n):
        raise InvalidArgument("index set outside 1..n")
    mask = np.ones(spec.n, dtype=bool)
    mask[idx] = False
    r = spec.snr**2
    return float(np.sum(r[mask]) + idx.size)


def loss_general(spec: SignalSpec, obs: Observation, c: Iterable[int]) -> float:
    idx = np.fromiter((int(i) - 1 for i in c), dtype=int)
    mask = np.zeros(spec.n, dtype=bool)
    mask[idx] = True
    return float(np.sum(spec.theta[~mask] ** 2) + np.sum((obs.x[mask] - spec.theta[mask]) ** 2))


def family_risks(spec: SignalSpec, family: CandidateFamily) -> np.ndarray:
    """Risks aligned with ``family.members()``."""
    if family.n != spec.n:
        raise InvalidArgument("family and signal dimensions differ")
    if family.is_nested:
        return risks_nested(spec)
    return np.array([risk_general(spec, c) for c in family.members()])


def optimal_set(spec: SignalSpec, family: CandidateFamily) -> list[Candidate]:
    """K_n(theta): all candidates attaining the minimal risk (exact comparison)."""
    if family.n != spec.n:
        raise InvalidArgument("family and signal dimensions differ")
    if family.is_nested:
        r = normalized_risks_nested(spec)
        return [int(k) for k in np.flatnonzero(r == r.min())]
    members = family.members()
    r = np.array([_normalized_risk_general(spec, c) for c in members])
    return [members[i] for i in np.flatnonzero(r == r.min())]
