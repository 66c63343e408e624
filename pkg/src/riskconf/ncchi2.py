"""Noncentral chi-square distribution: CDF, quantiles, tail bounds, and
inversion in the noncentrality parameter.

The CDF uses the Poisson mixture

    F_k(x | d2) = sum_j Pois(j; d2/2) * P(k/2 + j, x/2)

with ``P`` the regularized lower incomplete gamma function. Summation starts
at the Poisson mode and walks outward. Along the walk the incomplete gamma
values follow the exact recurrence

    P(a + 1, y) = P(a, y) - y**a exp(-y) / Gamma(a + 1),

applied downward to ``P`` and upward to ``Q = 1 - P``; both directions only
ever add positive terms, so there is no cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import InvalidArgument, NumericFailure

SERIES_TOL = 1e-13
MAX_TERMS = 1_000_000
GAMMAINC_MAX_ITER = 1_000_000
QUANTILE_TOL = 1e-10
INVERSION_TOL = 1e-9

_TINY = 1e-300
_EPS = 2.220446049250313e-16


# ---------------------------------------------------------------------------
# kernels


@nb.njit(cache=True, nogil=True)
def _gammainc_pq(a, y):
    """(P(a, y), Q(a, y)); NaNs when the iteration cap is hit."""
    if y <= 0.0:
        return 0.0, 1.0
    logpref = -y + a * math.log(y) - math.lgamma(a)
    if y < a + 1.0:
        ap = a
        term = 1.0 / a
        s = term
        for _ in range(GAMMAINC_MAX_ITER):
            ap += 1.0
            term *= y / ap
            s += term
            if term < s * _EPS:
                p = s * math.exp(logpref)
                if p > 1.0:
                    p = 1.0
                return p, 1.0 - p
        return np.nan, np.nan
    # modified Lentz continued fraction for Q
    b = y + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, GAMMAINC_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            q = math.exp(logpref) * h
            if q > 1.0:
                q = 1.0
            return 1.0 - q, q
    return np.nan, np.nan


@nb.njit(cache=True, nogil=True)
def _pois_term(a, y, logy):
    # y**a exp(-y) / Gamma(a + 1)
    return math.exp(-y + a * logy - math.lgamma(a + 1.0))


@nb.njit(cache=True, nogil=True)
def _ncx2_cdf(k, d2, x):
    if x <= 0.0:
        return 0.0
    y = 0.5 * x
    half_k = 0.5 * k
    lam = 0.5 * d2
    if lam == 0.0:
        # also catches subnormal d2 that halves to zero
        p, _ = _gammainc_pq(half_k, y)
        return p
    j0 = math.floor(lam)
    a0 = half_k + j0
    p0, q0 = _gammainc_pq(a0, y)
    if p0 != p0:
        return np.nan
    logy = math.log(y)
    w0 = math.exp(-lam + j0 * math.log(lam) - math.lgamma(j0 + 1.0))
    tol = 0.5 * SERIES_TOL
    total_w = w0
    acc = w0 * p0
    n_terms = 1

    # downward: j = j0-1, ..., 0 ; P(a) = P(a+1) + g(a)
    p = p0
    w = w0
    j = j0
    g = _pois_term(a0 - 1.0, y, logy) if j0 > 0 else 0.0
    exact_g = g < 1e-280
    while j > 0:
        a = half_k + j - 1.0
        if exact_g:
            g = _pois_term(a, y, logy)
        p += g
        if p > 1.0:
            p = 1.0
        w *= j / lam
        j -= 1
        total_w += w
        acc += w * p
        n_terms += 1
        if j == 0 or w * j / (lam - j) < tol:
            break
        if n_terms > MAX_TERMS:
            return np.nan
        if not exact_g:
            # g(a - 1) = g(a) * a / y
            g *= a / y
            if g > 1e280:
                exact_g = True

    # upward: j = j0+1, ... ; Q(a) = Q(a-1) + g(a-1)
    q = q0
    w = w0
    j = j0
    a_prev = a0
    g = _pois_term(a_prev, y, logy)
    exact_g = g < 1e-280
    while True:
        if exact_g:
            g = _pois_term(a_prev, y, logy)
        q += g
        if q > 1.0:
            q = 1.0
        w *= lam / (j + 1.0)
        j += 1
        total_w += w
        acc += w * (1.0 - q)
        n_terms += 1
        r = lam / (j + 1.0)
        if w * r / (1.0 - r) < tol:
            break
        if n_terms > MAX_TERMS:
            return np.nan
        if not exact_g:
            # g(a) = g(a - 1) * y / a
            g *= y / (a_prev + 1.0)
        a_prev += 1.0
    out = acc / total_w
    if out < 0.0:
        out = 0.0
    elif out > 1.0:
        out = 1.0
    return out


@nb.njit(cache=True, nogil=True)
def _signed_gap(f, target, upper):
    """Log-scale distance of F from the target tail level, signed like F - target.

    The interpolation runs on this scale because the tail probability is
    close to exponential in d2; bracket decisions still use the raw sign.
    """
    if upper:
        raw = f - target
        tail = f
        tail_target = target
    else:
        raw = f - target
        tail = 1.0 - f
        tail_target = 1.0 - target
    if tail < _TINY:
        tail = _TINY
    h = abs(math.log(tail) - math.log(tail_target))
    if h == 0.0:
        h = _EPS
    return h if raw > 0.0 else -h


@nb.njit(cache=True, nogil=True)
def _invert(k, t, u, upper):
    """Root of F_k(t | d2) = target on d2 >= 0, kept inside a sign bracket.

    lower: target 1-u, result is the smallest d2 with F <= target.
    upper: target u,   result is the largest d2 with F >= target.
    Bracketed false position (Illinois) with bisection safeguard.
    """
    target = u if upper else 1.0 - u
    f0 = _ncx2_cdf(k, 0.0, t)
    if f0 != f0:
        return np.nan
    if upper:
        if f0 < target:
            return 0.0
    else:
        if f0 <= target:
            return 0.0
    # initial bracket from the confidence-bound inequalities
    dh = t - k if t > k else 0.0
    lu = math.log(1.0 / u)
    spread = math.sqrt((4.0 * k + 8.0 * dh) * lu)
    lo = dh - spread
    if lo < 0.0:
        lo = 0.0
    hi = dh + spread + 8.0 * lu
    # g(d2) decreasing with the sign of F(t | d2) - target; want g(lo) > 0 >= g(hi)
    glo = _signed_gap(_ncx2_cdf(k, lo, t) if lo > 0.0 else f0, target, upper)
    while glo <= 0.0 and lo > 0.0:
        lo = 0.5 * lo if lo > 1e-6 else 0.0
        glo = _signed_gap(_ncx2_cdf(k, lo, t), target, upper)
    fhi = _ncx2_cdf(k, hi, t)
    ghi = _signed_gap(fhi, target, upper)
    it = 0
    while ghi > 0.0:
        lo = hi
        glo = ghi
        hi = 2.0 * hi + 1.0
        fhi = _ncx2_cdf(k, hi, t)
        if fhi != fhi:
            return np.nan
        ghi = _signed_gap(fhi, target, upper)
        it += 1
        if it > 200:
            return np.nan
    side = 0
    half = 0.5 * INVERSION_TOL
    width_ref = hi - lo
    for it in range(400):
        width = hi - lo
        if width <= INVERSION_TOL:
            break
        if it % 3 == 2:
            # safeguard: three false-position steps must at least halve the bracket
            use_bisect = width > 0.5 * width_ref
            width_ref = width
        else:
            use_bisect = False
        if use_bisect:
            c = 0.5 * (lo + hi)
            side = 0
        else:
            c = hi - ghi * width / (ghi - glo)
            if not (c == c):
                c = 0.5 * (lo + hi)
            # stay at least tol/2 inside so the bracket can collapse
            if c < lo + half:
                c = lo + half
            elif c > hi - half:
                c = hi - half
        fc = _ncx2_cdf(k, c, t)
        if fc != fc:
            return np.nan
        gc = _signed_gap(fc, target, upper)
        if gc > 0.0:
            lo = c
            glo = gc
            if side == -1:
                ghi *= 0.5
            side = -1
        else:
            hi = c
            ghi = gc
            if side == 1:
                glo *= 0.5
            side = 1
    # lower: hi satisfies F <= 1-u ; upper: lo satisfies F >= u
    return lo if upper else hi


@nb.njit(cache=True, nogil=True)
def _invert_batch(ks, ts, u, upper, out):
    for i in range(ks.shape[0]):
        out[i] = _invert(ks[i], ts[i], u, upper)


@nb.njit(cache=True, nogil=True)
def _cdf_batch(ks, d2s, xs, out):
    for i in range(ks.shape[0]):
        out[i] = _ncx2_cdf(ks[i], d2s[i], xs[i])


# ---------------------------------------------------------------------------
# public API


@dataclass(frozen=True)
class NcChi2Params:
    """Degrees of freedom ``k`` and noncentrality ``delta2`` of chi2_k(delta2)."""

    k: int
    delta2: float = 0.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise InvalidArgument(f"degrees of freedom must be a positive integer, got {self.k}")
        if not math.isfinite(self.delta2) or self.delta2 < 0:
            raise InvalidArgument(f"noncentrality must be finite and >= 0, got {self.delta2}")

    @property
    def mean(self) -> float:
        return self.k + self.delta2

    @property
    def variance(self) -> float:
        return 2.0 * self.k + 4.0 * self.delta2


def _check_u(u: float, upper_half: bool = True) -> None:
    hi = 0.5 if upper_half else 1.0
    if not (0.0 < u < hi):
        raise InvalidArgument(f"probability must lie in (0, {hi}), got {u}")


def cdf(params: NcChi2Params, x: float) -> float:
    """F_k(x | delta2)."""
    if not math.isfinite(x):
        raise InvalidArgument(f"x must be finite, got {x}")
    out = _ncx2_cdf(float(params.k), float(params.delta2), float(x))
    if math.isnan(out):
        raise NumericFailure(f"series did not converge for k={params.k}, delta2={params.delta2}, x={x}")
    return out


def cdf_array(k, delta2, x) -> np.ndarray:
    """Vectorized CDF with numpy broadcasting over ``k``, ``delta2``, ``x``."""
    kb, db, xb = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(delta2, dtype=float),
                                     np.asarray(x, dtype=float))
    if not (np.all(np.isfinite(db)) and np.all(np.isfinite(xb))):
        raise InvalidArgument("delta2 and x must be finite")
    if np.any(kb < 1) or np.any(db < 0):
        raise InvalidArgument("need k >= 1 and delta2 >= 0")
    out = np.empty(kb.size)
    _cdf_batch(kb.ravel().copy(), db.ravel().copy(), xb.ravel().copy(), out)
    if np.isnan(out).any():
        raise NumericFailure("series did not converge")
    return out.reshape(kb.shape)


def quantile_bounds(k: int, delta2: float, u: float) -> tuple[float, float]:
    """Lower bound on the u-quantile and upper bound on the (1-u)-quantile, u in (0, 1/2]."""
    if not (0.0 < u <= 0.5):
        raise InvalidArgument(f"u must lie in (0, 1/2], got {u}")
    lu = math.log(1.0 / u)
    m = k + delta2
    spread = math.sqrt((4.0 * k + 8.0 * delta2) * lu)
    return m - spread, m + spread + 4.0 * lu


def quantile(params: NcChi2Params, p: float) -> float:
    """Smallest-error x with F_k(x | delta2) = p, by bisection."""
    if not (0.0 < p < 1.0):
        raise InvalidArgument(f"p must lie in (0, 1), got {p}")
    k, d2 = float(params.k), float(params.delta2)
    lo, hi = quantile_bounds(params.k, params.delta2, min(p, 1.0 - p))
    lo = max(lo, 0.0)
    # bounds are guaranteed, but widen defensively
    while lo > 0.0 and _ncx2_cdf(k, d2, lo) > p:
        lo *= 0.5
    while _ncx2_cdf(k, d2, hi) < p:
        hi = 2.0 * hi + 1.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        fm = _ncx2_cdf(k, d2, mid)
        if math.isnan(fm):
            raise NumericFailure("cdf failed inside quantile search")
        if fm < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= QUANTILE_TOL and abs(fm - p) <= QUANTILE_TOL:
            break
        if hi - lo <= 4.0 * _EPS * hi:
            break
    return 0.5 * (lo + hi)


def invert_noncentrality_lower(k: int, t: float, u: float) -> float:
    """min{d2 >= 0 : F_k(t | d2) <= 1 - u}."""
    _check_u(u)
    if k < 1 or t < 0 or not math.isfinite(t):
        raise InvalidArgument("need k >= 1 and finite t >= 0")
    out = _invert(float(k), float(t), float(u), False)
    if math.isnan(out):
        raise NumericFailure(f"noncentrality inversion failed for k={k}, t={t}, u={u}")
    return out


def invert_noncentrality_upper(k: int, t: float, u: float) -> float:
    """max{d2 >= 0 : F_k(t | d2) >= u}, clamped to 0 when the set is empty."""
    _check_u(u)
    if k < 1 or t < 0 or not math.isfinite(t):
        raise InvalidArgument("need k >= 1 and finite t >= 0")
    out = _invert(float(k), float(t), float(u), True)
    if math.isnan(out):
        raise NumericFailure(f"noncentrality inversion failed for k={k}, t={t}, u={u}")
    return out


def invert_noncentrality_batch(ks: np.ndarray, ts: np.ndarray, u: float, upper: bool) -> np.ndarray:
    """Array version of the two inversions; ``ks`` and ``ts`` of equal length."""
    _check_u(u)
    ks = np.ascontiguousarray(ks, dtype=float)
    ts = np.ascontiguousarray(ts, dtype=float)
    out = np.empty(ks.shape[0])
    _invert_batch(ks, ts, float(u), bool(upper), out)
    if np.isnan(out).any():
        raise NumericFailure("noncentrality inversion failed")
    return out


def noncentrality_bounds(k: int, delta_hat2: float, u: float) -> tuple[float, float]:
    """Range for d2 - delta_hat2 implied by u <= F_k(k + delta_hat2 | d2) <= 1 - u."""
    _check_u(u)
    lu = math.log(1.0 / u)
    spread = math.sqrt((4.0 * k + 8.0 * delta_hat2) * lu)
    return -spread, spread + 8.0 * lu


def cdf_bounds(k: int, delta2: float, r: float) -> tuple[float, float]:
    """(lower bound on F(k+d2+r), upper bound on F(k+d2-r)) for r >= 0."""
    if r < 0 or not math.isfinite(r):
        raise InvalidArgument(f"r must be finite and >= 0, got {r}")
    lower = 1.0 - math.exp(-r * r / (4.0 * k + 8.0 * delta2 + 4.0 * r))
    upper = math.exp(-r * r / (4.0 * k + 8.0 * delta2))
    return lower, upper


@dataclass(frozen=True)
class TailBoundInput:
    """Coefficients of sum_i lambda_i ((Z_i + delta_i)^2 - (1 + delta_i^2)) and threshold eta."""

    lambdas: tuple[float, ...]
    deltas: tuple[float, ...]
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "deltas", tuple(float(v) for v in self.deltas))
        if len(self.lambdas) != len(self.deltas) or not self.lambdas:
            raise InvalidArgument("lambdas and deltas must be nonempty and of equal length")
        if self.eta < 0:
            raise InvalidArgument("eta must be nonnegative")

    @property
    def gamma(self) -> float:
        """Standard deviation of the quadratic form."""
        lam = np.asarray(self.lambdas)
        dl = np.asarray(self.deltas)
        return float(np.sqrt(np.sum(lam**2 * (2.0 + 4.0 * dl**2))))

    @property
    def lambda_max(self) -> float:
        return max(max(self.lambdas), 0.0)


def quadratic_tail_bound(inp: TailBoundInput) -> float:
    """Upper bound on P(sum lambda_i((Z_i+delta_i)^2 - 1 - delta_i^2) >= eta * gamma)."""
    g = inp.gamma
    if g == 0.0:
        raise InvalidArgument("all lambdas are zero")
    return math.exp(-inp.eta**2 / (2.0 + 4.0 * inp.eta * inp.lambda_max / g))


def loose_tail_bound(eta: float) -> float:
    """Coefficient-free relaxation e^{1/4} exp(-eta / sqrt(8))."""
    if eta < 0:
        raise InvalidArgument("eta must be nonnegative")
    return math.exp(0.25) * math.exp(-eta / math.sqrt(8.0))
