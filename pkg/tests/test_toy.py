import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from riskconf import toy
from riskconf.errors import InvalidArgument, ResourceLimit
from riskconf.mc import binomial_se, upper_quantile


def brute_multiscale_set(path, kappa):
    g, y = path.grid, path.y
    keep = []
    for s in range(path.N):
        ok = all(y[s] <= y[t] + math.sqrt(abs(g[s] - g[t])) * (math.sqrt(2 * math.log(math.e / abs(g[s] - g[t]))) + kappa)
                 for t in range(path.N) if t != s)
        keep.append(ok)
    return np.array(keep)


def test_zero_drift_starts_at_origin():
    path = toy.simulate_path(toy.Drift(), 50, np.random.default_rng(0))
    assert path.y[0] == 0.0 and np.all(path.f == 0)
    assert path.grid[0] == 0.0 and path.grid[-1] == 1.0


def test_endpoint_variance_is_one():
    rng = np.random.default_rng(1)
    reps = 100_000
    ends = np.array([toy.brownian(33, rng)[-1] for _ in range(reps)])
    # Var of the sample variance of a normal is 2/(reps-1)
    assert abs(ends.var(ddof=1) - 1.0) <= 4 * math.sqrt(2 / (reps - 1))


def test_kink_drift_values():
    d = toy.Drift("kink", 8.0, 0.5, 1.0)
    assert d(np.array([0.0, 0.5, 0.75])) == pytest.approx([4.0, 0.0, 2.0])


def test_two_well_has_tied_minima():
    grid = np.linspace(0, 1, 101)
    assert np.flatnonzero(toy.Drift("two_well", 3.0).minimizers(grid)).tolist() == [25, 75]


def test_unknown_drift_and_tiny_grid():
    with pytest.raises(InvalidArgument):
        toy.Drift("wiggle")
    with pytest.raises(InvalidArgument):
        toy.simulate_path(toy.Drift(), 1, np.random.default_rng(0))


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 60), st.integers(0, 2**31))
def test_sup_dominates_endpoint_pair(N, seed):
    w = toy.brownian(N, np.random.default_rng(seed))
    assert toy.multiscale_statistic(w) >= abs(w[-1] - w[0]) - math.sqrt(2) - 1e-12


def test_statistic_matches_pair_loop():
    w = toy.brownian(40, np.random.default_rng(4))
    h = 1 / 39
    want = max(abs(w[t] - w[s]) / math.sqrt((t - s) * h) - math.sqrt(2 * math.log(math.e / ((t - s) * h)))
               for s in range(40) for t in range(s + 1, 40))
    assert toy.multiscale_statistic(w) == pytest.approx(want, rel=1e-12)


class TestKappa:
    def test_nonnegative_and_monotone(self):
        alphas = [0.01, 0.05, 0.1, 0.2, 0.5]
        kn = toy.kappa_naive(65, 2000, alphas, seed=2)
        km = toy.kappa_multiscale(65, 2000, alphas, seed=2)
        assert np.all(np.asarray(kn) >= 0)
        assert np.all(np.diff(kn) <= 0) and np.all(np.diff(km) <= 0)
        assert km[1] > 0 and km[2] > 0

    def test_two_seed_stability(self):
        N, reps = 65, 100_000
        a = toy.simulate_toy_statistics(N, reps, seed=1)
        b = toy.simulate_toy_statistics(N, reps, seed=2)
        for sa, sb in zip(a, b):
            assert abs(upper_quantile(sa, 0.1) - upper_quantile(sb, 0.1)) <= 0.03

    def test_size_cap(self):
        with pytest.raises(ResourceLimit):
            toy.kappa_multiscale(2049, 1000, 0.1, seed=0)

    def test_thread_independence(self):
        a = toy.simulate_toy_statistics(40, 500, seed=3, threads=1)
        b = toy.simulate_toy_statistics(40, 500, seed=3, threads=4)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


class TestSets:
    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 40), st.integers(0, 2**31), st.floats(0, 3), st.sampled_from(["zero", "kink", "two_well"]))
    def test_argmin_in_both_sets(self, N, seed, kappa, kind):
        path = toy.simulate_path(toy.Drift(kind, 5.0), N, np.random.default_rng(seed))
        i = int(np.argmin(path.y))
        assert toy.confset_naive(path, kappa)[i] and toy.confset_multiscale(path, kappa)[i]

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 30), st.integers(0, 2**31), st.floats(-1, 3))
    def test_multiscale_set_matches_pair_loop(self, N, seed, kappa):
        path = toy.simulate_path(toy.Drift("kink", 4.0), N, np.random.default_rng(seed))
        assert np.array_equal(toy.confset_multiscale(path, kappa), brute_multiscale_set(path, kappa))

    @settings(max_examples=40, deadline=None)
    @given(st.integers(2, 40), st.integers(0, 2**31), st.floats(0, 3), st.floats(0, 3))
    def test_sets_shrink_with_kappa(self, N, seed, k1, k2):
        path = toy.simulate_path(toy.Drift("kink", 3.0), N, np.random.default_rng(seed))
        lo, hi = sorted((k1, k2))
        for f in (toy.confset_naive, toy.confset_multiscale):
            assert np.all(f(path, lo) <= f(path, hi))

    @pytest.mark.parametrize("kind", ["zero", "two_well", "kink"])
    def test_coverage_of_drift_minimizers(self, kind):
        N, reps, alpha = 65, 2000, 0.1
        drift = toy.Drift(kind, 10.0)
        kn = toy.kappa_naive(N, 4000, alpha, seed=11)
        km = toy.kappa_multiscale(N, 4000, alpha, seed=11)
        rng = np.random.default_rng(12)
        target = drift.minimizers(np.linspace(0, 1, N))
        hits_naive = hits_multi = 0
        for _ in range(reps):
            path = toy.simulate_path(drift, N, rng)
            hits_naive += bool(np.all(toy.confset_naive(path, kn)[target]))
            hits_multi += bool(np.all(toy.confset_multiscale(path, km)[target]))
        floor = 1 - alpha - 3 * binomial_se(1 - alpha, reps)
        assert hits_naive / reps >= floor and hits_multi / reps >= floor


def test_rate_rows_and_slopes_small_run():
    rows, kn, km = toy.rate_experiment([4, 8, 16, 32], 257, 40, 0.1, seed=5, kappa_reps=1000)
    assert [r.c for r in rows] == [4.0, 8.0, 16.0, 32.0]
    naive = [r.naive_dist for r in rows]
    assert all(a >= b for a, b in zip(naive, naive[1:]))
    sn, sm = toy.rate_slopes(rows)
    assert sm < sn < 0
    assert toy.rates_csv(rows).splitlines()[0] == "c_n,naive_dist,multi_dist"


def test_collapsed_set_rejected_by_slope_fit():
    rows = [toy.RateRow(8.0, 0.3, 0.1), toy.RateRow(16.0, 0.15, 0.0)]
    with pytest.raises(InvalidArgument):
        toy.rate_slopes(rows)
