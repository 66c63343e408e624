"""Acceptance criteria C1-C10 at their stated settings and tolerances.

Each test prints one ``PASS``/``FAIL`` line (visible even under output
capture) and then asserts. Run alone with ``pytest tests/test_acceptance.py -v``
or ``python3 tests/test_acceptance.py``.
"""
import hashlib
import math
import sys

import numpy as np
import pytest
from scipy import stats

from riskconf import cli, coupling, ncchi2, toy
from riskconf import multiscale as ms
from riskconf import seqmodel as sm
from riskconf.experiments import (coverage_general, coverage_nested, make_signal, oracle_nested,
                                  random_family, summarize)
from riskconf.seqmodel import VarianceModel

pytestmark = pytest.mark.acceptance

DOFS = (1, 3, 10, 50, 100)
NONCENTRALITIES = (0.0, 1.0, 5.0, 25.0, 100.0)
OFFSETS = (-1.5, -0.75, 0.0, 0.75, 1.5)


@pytest.fixture
def report(capsys):
    def emit(tag, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} {tag}: {detail}")
        assert ok, f"{tag}: {detail}"
    return emit


def grid_points(k, d2):
    """x values around the mean on a log scale so they stay positive for small k."""
    m = k + d2
    sd = math.sqrt(2 * k + 4 * d2)
    return [m * math.exp(z * sd / m) for z in OFFSETS]


def test_c1_cdf_matches_monte_carlo(report):
    draws = 10_000_000
    rng = np.random.default_rng(20241)
    worst, bad = 0.0, []
    for k in DOFS:
        for d2 in NONCENTRALITIES:
            sample = rng.chisquare(k, draws) if d2 == 0 else rng.noncentral_chisquare(k, d2, draws)
            sample.sort()
            for x in grid_points(k, d2):
                p_mc = np.searchsorted(sample, x, side="right") / draws
                se = math.sqrt(p_mc * (1 - p_mc) / draws)
                err = abs(ncchi2.cdf(ncchi2.NcChi2Params(k, d2), x) - p_mc)
                worst = max(worst, err / se)
                if err > 3 * se:
                    bad.append((k, d2, round(x, 4), err / se))
    report("C1 ncchi2 vs Monte Carlo", not bad,
           f"125 points, worst |err|/SE = {worst:.2f}, over 3 SE: {bad}")


def test_c2_deterministic_bounds(report):
    failures = []
    for k in DOFS:
        for d2 in NONCENTRALITIES:
            m = k + d2
            for x in grid_points(k, d2):
                r = abs(x - m)
                lower, upper = ncchi2.cdf_bounds(k, d2, r)
                p = ncchi2.NcChi2Params(k, d2)
                if not ncchi2.cdf(p, m + r) >= lower:
                    failures.append(("cdf-lower", k, d2, r))
                if m - r >= 0 and not ncchi2.cdf(p, m - r) <= upper:
                    failures.append(("cdf-upper", k, d2, r))
            for u in (0.001, 0.01, 0.025, 0.05, 0.1, 0.25, 0.5):
                lo, hi = ncchi2.quantile_bounds(k, d2, u)
                p = ncchi2.NcChi2Params(k, d2)
                if not ncchi2.quantile(p, u) >= lo:
                    failures.append(("q-lower", k, d2, u))
                if not ncchi2.quantile(p, 1 - u) <= hi:
                    failures.append(("q-upper", k, d2, u))
    report("C2 deterministic bounds", not failures, f"violations: {failures or 'none'}")


def test_c3_coupling(report):
    n, reps = 16, 100_000
    pairs = ((0, n), (0, 3), (2, 9), (5, 6))
    violations, pvalues = {}, []
    for m in (math.inf, 30):
        for i, preset in enumerate(("zero", "spike", "poly")):
            spec = make_signal(preset, n)
            run = coupling.run_coupling(spec, m, reps, seed=100 + i, pairs=pairs)
            violations[(preset, m)] = run.violations
            rng = np.random.default_rng(200 + i)
            star = sm.SignalSpec.least_favorable(n, spec.sigma)
            for col, (j, k) in enumerate(pairs):
                pvalues.append(stats.ks_2samp(run.T[:, col], coupling.direct_ratio_samples(spec, m, j, k, reps, rng)).pvalue)
                pvalues.append(stats.ks_2samp(run.T_star[:, col], coupling.direct_ratio_samples(star, m, j, k, reps, rng)).pvalue)
    # familywise 1% over all marginal comparisons
    ks_ok = min(pvalues) > 0.01 / len(pvalues)
    total = sum(violations.values())
    report("C3 coupling", total == 0 and ks_ok,
           f"violations {total} over 6x{reps} pairs; min KS p = {min(pvalues):.4f} ({len(pvalues)} tests)")


def test_c4_nested_coverage(report):
    n, reps = 64, 2000
    lines, ok = [], True
    for m in (math.inf, 128):
        var = VarianceModel(m)
        table = ms.critical_values(n, var, [0.05, 0.1], 5000, seed=41)
        for preset in ("lf", "zero", "spike"):
            for alpha in (0.05, 0.1):
                s = summarize(coverage_nested(make_signal(preset, n), var, table, alpha, reps, seed=42))
                ok &= s.passes(alpha)
                lines.append(f"{preset}/m={m}/a={alpha}:{s.rate:.4f}")
    report("C4 nested coverage", ok, " ".join(lines))


def test_c5_nested_oracle_trend(report):
    reps, alpha, bound = 500, 0.1, 15.0
    lines, ok = [], True
    for n in (64, 256, 1024):
        table = ms.critical_values(n, VarianceModel(), [alpha], 5000, seed=51)
        for preset in ("zero", "poly"):
            ratios = np.array([r["ratio"] for r in
                               oracle_nested(make_signal(preset, n), VarianceModel(), table, alpha, reps, seed=52)])
            ok &= bool(ratios.max() <= bound)
            lines.append(f"{preset}/n={n}: max {ratios.max():.2f} median {np.median(ratios):.2f}")
    report("C5 nested oracle ratio <= 15", ok, "; ".join(lines))


def test_c6_general_coverage(report):
    n, reps, alpha = 32, 2000, 0.1
    spec = make_signal("lf", n)
    lines, ok = [], True
    for size in (8, 32):
        family = random_family(n, size, seed=5)
        for m in (math.inf, 64):
            s = summarize(coverage_general(spec, family, alpha, reps, seed=61, m=m))
            ok &= s.passes(alpha)
            lines.append(f"|C|={size}/m={m}:{s.rate:.4f}")
    report("C6 general coverage", ok, " ".join(lines))


def test_c7_kappa_convergence(report):
    n, reps, alpha = 1024, 5000, 0.1
    nested = ms.critical_values(n, VarianceModel(), [alpha], reps, seed=71).kappa(alpha)
    brownian = toy.kappa_multiscale(n, reps, alpha, seed=72)
    gap = abs(nested - brownian)
    report("C7 kappa convergence", gap <= 0.15,
           f"nested {nested:.4f} vs Brownian {brownian:.4f}, gap {gap:.4f} (tolerance 0.15)")


def test_c8_toy_rates(report):
    rows, _, _ = toy.rate_experiment((8, 16, 32, 64, 128), 1025, 500, 0.1, seed=3, kappa_reps=2000)
    naive, multi = toy.rate_slopes(rows)
    ok = -1.3 <= naive <= -0.7 and multi <= -1.5
    report("C8 toy rate separation", ok, f"naive slope {naive:.3f}, multiscale slope {multi:.3f}")


def _pairwise_region(x, s2, kappa):
    n = len(x)
    keep = []
    for j in range(n + 1):
        rj = sum(v * v - s2 for v in x[j:]) + j * s2
        if all(rj <= sum(v * v - s2 for v in x[k:]) + k * s2 + s2 * abs(k - j) * ms.c_jkn(n, j, k, kappa)
               for k in range(n + 1) if k != j):
            keep.append(j)
    return keep


def test_c9_prefix_scan_equivalence(report):
    rng = np.random.default_rng(90)
    mismatches = 0
    for _ in range(50):
        n = int(rng.integers(1, 33))
        theta = rng.normal(0, 2, n) * (rng.random(n) < 0.5)
        x = theta + rng.standard_normal(n)
        s2 = float(rng.uniform(0.3, 2.0))
        kappa = float(rng.uniform(0, 2.5))
        mismatches += ms.nested_region_kappa(x, s2, kappa).retained != _pairwise_region(list(x), s2, kappa)
    report("C9 prefix scan equals pairwise reference", mismatches == 0, f"{mismatches}/50 mismatches")


RANDOMIZED_COMMANDS = [
    ["critical-values", "--n", "48", "--m", "inf", "--alpha", "0.05,0.1", "--reps", "2000"],
    ["critical-values", "--n", "32", "--m", "40", "--reps", "1000"],
    ["simulate", "--experiment", "coverage-nested", "--n", "32", "--reps", "200", "--m", "50"],
    ["simulate", "--experiment", "oracle-nested", "--n", "32", "--reps", "200", "--signal", "poly"],
    ["simulate", "--experiment", "coverage-general", "--n", "16", "--reps", "100", "--m", "30"],
    ["simulate", "--experiment", "coupling-order", "--n", "12", "--reps", "200", "--m", "20"],
    ["simulate", "--experiment", "toy-rates", "--n", "257", "--reps", "20", "--kappa-reps", "1000"],
]


def test_c10_thread_determinism(report, tmp_path):
    differing = []
    for i, argv in enumerate(RANDOMIZED_COMMANDS):
        digests = set()
        for threads in (1, 8):
            out = tmp_path / f"{i}-{threads}"
            code = cli.main(argv + ["--seed", "13", "--threads", str(threads), "--out", str(out)])
            digests.add(hashlib.sha256(out.read_bytes()).hexdigest() if code == 0 else f"exit {code}")
        if len(digests) != 1:
            differing.append(" ".join(argv[:3]))
    report("C10 determinism across thread counts", not differing,
           f"{len(RANDOMIZED_COMMANDS)} commands, differing: {differing or 'none'}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
