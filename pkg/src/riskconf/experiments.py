"""Simulation experiments: coverage, oracle ratios, coupling order, toy rates.

Each experiment returns a list of row dicts with a fixed column order so the
CLI can emit CSV and tests can aggregate. Rows are ordered by replicate index.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import coupling, general, multiscale, toy
from .errors import InvalidArgument
from .mc import DOMAIN_FAMILY, binomial_se, map_replicates, substream
from .seqmodel import (CandidateFamily, SignalSpec, VarianceModel, optimal_set, risks_nested,
                       simulate_observation)

SIGNAL_PRESETS = ("lf", "zero", "spike", "poly")


def make_signal(name: str, n: int, sigma: float = 1.0) -> SignalSpec:
    """Named presets: lf = (+-sigma), zero, spike = (2, 1, 0.5, 0, ...), poly = sqrt(n) i^-1."""
    if name == "lf":
        return SignalSpec.least_favorable(n, sigma)
    if name == "zero":
        return SignalSpec.zero(n, sigma)
    if name == "spike":
        return SignalSpec.spike(n, sigma)
    if name == "poly":
        return SignalSpec.polynomial_decay(n, math.sqrt(n), 1.0, sigma)
    raise InvalidArgument(f"unknown signal preset {name!r}; choose from {SIGNAL_PRESETS}")


@dataclass(frozen=True)
class CoverageSummary:
    reps: int
    covered: int

    @property
    def rate(self) -> float:
        return self.covered / self.reps

    @property
    def se(self) -> float:
        return binomial_se(self.rate, self.reps)

    def passes(self, alpha: float, n_se: float = 3.0) -> bool:
        # SE at the nominal level, so a perfect record is not rewarded with a zero SE
        return self.rate >= 1.0 - alpha - n_se * binomial_se(1.0 - alpha, self.reps)


def summarize(rows: Sequence[dict]) -> CoverageSummary:
    return CoverageSummary(len(rows), sum(int(r["covered"]) for r in rows))


def coverage_nested(spec: SignalSpec, var: VarianceModel, table: multiscale.CriticalValueTable,
                    alpha: float, reps: int, seed: int, threads: int = 1) -> list[dict]:
    target = set(optimal_set(spec, CandidateFamily.nested(spec.n)))
    kappa = table.kappa(alpha)

    def one(r: int) -> dict:
        obs = simulate_observation(spec, var, seed, r)
        reg = multiscale.nested_region_kappa(obs.x, obs.sigma_hat2, kappa, alpha)
        return {"rep": r, "covered": int(target <= set(reg.retained)), "region_size": len(reg.retained)}

    return map_replicates(one, reps, threads)


def oracle_nested(spec: SignalSpec, var: VarianceModel, table: multiscale.CriticalValueTable,
                  alpha: float, reps: int, seed: int, threads: int = 1) -> list[dict]:
    """Per replicate: (max retained risk - min risk) / sqrt(log n * max(min risk, log n)), risk in sigma^2 units."""
    risks = risks_nested(spec) / spec.sigma**2
    rmin = float(risks.min())
    logn = math.log(spec.n)
    scale = math.sqrt(logn * max(rmin, logn))
    kappa = table.kappa(alpha)

    def one(r: int) -> dict:
        obs = simulate_observation(spec, var, seed, r)
        reg = multiscale.nested_region_kappa(obs.x, obs.sigma_hat2, kappa, alpha)
        rmax = float(risks[reg.retained].max())
        return {"rep": r, "max_risk": rmax, "min_risk": rmin, "ratio": (rmax - rmin) / scale}

    return map_replicates(one, reps, threads)


def random_family(n: int, size: int, seed: int, index: int = 0) -> CandidateFamily:
    return CandidateFamily.random(n, size, substream(seed, index, DOMAIN_FAMILY))


def coverage_general(spec: SignalSpec, family: CandidateFamily, alpha: float, reps: int, seed: int,
                     m: float = math.inf, threads: int = 1) -> list[dict]:
    """Known sigma when ``m`` is inf, otherwise the split-level unknown-variance region."""
    catalog = general.build_catalog(family)
    target = {general.canonical(c) for c in optimal_set(spec, catalog.family)}
    var = VarianceModel(m)

    def one(r: int) -> dict:
        obs = simulate_observation(spec, var, seed, r)
        if var.known:
            reg = general.general_region(obs.x, spec.sigma**2, catalog.family, alpha, catalog)
        else:
            reg = general.general_region_unknown_sigma(obs.x, obs.sigma_hat2, m, catalog.family, alpha, catalog)
        kept = {general.canonical(c) for c in reg.retained}
        return {"rep": r, "covered": int(target <= kept), "region_size": len(kept)}

    return map_replicates(one, reps, threads)


def coupling_order(presets: Sequence[str], n: int, m: float, reps: int, seed: int,
                   threads: int = 1) -> list[dict]:
    rows = []
    for i, name in enumerate(presets):
        run = coupling.run_coupling(make_signal(name, n), m, reps, seed + i, threads=threads)
        rows.append({"signal": name, "samples": run.samples, "pairs_checked": run.pairs_checked,
                     "violations": run.violations})
    return rows


def toy_rates(scales: Sequence[float], N: int, reps: int, alpha: float, seed: int,
              kappa_reps: int = 2000, threads: int = 1) -> list[dict]:
    rows, _, _ = toy.rate_experiment(scales, N, reps, alpha, seed, kappa_reps, threads=threads)
    return [{"c_n": r.c, "naive_dist": r.naive_dist, "multi_dist": r.multi_dist} for r in rows]


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    if not rows:
        return ""
    wr = csv.writer(buf, lineterminator="\n")
    cols = list(rows[0])
    wr.writerow(cols)
    for r in rows:
        wr.writerow([repr(v) if isinstance(v, float) else v for v in (r[c] for c in cols)])
    return buf.getvalue()
