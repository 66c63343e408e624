"""Coverage of the nested confidence region over signal presets, variance models and levels."""
import argparse
import math

from riskconf import multiscale as ms
from riskconf.experiments import coverage_nested, make_signal, summarize
from riskconf.seqmodel import VarianceModel


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--reps", type=int, default=2000)
    p.add_argument("--kappa-reps", type=int, default=5000)
    p.add_argument("--presets", default="lf,zero,spike,poly")
    p.add_argument("--seed", type=int, default=42)
    args = p.parse_args()

    alphas = [0.05, 0.1]
    print("signal,m,alpha,coverage,se,mean_size")
    for m in (math.inf, 128):
        var = VarianceModel(m)
        table = ms.critical_values(args.n, var, alphas, args.kappa_reps, args.seed)
        for preset in args.presets.split(","):
            for alpha in alphas:
                rows = coverage_nested(make_signal(preset, args.n), var, table, alpha, args.reps, args.seed)
                s = summarize(rows)
                size = sum(r["region_size"] for r in rows) / len(rows)
                print(f"{preset},{m},{alpha},{s.rate:.4f},{s.se:.4f},{size:.1f}")


if __name__ == "__main__":
    main()
