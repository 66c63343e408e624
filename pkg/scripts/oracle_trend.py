"""Normalized excess risk of the worst retained nested model, across dimensions."""
import argparse

import numpy as np

from riskconf import multiscale as ms
from riskconf.experiments import make_signal, oracle_nested
from riskconf.seqmodel import VarianceModel


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", default="64,256,1024")
    p.add_argument("--presets", default="zero,poly")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--seed", type=int, default=51)
    args = p.parse_args()

    print("signal,n,median,q95,max")
    for n in (int(s) for s in args.sizes.split(",")):
        table = ms.critical_values(n, VarianceModel(), [args.alpha], 5000, args.seed)
        for preset in args.presets.split(","):
            r = np.array([row["ratio"] for row in oracle_nested(make_signal(preset, n), VarianceModel(), table,
                                                                args.alpha, args.reps, args.seed + 1)])
            print(f"{preset},{n},{np.median(r):.2f},{np.quantile(r, 0.95):.2f},{r.max():.2f}")


if __name__ == "__main__":
    main()
