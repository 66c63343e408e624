"""Largest retained prefix under the general-family region versus the multiscale nested region."""
import argparse

import numpy as np

from riskconf import general
from riskconf import multiscale as ms
from riskconf import seqmodel as sm
from riskconf.experiments import make_signal
from riskconf.seqmodel import CandidateFamily, VarianceModel


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=64)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=4)
    args = p.parse_args()

    fam = CandidateFamily.prefixes(args.n)
    cat = general.build_catalog(fam)
    table = ms.critical_values(args.n, VarianceModel(), [args.alpha], 2000, args.seed)
    print("signal,general_median_top,nested_median_top")
    for preset in ("zero", "spike", "poly"):
        spec = make_signal(preset, args.n)
        g, m = [], []
        for r in range(args.reps):
            x = sm.simulate_observation(spec, VarianceModel(), args.seed, r).x
            g.append(max(len(c) for c in general.general_region(x, 1.0, fam, args.alpha, cat).retained))
            m.append(max(ms.nested_region(x, 1.0, table, args.alpha).retained))
        print(f"{preset},{np.median(g):.1f},{np.median(m):.1f}")


if __name__ == "__main__":
    main()
