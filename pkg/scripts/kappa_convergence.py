"""Compare least-favorable critical values with the Brownian grid quantile as n grows."""
import argparse

from riskconf import toy
from riskconf import multiscale as ms
from riskconf.seqmodel import VarianceModel


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--sizes", default="64,256,1024")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--reps", type=int, default=5000)
    p.add_argument("--seed", type=int, default=71)
    args = p.parse_args()

    print("n,kappa_nested,kappa_brownian,gap")
    for n in (int(s) for s in args.sizes.split(",")):
        nested = ms.critical_values(n, VarianceModel(), [args.alpha], args.reps, args.seed).kappa(args.alpha)
        brownian = toy.kappa_multiscale(n, args.reps, args.alpha, args.seed + 1)
        print(f"{n},{nested:.4f},{brownian:.4f},{nested - brownian:+.4f}")


if __name__ == "__main__":
    main()
