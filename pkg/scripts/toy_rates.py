"""Distance of the naive and multiscale argmin sets from the kink, with fitted log-log slopes."""
import argparse

from riskconf import toy


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--N", type=int, default=1025)
    p.add_argument("--scales", default="8,16,32,64,128")
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--kappa-reps", type=int, default=2000)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=3)
    args = p.parse_args()

    scales = [float(s) for s in args.scales.split(",")]
    rows, k_naive, k_multi = toy.rate_experiment(scales, args.N, args.reps, args.alpha, args.seed,
                                                 args.kappa_reps, gamma=args.gamma)
    print(toy.rates_csv(rows), end="")
    naive, multi = toy.rate_slopes(rows)
    print(f"# kappa naive {k_naive:.4f} multiscale {k_multi:.4f}")
    print(f"# slope naive {naive:.3f} multiscale {multi:.3f}")


if __name__ == "__main__":
    main()
