"""One-point correlation R_1 on a grid, with its integral, for a Gaussian ensemble.

Usage: python3 scripts/correlation_profile.py --beta 4 --n 3 [--points 41]
"""
import argparse

import numpy as np

from hyperpf.ensembles import EnsembleSpec, correlation, partition_function
from hyperpf.measures import GaussianMeasure


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=int, default=4)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--points", type=int, default=41)
    args = ap.parse_args()
    mu = GaussianMeasure()
    spec = EnsembleSpec.create(args.beta, args.n, mu)
    z = partition_function(spec).value
    print("x,R1")
    for x in np.linspace(-4, 4, args.points):
        print(f"{x:.3f},{correlation(spec, [x], z_mu=z):.10f}")
    rule = mu.quadrature(60)
    total = sum(w / float(mu.density(x)) * correlation(spec, [x], z_mu=z) for x, w in zip(rule.nodes, rule.weights))
    print(f"# integral of R1 = {total:.10f} (expected {args.n})")


if __name__ == "__main__":
    main()
