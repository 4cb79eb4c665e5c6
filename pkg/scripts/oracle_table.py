"""Table of hyperpfaffian partition functions against their closed-form oracles.

Usage: python3 scripts/oracle_table.py [--max-n 5] [--csv out.csv]
"""
import argparse
import csv
import sys

from hyperpf.ensembles import EnsembleSpec, InvalidSpecError, partition_function
from hyperpf.measures import CircularMeasure, GaussianMeasure, JacobiMeasure
from hyperpf.oracle import closed_form_value

BETAS = (1, 2, 4, 9, 10)


def measures(beta, N):
    yield GaussianMeasure()
    yield JacobiMeasure(a=1.0, b=1.0)
    yield CircularMeasure(N=N, beta=beta)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-n", type=int, default=5)
    ap.add_argument("--csv")
    args = ap.parse_args()
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["weight", "beta", "N", "case", "value", "oracle", "oracle_value", "rel_err", "seconds"])
    for beta in BETAS:
        for N in range(1, args.max_n + 1):
            for mu in measures(beta, N):
                try:
                    spec = EnsembleSpec.create(beta, N, mu)
                except InvalidSpecError:
                    continue
                r = partition_function(spec)
                name, ref = closed_form_value(spec)
                err = abs(r.value - ref) / abs(ref)
                w.writerow([mu.kind, beta, N, r.case.value, f"{r.value.real:.15g}", name, f"{ref:.15g}",
                            f"{err:.2e}", f"{r.seconds:.4f}"])
                out.flush()


if __name__ == "__main__":
    main()
