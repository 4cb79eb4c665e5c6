"""Wall-clock timing of the hyperpfaffian path against worker-thread count.

Usage: python3 scripts/bench_threads.py [--repeat 3] [--threads 1 2 4]
"""
import argparse
import os

from hyperpf.ensembles import EnsembleSpec, partition_function
from hyperpf.measures import GaussianMeasure

CASES = ((4, 8), (9, 3), (9, 4), (10, 4), (16, 3))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 2, 4])
    args = ap.parse_args()
    cpus = len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count()
    print(f"# {cpus} CPU(s) available")
    print("beta,N,dimension,degree," + ",".join(f"t{k}_seconds" for k in args.threads) + ",speedup_max")
    for beta, N in CASES:
        spec = EnsembleSpec.create(beta, N, GaussianMeasure())
        times = [min(partition_function(spec, workers=k).seconds for _ in range(args.repeat))
                 for k in args.threads]
        print(f"{beta},{N},{spec.dimension},{spec.form_degree}," + ",".join(f"{t:.4f}" for t in times)
              + f",{times[0] / times[-1]:.2f}")


if __name__ == "__main__":
    main()
