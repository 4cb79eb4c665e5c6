"""Command-line front end: compute, verify, sweep.

Exit codes: 0 success, 2 usage or spec error, 3 numerical disagreement.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, fields

from . import suites
from .ensembles import EnsembleSpec, InvalidSpecError, NumericalError, partition_function, split_beta
from .measures import UnsupportedMeasureError, measure_from_config
from .oracle import reference_values

EXIT_OK, EXIT_SPEC, EXIT_DISAGREE = 0, 2, 3
THREADS_ENV = "HYPERPF_THREADS"
SWEEP_HEADER = ["beta", "L", "N", "case", "value_re", "value_im", "oracle", "oracle_value", "rel_err", "seconds"]


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Flags for one computation; a JSON config file supplies the same keys."""

    beta: int | None = None
    n: int | None = None
    geometry: str | None = None
    weight: str = "gaussian"
    a: float = 1.0
    b: float = 1.0
    lo: float = 0.0
    hi: float = 1.0
    normalized: bool = False
    atoms: tuple = ()
    family: str = "monomial"
    seed: int = 0
    quad_order: int = 80
    oracle: str = "auto"
    tol: float = 1e-6
    threads: int = 1

    @classmethod
    def from_sources(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls(threads=_default_threads())
        names = {f.name for f in fields(cls)}
        if getattr(args, "config", None):
            try:
                with open(args.config) as fh:
                    data = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise UsageError(f"cannot read config: {exc}") from exc
            unknown = set(data) - names
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            for k, v in data.items():
                setattr(cfg, k, tuple(v) if k == "atoms" else v)
        for k in names:
            v = getattr(args, k, None)
            if v is not None and v is not False:
                setattr(cfg, k, v)
        return cfg

    def measure_config(self, N: int) -> dict:
        m = {"kind": self.weight, "quad_order": self.quad_order}
        if self.weight == "jacobi":
            m.update(a=self.a, b=self.b)
        elif self.weight == "uniform":
            m.update(lo=self.lo, hi=self.hi)
        elif self.weight == "circular":
            m.update(N=N, beta=self.beta, normalized=self.normalized)
        if self.atoms:
            m["atoms"] = list(self.atoms)
        return m

    def spec(self, N: int | None = None) -> EnsembleSpec:
        N = self.n if N is None else N
        if self.beta is None or N is None:
            raise UsageError("--beta and --n are required")
        geometry = self.geometry or ("circle" if self.weight == "circular" else "line")
        if (geometry == "circle") != (self.weight == "circular"):
            raise InvalidSpecError(f"weight {self.weight!r} is incompatible with geometry {geometry!r}")
        measure = measure_from_config(self.measure_config(N))
        return EnsembleSpec.create(int(self.beta), int(N), measure, self.family, seed=self.seed)


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def evaluate(cfg: RunConfig, N: int | None = None):
    """Hyperpfaffian value with oracles attached; returns (result, disagreed)."""
    spec = cfg.spec(N)
    result = partition_function(spec, workers=cfg.threads)
    disagreed = False
    for name, (value, tol) in reference_values(spec, cfg.oracle, seed=cfg.seed).items():
        err = result.add_oracle(name, value)
        disagreed |= err > (cfg.tol if tol is None else max(tol, cfg.tol))
    return result, disagreed


def _add_weight_flags(p: argparse.ArgumentParser):
    p.add_argument("--geometry", choices=("line", "circle"))
    p.add_argument("--weight", choices=("gaussian", "jacobi", "uniform", "circular"))
    p.add_argument("--a", type=float)
    p.add_argument("--b", type=float)
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--normalized", action="store_true", help="circular base measure d theta / 2 pi")
    p.add_argument("--family", choices=("monomial", "hermite", "legendre", "random"))
    p.add_argument("--seed", type=int)
    p.add_argument("--quad-order", dest="quad_order", type=int)
    p.add_argument("--oracle", choices=("auto", "none", "all"))
    p.add_argument("--tol", type=float)
    p.add_argument("--threads", type=int, help=f"worker threads (default ${THREADS_ENV} or 1)")
    p.add_argument("--config", help="JSON file with the same keys as the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperpf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="evaluate Z_N or C_N and print one JSON document")
    p.add_argument("--beta", type=int)
    p.add_argument("--n", type=int)
    _add_weight_flags(p)

    p = sub.add_parser("verify", help="run a verification suite, CSV on stdout")
    p.add_argument("--suite", required=True, choices=(*suites.SUITES, "all"))
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("sweep", help="one CSV row per N")
    p.add_argument("--beta", type=int)
    p.add_argument("--n-range", dest="n_range", required=True, help="A..B inclusive")
    p.add_argument("--out", required=True)
    _add_weight_flags(p)
    return parser


def parse_range(text: str) -> range:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError as exc:
        raise UsageError(f"--n-range must look like A..B, got {text!r}") from exc
    return range(lo, hi + 1)


def cmd_compute(args) -> int:
    cfg = RunConfig.from_sources(args)
    result, disagreed = evaluate(cfg)
    doc = result.to_json()
    doc["seed"] = cfg.seed
    print(json.dumps(doc, sort_keys=True))
    return EXIT_DISAGREE if disagreed else EXIT_OK


def cmd_verify(args) -> int:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["suite", "check", "lhs", "rhs", "rel_err", "pass"])
    ok = True
    for check in suites.run_suite(args.suite):
        writer.writerow(suites.format_row(check, args.tol))
        ok &= check.passed(args.tol)
    return EXIT_OK if ok else EXIT_DISAGREE


def sweep_values(cfg: RunConfig, ns: range) -> list[int]:
    """N values of the sweep; beta = L^2 + 1 only admits even N, so odd N are skipped."""
    _, adjacent = split_beta(int(cfg.beta))
    return [n for n in ns if not (adjacent and n % 2)]


def cmd_sweep(args) -> int:
    cfg = RunConfig.from_sources(args)
    if cfg.beta is None:
        raise UsageError("--beta is required")
    ns = sweep_values(cfg, parse_range(args.n_range))
    status = EXIT_OK
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        fh.flush()
        for N in ns:
            result, disagreed = evaluate(cfg, N)
            if disagreed:
                status = EXIT_DISAGREE
            name = next(iter(result.oracle_values), "")
            ref = result.oracle_values.get(name)
            writer.writerow([cfg.beta, result.spec.L, N, result.case.value, repr(result.value.real),
                             repr(result.value.imag), name, "" if ref is None else repr(ref.real),
                             "" if ref is None else f"{result.discrepancies[name]:.3e}",
                             f"{result.seconds:.6f}"])
            fh.flush()
    return status


COMMANDS = {"compute": cmd_compute, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SPEC
    try:
        return COMMANDS[args.command](args)
    except (InvalidSpecError, UnsupportedMeasureError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISAGREE


if __name__ == "__main__":
    sys.exit(main())
