"""Verification suites: each yields rows of (check, lhs, rhs, rel_err)."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .ensembles import EnsembleSpec, InvalidSpecError, partition_function, split_beta
from .exterior import form_from_matrix, hyperpfaffian, pfaffian, sign_of_concatenation
from .measures import CircularMeasure, GaussianMeasure, JacobiMeasure
from .oracle import (dyson_value, exhaustive_sign, mehta_value, selberg_value,
                     sign_matrix_pfaffian_check, vandermonde_identity_check)
from .polyfam import standard_family

FAMILIES = ("monomial", "hermite", "legendre", "random")
MEHTA_CASES = ((1, 2), (1, 3), (1, 4), (1, 5), (4, 2), (4, 3), (4, 4), (9, 2), (9, 3))
SELBERG_CASES = ((1, 2), (1, 3), (4, 2), (4, 3), (9, 2))
DYSON_CASES = ((1, 2), (1, 3), (4, 2), (4, 3), (9, 2))


@dataclass(frozen=True)
class Check:
    suite: str
    check: str
    lhs: complex
    rhs: complex
    rel_err: float

    def passed(self, tol: float) -> bool:
        return bool(self.rel_err <= tol)


def _rel(lhs: complex, rhs: complex) -> float:
    return float(abs(lhs - rhs) / max(abs(rhs), 1e-300))


def random_antisymmetric(rng: np.random.Generator, n: int) -> np.ndarray:
    A = rng.standard_normal((n, n))
    return A - A.T


def exterior_suite(seed: int = 0) -> Iterator[Check]:
    rng = np.random.default_rng(seed)
    for k in range(40):
        n = 2 * int(rng.integers(1, 7))
        A = random_antisymmetric(rng, n)
        pf, hpf = pfaffian(A), hyperpfaffian(form_from_matrix(A))
        yield Check("exterior", f"pf_vs_hyperpf[{k},n={n}]", hpf, pf, _rel(hpf, pf))
        det = np.linalg.det(A)
        yield Check("exterior", f"pf_squared_vs_det[{k},n={n}]", pf * pf, det, _rel(pf * pf, det))
    for k in range(40):
        D = int(rng.integers(2, 11))
        perm = [int(i) + 1 for i in rng.permutation(D)]
        cuts = sorted(int(c) for c in rng.choice(np.arange(1, D), size=min(2, D - 1), replace=False))
        parts = [sorted(perm[a:b]) for a, b in zip([0] + cuts, cuts + [D])]
        got, want = sign_of_concatenation(parts), exhaustive_sign(parts)
        yield Check("exterior", f"concat_sign[{k},D={D}]", got, want, float(got != want))


def identities_suite(seed: int = 0) -> Iterator[Check]:
    rng = np.random.default_rng(seed)
    for kind in FAMILIES:
        for L, N in itertools.product((1, 2, 3), (1, 2, 3)):
            fam = standard_family(kind, N * L, seed=seed)
            lam = list(rng.uniform(-1.5, 1.5, N))
            lhs, rhs, err = vandermonde_identity_check(fam, L, lam)
            yield Check("identities", f"vandermonde[{kind},L={L},N={N}]", lhs, rhs, err)
    for N in (2, 4, 6):
        lam = list(rng.uniform(-2, 2, N))
        (pt, sgn), (ps, diff) = sign_matrix_pfaffian_check(lam)
        yield Check("identities", f"pf_sign_matrix[N={N}]", pt, sgn, _rel(pt, sgn))
        yield Check("identities", f"pf_adjacent_kernel[N={N}]", ps, diff, _rel(ps, diff))


def _zn(beta, N, measure, family="monomial", seed=0):
    return partition_function(EnsembleSpec.create(beta, N, measure, family, seed=seed)).value


def mehta_suite(cases=MEHTA_CASES) -> Iterator[Check]:
    for beta, N in cases:
        z, ref = _zn(beta, N, GaussianMeasure()), mehta_value(beta / 2, N)
        yield Check("mehta", f"beta={beta},N={N}", z, ref, _rel(z, ref))


def selberg_suite(cases=SELBERG_CASES, a: float = 1.0, b: float = 1.0) -> Iterator[Check]:
    for beta, N in cases:
        z, ref = _zn(beta, N, JacobiMeasure(a=a, b=b)), selberg_value(beta / 2, a, b, N)
        yield Check("selberg", f"beta={beta},N={N},a={a:g},b={b:g}", z, ref, _rel(z, ref))


def dyson_suite(cases=DYSON_CASES) -> Iterator[Check]:
    for beta, N in cases:
        z = _zn(beta, N, CircularMeasure(N=N, beta=beta))
        ref = dyson_value(beta, N, normalized=False)
        yield Check("dyson", f"beta={beta},N={N}", z, ref, _rel(z, ref))
        yield Check("dyson", f"imag[beta={beta},N={N}]", z.imag, 0.0, abs(z.imag) / abs(z))


def valid_specs(max_L: int = 3, max_N: int = 4) -> Iterator[tuple[int, int]]:
    """(beta, N) pairs with L <= max_L and N <= max_N admitted by the formulation."""
    for L in range(1, max_L + 1):
        for beta in (L * L, L * L + 1):
            for N in range(1, max_N + 1):
                try:
                    _, adjacent = split_beta(beta)
                except InvalidSpecError:
                    continue
                if adjacent and N % 2:
                    continue
                yield beta, N


def invariance_spread(beta: int, N: int, seed: int = 0) -> tuple[float, list[complex]]:
    vals = [_zn(beta, N, GaussianMeasure(), kind, seed) for kind in FAMILIES]
    ref = vals[0]
    return max(_rel(v, ref) for v in vals), vals


def invariance_suite(max_L: int = 3, max_N: int = 4) -> Iterator[Check]:
    for beta, N in valid_specs(max_L, max_N):
        spread, vals = invariance_spread(beta, N)
        worst = max(vals[1:], key=lambda v: abs(v - vals[0]))
        yield Check("invariance", f"beta={beta},N={N}", worst, vals[0], spread)


SUITES: dict[str, Callable[[], Iterator[Check]]] = {
    "exterior": exterior_suite,
    "identities": identities_suite,
    "mehta": mehta_suite,
    "selberg": selberg_suite,
    "dyson": dyson_suite,
    "invariance": invariance_suite,
}


def run_suite(name: str) -> Iterator[Check]:
    if name == "all":
        for key in SUITES:
            yield from SUITES[key]()
        return
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}")
    yield from SUITES[name]()


def _fmt(v) -> str:
    v = complex(v)
    return repr(v.real) if v.imag == 0 else f"{v.real!r}{v.imag:+}j"


def format_row(c: Check, tol: float) -> list[str]:
    return [c.suite, c.check, _fmt(c.lhs), _fmt(c.rhs), f"{c.rel_err:.3e}", str(c.passed(tol)).lower()]


__all__ = ["Check", "SUITES", "run_suite", "format_row", "valid_specs", "invariance_spread",
           "random_antisymmetric"]
