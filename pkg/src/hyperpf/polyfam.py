"""Complete monic polynomial families, modified derivatives and Wronskians."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, prod
from typing import Sequence

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

FAMILY_KINDS = ("monomial", "hermite_monic", "legendre_monic", "random_monic")
_ALIASES = {"hermite": "hermite_monic", "legendre": "legendre_monic", "random": "random_monic"}


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=np.complex128)
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=np.complex128)


def poly(coeffs: Sequence[complex]) -> Polynomial:
    """Polynomial from ascending coefficients with trailing zeros removed."""
    return Polynomial(_trim(coeffs))


def modified_derivative(p: Polynomial, ell: int) -> Polynomial:
    """D^ell p = p^(ell) / ell!, computed with exact binomial factors."""
    if ell < 0:
        raise ValueError("derivative order must be nonnegative")
    c = np.asarray(p.coef, dtype=np.complex128)
    if ell >= c.size:
        return poly([0])
    j = np.arange(ell, c.size)
    scale = np.array([comb(int(k), ell) for k in j], dtype=float)
    return poly(c[ell:] * scale)


@dataclass(frozen=True, eq=False)
class CompleteFamily:
    """p_1, ..., p_size with p_n monic of degree n - 1."""

    polys: tuple
    kind: str = "custom"

    def __post_init__(self):
        for n, p in enumerate(self.polys, start=1):
            c = _trim(p.coef)
            if c.size != n or abs(c[-1] - 1) > 1e-12:
                raise ValueError(f"p_{n} must be monic of degree {n - 1}")

    @property
    def size(self) -> int:
        return len(self.polys)

    def __getitem__(self, n: int) -> Polynomial:
        """1-based access, matching p_n."""
        if not 1 <= n <= self.size:
            raise IndexError(f"family index {n} outside 1..{self.size}")
        return self.polys[n - 1]

    def coefficient_matrix(self) -> np.ndarray:
        """Row n-1 holds the ascending coefficients of p_n."""
        out = np.zeros((self.size, self.size), dtype=np.complex128)
        for i, p in enumerate(self.polys):
            c = _trim(p.coef)
            out[i, : c.size] = c
        return out


def standard_family(kind: str, size: int, seed: int | None = None) -> CompleteFamily:
    """Build one of the stock complete families of the given size."""
    kind = _ALIASES.get(kind, kind)
    if size < 1:
        raise ValueError("family size must be at least 1")
    if kind == "monomial":
        polys = [poly([0] * n + [1]) for n in range(size)]
    elif kind in ("hermite_monic", "legendre_monic"):
        x = poly([0, 1])
        polys = [poly([1])]
        if size > 1:
            polys.append(x)
        for n in range(1, size - 1):
            # He_{n+1} = x He_n - n He_{n-1};  monic Legendre uses n^2/(4n^2-1)
            c = n if kind == "hermite_monic" else n * n / (4 * n * n - 1)
            polys.append(poly((x * polys[n] - c * polys[n - 1]).coef))
    elif kind == "random_monic":
        rng = np.random.default_rng(seed)
        polys = [poly(np.append(rng.uniform(-1, 1, n), 1.0)) for n in range(size)]
    else:
        raise ValueError(f"unknown family kind {kind!r}; expected one of {FAMILY_KINDS}")
    label = kind if kind != "random_monic" else f"random_monic({seed})"
    return CompleteFamily(tuple(polys), label)


def _check_tuple(fam: CompleteFamily, t) -> tuple[int, ...]:
    t = tuple(t)
    for i in t:
        if not 1 <= i <= fam.size:
            raise IndexError(f"index {i} outside family range 1..{fam.size}")
    return t


def wronskian_matrix(fam: CompleteFamily, t, x: complex) -> np.ndarray:
    """[D^{l-1} p_{t(n)}(x)]_{n,l}."""
    t = _check_tuple(fam, t)
    L = len(t)
    return np.array([[modified_derivative(fam[i], ell)(x) for ell in range(L)] for i in t],
                    dtype=np.complex128)


def wronskian(fam: CompleteFamily, t, x: complex) -> complex:
    """Wr(p_t; x) by numeric LU on the L x L matrix.

    ``t`` need not be increasing; permuting it permutes rows.
    """
    return complex(np.linalg.det(wronskian_matrix(fam, t, x)))


def wronskian_poly(fam: CompleteFamily, t) -> Polynomial:
    """Wr(p_t; x) as a polynomial, by Laplace expansion over row subsets."""
    t = _check_tuple(fam, t)
    L = len(t)
    entries = [[modified_derivative(fam[i], ell).coef for ell in range(L)] for i in t]
    # minors[rows] = determinant of rows x first |rows| columns
    minors: dict[int, np.ndarray] = {0: np.ones(1, dtype=np.complex128)}
    for col in range(L):
        nxt: dict[int, np.ndarray] = {}
        for rows, det in minors.items():
            for r in range(L):
                if rows >> r & 1:
                    continue
                # sign from the position of r among the chosen rows
                sign = -1 if bin(rows >> r).count("1") & 1 else 1
                key = rows | (1 << r)
                term = sign * P.polymul(entries[r][col], det)
                prev = nxt.get(key)
                nxt[key] = term if prev is None else P.polyadd(prev, term)
        minors = nxt
    return poly(minors[(1 << L) - 1])


def monomial_wronskian_closed_form(t) -> tuple[Fraction, int]:
    """(constant, exponent) with Wr(monomials_t; x) = constant * x**exponent.

    constant = prod_{j<k}(t_k - t_j) / prod_{l=1}^{L} (l-1)!, which is what the
    determinant of binomial coefficients evaluates to.
    """
    t = tuple(t)
    L = len(t)
    delta = prod(t[k] - t[j] for j in range(L) for k in range(j + 1, L))
    const = Fraction(delta, prod(factorial(l) for l in range(L)))
    return const, sum(t) - L * (L + 1) // 2


def vandermonde_block(fam: CompleteFamily, x: complex, L: int) -> np.ndarray:
    """The NL x L slab [D^{l-1} p_n(x)]."""
    return np.array([[modified_derivative(p, ell)(x) for ell in range(L)] for p in fam.polys],
                    dtype=np.complex128)


def confluent_vandermonde(fam: CompleteFamily, lambdas: Sequence[complex], L: int) -> np.ndarray:
    if fam.size != len(lambdas) * L:
        raise ValueError(f"family size {fam.size} != N*L = {len(lambdas) * L}")
    return np.hstack([vandermonde_block(fam, lam, L) for lam in lambdas])


def increasing_tuples(n: int, L: int):
    """All increasing maps {1..L} -> {1..n}, lexicographic."""
    return itertools.combinations(range(1, n + 1), L)
