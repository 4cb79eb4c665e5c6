"""Independent reference values for partition functions and the identities behind them."""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import special

from .exterior import ExtForm, pfaffian, sign_of_concatenation
from .measures import (CircularMeasure, GaussianMeasure, JacobiMeasure, Measure, UniformMeasure)
from .polyfam import CompleteFamily, confluent_vandermonde

MAX_TENSOR_N = 4
MAX_MC_N = 6
MAX_SUM_ORACLE_DIM = 12
GAUSS_CUTOFF = 7.0


def log_gamma(x: float) -> float:
    if x <= 0:
        raise ValueError("log_gamma needs x > 0")
    return math.lgamma(x)


def mehta_value(gamma: float, N: int) -> float:
    """F_N(gamma) / N! = prod_{n=1}^N Gamma(1 + n gamma) / Gamma(1 + gamma) / N!."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    s = sum(log_gamma(1 + n * gamma) - log_gamma(1 + gamma) for n in range(1, N + 1))
    return math.exp(s - log_gamma(N + 1))


def selberg_value(gamma: float, a: float, b: float, N: int) -> float:
    """Selberg integral S_N(gamma, a, b) / N! for x^{a-1}(1-x)^{b-1} on [0, 1]."""
    if a <= 0 or b <= 0 or gamma < 0:
        raise ValueError("Selberg integral needs a, b > 0 and gamma >= 0")
    s = 0.0
    for n in range(N):
        if a + b + (N + n - 1) * gamma <= 0:
            raise ValueError("Selberg integral diverges for these parameters")
        s += (log_gamma(a + n * gamma) + log_gamma(b + n * gamma) + log_gamma(1 + (n + 1) * gamma)
              - log_gamma(a + b + (N + n - 1) * gamma) - log_gamma(1 + gamma))
    return math.exp(s - log_gamma(N + 1))


def dyson_value(beta: float, N: int, normalized: bool = True) -> float:
    """C_N for d theta / 2 pi; times (2 pi)^N when ``normalized`` is False."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    v = math.exp(log_gamma(1 + beta * N / 2) - N * log_gamma(1 + beta / 2) - log_gamma(N + 1))
    return v if normalized else v * (2 * math.pi) ** N


# direct evaluation of the N-fold integral ----------------------------------

def _chamber_quadrature(f_density, lo: float, hi: float, N: int, beta: float, order: int,
                        circular: bool) -> float:
    """Integral over lo < x_1 < ... < x_N < hi of prod |x_n - x_m|^beta prod w(x_n).

    Nested Gauss-Legendre: x_k ranges over [x_{k-1}, hi].  Inside the chamber
    the integrand has no kink, so the rule converges spectrally.
    """
    t, w = special.roots_legendre(order)
    t01, w01 = (t + 1) / 2, w / 2

    def pair(a, b):
        d = b - a
        return (2 * np.sin(d / 2)) ** beta if circular else d ** beta

    total = 0.0
    x1 = lo + (hi - lo) * t01
    w1 = (hi - lo) * w01 * f_density(x1)
    for i in range(order):
        pts = [np.array([x1[i]])]
        wts = np.array([w1[i]])
        for _ in range(1, N):
            prev = pts[-1]
            span = hi - prev
            new = prev[:, None] + span[:, None] * t01[None, :]
            wts = (wts[:, None] * span[:, None] * w01[None, :] * f_density(new)).ravel()
            pts = [np.repeat(p, order) for p in pts] + [new.ravel()]
        integrand = wts
        for m in range(N):
            for n in range(m + 1, N):
                integrand = integrand * pair(pts[m], pts[n])
        total += float(np.sum(integrand))
    return total


def _truncated_support(measure: Measure, N: int, beta: float) -> tuple[float, float]:
    lo, hi = measure.support()
    if isinstance(measure, GaussianMeasure):
        r = GAUSS_CUTOFF + math.sqrt(beta * N)
        return -r, r
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValueError("direct quadrature needs a finite or Gaussian support")
    return lo, hi


def direct_partition_function(spec, method: str = "quadrature", order: int | None = None,
                              samples: int = 200_000, seed: int = 0) -> tuple[float, float]:
    """Brute-force (1/N!) int prod |x_n - x_m|^beta dnu^N, with an error estimate.

    ``quadrature``: single ordered chamber times N!, error = change under order
    refinement.  ``monte-carlo``: sampling from the normalised measure with a
    Philox stream, error = standard error.
    """
    measure, N, beta = spec.measure, spec.N, spec.beta
    if measure.atoms:
        raise ValueError("direct oracle does not handle atoms")
    circular = spec.geometry == "circle"
    if method == "quadrature":
        if N > MAX_TENSOR_N:
            raise ValueError(f"tensor quadrature limited to N <= {MAX_TENSOR_N}")
        lo, hi = _truncated_support(measure, N, beta)
        order = order or (80 if N <= 3 else 64)
        if circular:
            c = measure.scale / (2 * math.pi if measure.normalized else 1.0)
            dens = lambda x: np.full(np.shape(x), c)  # noqa: E731
        else:
            dens = lambda x: measure.scale * measure.density(x)  # noqa: E731
        fine = _chamber_quadrature(dens, lo, hi, N, beta, order, circular)
        coarse = _chamber_quadrature(dens, lo, hi, N, beta, max(4, (2 * order) // 3), circular)
        return fine, abs(fine - coarse)
    if method in ("monte-carlo", "mc"):
        if N > MAX_MC_N:
            raise ValueError(f"Monte Carlo limited to N <= {MAX_MC_N}")
        rng = np.random.Generator(np.random.Philox(seed))
        x = measure.sample(rng, (samples, N))
        if circular:
            mass = 2 * math.pi * measure.scale / (2 * math.pi if measure.normalized else 1.0)
            dist = lambda a, b: np.abs(2 * np.sin((b - a) / 2))  # noqa: E731
        else:
            mass = float(measure.total_mass().real)
            dist = lambda a, b: np.abs(b - a)  # noqa: E731
        vals = np.ones(samples)
        for m in range(N):
            for n in range(m + 1, N):
                vals *= dist(x[:, m], x[:, n]) ** beta
        if not isinstance(measure, (GaussianMeasure, JacobiMeasure, UniformMeasure, CircularMeasure)):
            lo, hi = measure.support()
            vals *= np.prod(measure.density(x), axis=1) * (hi - lo) ** N / mass ** N
        factor = mass ** N / math.factorial(N)
        return factor * float(vals.mean()), factor * float(vals.std(ddof=1)) / math.sqrt(samples)
    raise ValueError(f"unknown method {method!r}")


# identities ------------------------------------------------------------------

def _exact_det(rows: list[list[Fraction]]) -> Fraction:
    """Fraction-free Bareiss elimination."""
    M = [row[:] for row in rows]
    n = len(M)
    sign, prev = 1, Fraction(1)
    for k in range(n - 1):
        if M[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if M[r][k] != 0), None)
            if swap is None:
                return Fraction(0)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
        prev = M[k][k]
    return sign * M[-1][-1]


def _exact_block_entry(coef, x: Fraction, ell: int) -> Fraction:
    # D^ell p(x) = sum_j C(j, ell) c_j x^(j - ell)
    return sum((math.comb(j, ell) * Fraction(float(c)) * x ** (j - ell)
                for j, c in enumerate(coef) if j >= ell), Fraction(0))


def vandermonde_identity_check(fam: CompleteFamily, L: int, lambdas: Sequence[float],
                               method: str = "exact"):
    """det V(lambda) against prod_{m<n} (lambda_n - lambda_m)^{L^2}.

    ``exact`` evaluates the determinant in rational arithmetic from the
    floating-point inputs, so nearly coincident points lose nothing to
    cancellation; ``float`` uses LU on the numeric matrix.
    """
    real = all(np.isreal(p.coef).all() for p in fam.polys) and all(np.isreal(lambdas))
    if method == "exact" and real:
        if fam.size != len(lambdas) * L:
            raise ValueError(f"family size {fam.size} != N*L = {len(lambdas) * L}")
        xs = [Fraction(float(np.real(v))) for v in lambdas]
        coefs = [np.real(p.coef) for p in fam.polys]
        rows = [[_exact_block_entry(c, x, ell) for x in xs for ell in range(L)] for c in coefs]
        det = _exact_det(rows)
        want = math.prod((xs[n] - xs[m]) ** (L * L) for m in range(len(xs)) for n in range(m + 1, len(xs)))
        lhs, rhs = complex(float(det)), complex(float(want))
        err = float(abs(det - want) / abs(want)) if want != 0 else float(abs(det))
        return lhs, rhs, err
    if method not in ("exact", "float"):
        raise ValueError(f"unknown method {method!r}")
    lhs = complex(np.linalg.det(confluent_vandermonde(fam, lambdas, L)))
    rhs = complex(math.prod((lambdas[n] - lambdas[m]) ** (L * L)
                            for m in range(len(lambdas)) for n in range(m + 1, len(lambdas))))
    if rhs == 0:
        return lhs, rhs, abs(lhs)
    return lhs, rhs, abs(lhs - rhs) / abs(rhs)


def sign_matrix_pfaffian_check(lambdas: Sequence[float]):
    """((Pf T, prod sgn), (Pf S, prod diff)) for T = [sgn(l_n - l_m)] and
    S = [(l_n^M - l_m^M)^2 / (l_n - l_m)], M = N / 2."""
    lam = [float(v) for v in lambdas]
    N = len(lam)
    if N % 2:
        raise ValueError("need an even number of points")
    if len(set(lam)) != N:
        raise ValueError("points must be distinct")
    M = N // 2
    T = np.array([[np.sign(lam[n] - lam[m]) for n in range(N)] for m in range(N)])
    S = np.array([[0.0 if m == n else (lam[n] ** M - lam[m] ** M) ** 2 / (lam[n] - lam[m])
                   for n in range(N)] for m in range(N)])
    pairs = [(m, n) for m in range(N) for n in range(m + 1, N)]
    sgn = math.prod(np.sign(lam[n] - lam[m]) for m, n in pairs)
    diff = math.prod(lam[n] - lam[m] for m, n in pairs)
    return (pfaffian(T), float(sgn)), (pfaffian(S), diff)


def hyperpfaffian_sum_oracle(a: ExtForm) -> complex:
    """PF by the signed sum over ordered partitions into blocks, divided by n!."""
    D, k = a.dim, a.degree
    if D > MAX_SUM_ORACLE_DIM:
        raise ValueError(f"sum oracle limited to D <= {MAX_SUM_ORACLE_DIM}")
    if k == 0 or D % k:
        raise ValueError(f"degree {k} does not divide dimension {D}")
    n = D // k
    full = (1 << D) - 1
    blocks = [key for key, _ in a.items()]

    def rec(used: int, chosen: list) -> complex:
        if used == full:
            sign = sign_of_concatenation([_indices(b) for b in chosen])
            return sign * math.prod(a.coeff(b) for b in chosen)
        total = 0j
        for b in blocks:
            if not b & used:
                total += rec(used | b, chosen + [b])
        return total

    return rec(0, []) / math.factorial(n)


def _indices(bits: int) -> list[int]:
    return [i + 1 for i in range(bits.bit_length()) if bits >> i & 1]


def exhaustive_sign(parts) -> int:
    """Permutation parity of the concatenation by explicit sorting (bubble count)."""
    seq = [i for p in parts for i in p]
    if len(set(seq)) != len(seq):
        return 0
    inv = sum(1 for i, j in itertools.combinations(range(len(seq)), 2) if seq[i] > seq[j])
    return -1 if inv % 2 else 1


# oracle selection ------------------------------------------------------------

MC_SIGMAS = 5.0


def closed_form_value(spec) -> tuple[str, float] | None:
    """(name, value) of the product-formula reference for the ensemble's measure, if any.

    Gaussian: Mehta; Jacobi: Selberg; uniform: Selberg on [0, 1] rescaled to
    [lo, hi]; circular: Dyson.  Atoms rule every closed form out.
    """
    mu, N, beta = spec.measure, spec.N, spec.beta
    if mu.atoms:
        return None
    gamma = beta / 2
    mass = mu.scale ** N
    if isinstance(mu, GaussianMeasure):
        return "mehta", mass * mehta_value(gamma, N)
    if isinstance(mu, JacobiMeasure):
        return "selberg", mass * selberg_value(gamma, mu.a, mu.b, N)
    if isinstance(mu, UniformMeasure):
        width = mu.hi - mu.lo
        return "selberg", mass * width ** (beta * N * (N - 1) / 2) * selberg_value(gamma, 1.0, 1.0, N)
    if isinstance(mu, CircularMeasure):
        return "dyson", mass * dyson_value(beta, N, normalized=mu.normalized)
    return None


def reference_values(spec, mode: str = "auto", samples: int = 200_000, seed: int = 0) -> dict:
    """Oracle name -> (value, tolerance override or None).

    ``auto``: the closed form when one exists, and direct quadrature when
    N <= 3 or no closed form exists.  ``all`` adds direct quadrature up to
    the tensor limit and Monte Carlo, whose tolerance is MC_SIGMAS standard
    errors.  ``none`` returns nothing.
    """
    if mode == "none":
        return {}
    if mode not in ("auto", "all"):
        raise ValueError(f"unknown oracle mode {mode!r}")
    out = {}
    closed = closed_form_value(spec)
    if closed is not None:
        out[closed[0]] = (closed[1], None)
    direct_ok = not spec.measure.atoms and (
        spec.N <= 3 or (spec.N <= MAX_TENSOR_N and (mode == "all" or closed is None)))
    if direct_ok:
        try:
            value, _ = direct_partition_function(spec)
            out["direct"] = (value, None)
        except ValueError:
            pass
    if mode == "all" and not spec.measure.atoms and spec.N <= MAX_MC_N and hasattr(spec.measure, "sample"):
        value, err = direct_partition_function(spec, "monte-carlo", samples=samples, seed=seed)
        out["monte_carlo"] = (value, MC_SIGMAS * err / max(abs(value), 1e-300))
    return out
