"""Partition functions of beta = L^2 and beta = L^2 + 1 ensembles as hyperpfaffians.

For a complete monic family p_1..p_{NL}, omega(x) = sum_t Wr(p_t; x) e_t is an
L-form on C^{NL}.  Depending on the parity of L and N, Z_N is the
hyperpfaffian of one of:

* ``EVEN_L``        int omega dnu
* ``ODD_L_EVEN_N``  1/2 int int omega(x) ^ omega(y) sgn(y - x)
* ``ODD_L_ODD_N``   the same plus int omega ^ e', on C^{(N+1)L}
* ``ADJACENT``      (beta = L^2 + 1) the kernel (y^M - x^M)^2 / (y - x)

Circular ensembles use the same forms with x = exp(i theta) and the complex
weight of :class:`~hyperpf.measures.CircularMeasure`.
"""
from __future__ import annotations

import enum
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import comb, isqrt

import numpy as np

from .exterior import (CHUNK, ExtForm, _accumulate, _concat_sign_array, hyperpfaffian,
                       matrix_from_form, wedge)
from .measures import CircularMeasure, Measure
from .polyfam import CompleteFamily, standard_family, wronskian, wronskian_poly

MAX_FORM_KEYS = 5_000_000
REAL_TOL = 1e-9


class InvalidSpecError(ValueError):
    pass


class NumericalError(ArithmeticError):
    pass


class Case(enum.Enum):
    EVEN_L = "case1"
    ODD_L_EVEN_N = "case2"
    ODD_L_ODD_N = "case3"
    ADJACENT = "case4"


def split_beta(beta: int) -> tuple[int, bool]:
    """Return (L, adjacent) with beta = L^2 or L^2 + 1 (the latter for odd L)."""
    if beta < 1:
        raise InvalidSpecError("beta must be L^2 or L^2+1 for a positive integer L")
    L = isqrt(beta)
    if L * L == beta:
        return L, False
    L = isqrt(beta - 1)
    if L * L + 1 == beta and L % 2 == 1:
        return L, True
    raise InvalidSpecError("beta must be L^2 or L^2+1 (with L odd)")


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    beta: int
    N: int
    measure: Measure
    family: CompleteFamily
    L: int = 0
    geometry: str = "line"

    def __post_init__(self):
        L, adjacent = split_beta(self.beta)
        if self.L and self.L != L:
            raise InvalidSpecError(f"L={self.L} inconsistent with beta={self.beta}")
        object.__setattr__(self, "L", L)
        if self.N < 1:
            raise InvalidSpecError("N must be positive")
        if adjacent and self.N % 2:
            raise InvalidSpecError("beta = L^2+1 requires N even")
        if self.family.size != self.N * L:
            raise InvalidSpecError(f"family size {self.family.size} != N*L = {self.N * L}")
        geometry = "circle" if self.measure.circular else "line"
        if self.geometry not in ("line", "circle"):
            raise InvalidSpecError(f"unknown geometry {self.geometry!r}")
        if self.geometry != geometry:
            raise InvalidSpecError(f"{self.measure.kind} measure is incompatible with geometry {self.geometry!r}")
        keys = comb(self.dimension, self.form_degree)
        if keys > MAX_FORM_KEYS:
            raise InvalidSpecError(f"form would have {keys} keys (limit {MAX_FORM_KEYS})")

    @classmethod
    def create(cls, beta: int, N: int, measure: Measure, family: str = "monomial",
               seed: int | None = 0) -> "EnsembleSpec":
        L, _ = split_beta(beta)
        if N < 1:
            raise InvalidSpecError("N must be positive")
        if isinstance(measure, CircularMeasure) and (measure.N != N or measure.beta != beta):
            raise InvalidSpecError("circular measure must be built for the same (N, beta)")
        fam = standard_family(family, N * L, seed=seed)
        return cls(beta, N, measure, fam, geometry="circle" if measure.circular else "line")

    @property
    def case(self) -> Case:
        if self.beta == self.L ** 2 + 1:
            return Case.ADJACENT
        if self.L % 2 == 0:
            return Case.EVEN_L
        return Case.ODD_L_EVEN_N if self.N % 2 == 0 else Case.ODD_L_ODD_N

    @property
    def dimension(self) -> int:
        L, N = self.L, self.N
        return (N + 1) * L if self.case is Case.ODD_L_ODD_N else N * L

    @property
    def form_degree(self) -> int:
        return self.L if self.case is Case.EVEN_L else 2 * self.L

    @property
    def wedges(self) -> int:
        return self.dimension // self.form_degree


@dataclass
class ZnResult:
    value: complex
    case: Case
    form_dimension: int
    form_degree: int
    spec: EnsembleSpec | None = None
    seconds: float = 0.0
    oracle_values: dict = field(default_factory=dict)
    discrepancies: dict = field(default_factory=dict)

    def add_oracle(self, name: str, value: complex) -> float:
        value = complex(value)
        err = abs(self.value - value) / max(abs(value), 1e-300)
        self.oracle_values[name] = value
        self.discrepancies[name] = err
        return err

    def to_json(self) -> dict:
        s = self.spec
        out = {
            "case": self.case.value,
            "value": {"re": self.value.real, "im": self.value.imag},
            "form_dimension": self.form_dimension,
            "form_degree": self.form_degree,
            "oracles": {k: {"value": v.real if v.imag == 0 else {"re": v.real, "im": v.imag},
                            "rel_err": self.discrepancies[k]}
                        for k, v in sorted(self.oracle_values.items())},
            "seconds": self.seconds,
        }
        if s is not None:
            out.update(beta=s.beta, L=s.L, N=s.N, geometry=s.geometry, family=s.family.kind)
        return out


# Wronskian tables -----------------------------------------------------------

def wronskian_table(spec: EnsembleSpec) -> tuple[np.ndarray, np.ndarray]:
    """Bit-set keys of all increasing t and the matrix of Wr(p_t) coefficients.

    Row r of the coefficient matrix holds the ascending coefficients of the
    Wronskian polynomial for key r.
    """
    NL, L = spec.family.size, spec.L
    tuples = list(itertools.combinations(range(1, NL + 1), L))
    polys = [wronskian_poly(spec.family, t).coef for t in tuples]
    width = max(p.size for p in polys)
    C = np.zeros((len(tuples), width), dtype=np.complex128)
    for r, p in enumerate(polys):
        C[r, : p.size] = p
    keys = np.array([sum(1 << (i - 1) for i in t) for t in tuples], dtype=np.uint64)
    return keys, C


def _variable(spec: EnsembleSpec, x):
    return np.exp(1j * x) if spec.geometry == "circle" else x


def build_omega(spec: EnsembleSpec, x: complex) -> ExtForm:
    """omega(x) = sum_t Wr(p_t; x) e_t, Wronskians evaluated numerically.

    For circular specs ``x`` is the point on the unit circle.
    """
    NL, L = spec.family.size, spec.L
    coeffs = {}
    for t in itertools.combinations(range(1, NL + 1), L):
        coeffs[sum(1 << (i - 1) for i in t)] = wronskian(spec.family, t, x)
    return ExtForm(NL, L, coeffs)


def _moment_vector(measure: Measure, n: int) -> np.ndarray:
    return np.array([measure.moment(k) for k in range(n)], dtype=np.complex128)


def integrated_omega(spec: EnsembleSpec, table=None) -> ExtForm:
    """int omega(x) dnu(x), coefficient-wise, via exact moment contraction."""
    keys, C = table if table is not None else wronskian_table(spec)
    vals = C @ _moment_vector(spec.measure, C.shape[1])
    return ExtForm.from_arrays(spec.family.size, spec.L, keys, vals)


def _kernel_matrix(spec: EnsembleSpec, kernel: str, width: int) -> np.ndarray:
    """K[a, b] = int int x^a y^b kernel(x, y) dnu(x) dnu(y)."""
    mu = spec.measure
    K = np.zeros((width, width), dtype=np.complex128)
    if kernel == "sgn":
        for a in range(width):
            for b in range(a + 1, width):
                K[a, b] = 2 * mu.skew_moment(a, b)
                K[b, a] = -K[a, b]
        return K
    if kernel == "case4":
        M = spec.N // 2
        m = _moment_vector(mu, 2 * width + 2 * M)
        # (y^M - x^M)^2/(y - x) = sum_j x^j y^{2M-1-j} - x^{M+j} y^{M-1-j}
        for a in range(width):
            for b in range(width):
                K[a, b] = sum(m[a + j] * m[b + 2 * M - 1 - j] - m[a + M + j] * m[b + M - 1 - j]
                              for j in range(M))
        return K
    raise ValueError(f"unknown kernel {kernel!r}")


def _pair_form(keys: np.ndarray, G: np.ndarray, dim: int, degree: int, workers: int = 1) -> ExtForm:
    """sum over ordered (t, u) of 1/2 G[t, u] e_t ^ e_u."""
    n = keys.size
    step = max(1, CHUNK // max(1, n))
    blocks = [(lo, min(n, lo + step)) for lo in range(0, n, step)]

    def run(block):
        lo, hi = block
        kt = keys[lo:hi]
        disjoint = (kt[:, None] & keys[None, :]) == 0
        it, iu = np.nonzero(disjoint)
        s, t = kt[it], keys[iu]
        sign = _concat_sign_array(s, t, dim)
        return s | t, 0.5 * G[lo:hi][it, iu] * sign

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    k, v = _accumulate(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
    return ExtForm.from_arrays(dim, degree, k, v)


def double_integral_form(spec: EnsembleSpec, kernel: str = "sgn", table=None, workers: int = 1) -> ExtForm:
    """1/2 int int omega(x) ^ omega(y) kernel(x, y) dnu(x) dnu(y).

    The form lives on C^{(N+1)L} for odd-L odd-N specs, otherwise on C^{NL}.
    """
    if spec.case is Case.EVEN_L:
        raise InvalidSpecError("double-integral form is only used for odd L")
    if (kernel == "case4") != (spec.case is Case.ADJACENT):
        raise InvalidSpecError(f"kernel {kernel!r} does not match {spec.case.value}")
    keys, C = table if table is not None else wronskian_table(spec)
    K = _kernel_matrix(spec, kernel, C.shape[1])
    G = C @ K @ C.T
    return _pair_form(keys, G, spec.dimension, 2 * spec.L, workers)


def epsilon_prime(spec: EnsembleSpec) -> ExtForm:
    NL, L = spec.N * spec.L, spec.L
    return ExtForm.basis(NL + L, range(NL + 1, NL + L + 1))


def border_term(spec: EnsembleSpec, table=None) -> ExtForm:
    """int omega(x) ^ e' dnu(x) on C^{(N+1)L}."""
    if spec.case is not Case.ODD_L_ODD_N:
        raise InvalidSpecError("border term is only used for odd L and odd N")
    eps = epsilon_prime(spec)
    return wedge(integrated_omega(spec, table).embed(eps.dim), eps)


def assembled_form(spec: EnsembleSpec, workers: int = 1) -> ExtForm:
    """The form whose hyperpfaffian is Z_N (or C_N)."""
    table = wronskian_table(spec)
    case = spec.case
    if case is Case.EVEN_L:
        return integrated_omega(spec, table)
    if case is Case.ODD_L_EVEN_N:
        return double_integral_form(spec, "sgn", table, workers)
    if case is Case.ODD_L_ODD_N:
        return double_integral_form(spec, "sgn", table, workers) + border_term(spec, table)
    return double_integral_form(spec, "case4", table, workers)


def partition_function(spec: EnsembleSpec, workers: int = 1) -> ZnResult:
    """Z_N (or C_N for circular specs) as a hyperpfaffian."""
    start = time.perf_counter()
    # translation invariant: evaluate on the centred measure for accuracy
    form = assembled_form(replace(spec, measure=spec.measure.centered()), workers)
    value = hyperpfaffian(form, workers=workers)
    elapsed = time.perf_counter() - start
    if spec.geometry == "line" and abs(value.imag) > REAL_TOL * (1 + abs(value.real)):
        raise NumericalError(f"partition function has imaginary part {value.imag:g}")
    return ZnResult(value, spec.case, form.dim, form.degree, spec=spec, seconds=elapsed)


def classical_matrices(spec: EnsembleSpec) -> np.ndarray:
    """W (beta=4), U / U' (beta=1) or Y (beta=2) with Pf equal to Z_N.

    Entries are the collected coefficients of the assembled 2-form, e.g.
    U[m, n] = int int p_m(x) p_n(y) sgn(y - x) without a factor 1/2.
    """
    if spec.L not in (1, 2):
        raise InvalidSpecError("classical matrices exist only for L in {1, 2}")
    return matrix_from_form(assembled_form(spec))


def correlation(spec: EnsembleSpec, points, n: int | None = None, z_mu: complex | None = None) -> float:
    """n-point correlation R_n(points) as the c_1...c_n coefficient of Z^{mu+nu}/Z^mu.

    nu places atoms c_i w(x_i) at the points; the coefficient is extracted by
    inclusion-exclusion over the 2^n subsets with c = 1 on the subset.
    """
    points = [float(p) for p in points]
    n = len(points) if n is None else n
    if n != len(points):
        raise ValueError("need exactly n points")
    if n == 0:
        return 1.0
    if n > min(spec.N, 3):
        raise InvalidSpecError("correlation supports n <= min(N, 3)")
    if spec.geometry != "line":
        raise InvalidSpecError("correlations are implemented for real-line ensembles")
    if len(set(points)) != n:
        raise ValueError("correlation points must be distinct")
    base = spec.measure
    if z_mu is None:
        z_mu = partition_function(spec).value
    total = 0j
    for r in range(n + 1):
        for subset in itertools.combinations(points, r):
            m = base.with_atoms([(x, 1.0) for x in subset]) if subset else base
            sub = EnsembleSpec(spec.beta, spec.N, m, spec.family, geometry=spec.geometry)
            total += (-1) ** (n - r) * partition_function(sub).value
    return float((total / z_mu).real)
