"""Weight measures with moment, incomplete-moment and skew-moment providers.

Moments are of the polynomial variable: x itself on the real line, and
z = exp(i theta) for circular measures.  Every measure may carry a finite
list of atoms ``(x_n, c_n)`` which contribute mass ``c_n * w(x_n)`` at x_n.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy import special

DEFAULT_QUAD_ORDER = 80


class UnsupportedMeasureError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> complex:
        return complex(np.sum(self.weights * f(self.nodes)))


def circular_weight(N: int, beta: int, theta):
    """(-i)^{s} exp(-i s theta) with s = beta (N - 1) / 2.

    Half-integer powers use (-i)^{1/2} = exp(-i pi / 4) and the half-angle
    branch exp(-i theta / 2) on [-pi, pi).
    """
    s = beta * (N - 1) / 2
    return np.exp(-0.5j * math.pi * s) * np.exp(-1j * s * np.asarray(theta))


class _Memo:
    """Build-once memo table, safe for concurrent readers."""

    def __init__(self):
        self._data: dict = {}
        self._lock = threading.Lock()

    def get(self, key, compute):
        try:
            return self._data[key]
        except KeyError:
            pass
        value = compute()
        with self._lock:
            return self._data.setdefault(key, value)


@dataclass(frozen=True, eq=False)
class Measure:
    """Base class: a continuous part with density ``w`` plus optional atoms.

    ``scale`` multiplies the continuous density (not the atoms' ``w(x_n)``
    factor, which always uses the unscaled weight).
    """

    atoms: tuple = ()
    scale: float = 1.0
    quad_order: int = DEFAULT_QUAD_ORDER
    _memo: _Memo = field(default_factory=_Memo, repr=False, compare=False)

    kind = "abstract"
    circular = False

    # subclass hooks -----------------------------------------------------
    def density(self, x):
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def _moment(self, k: int) -> complex:
        raise NotImplementedError

    def _incomplete(self, k: int, x: float) -> complex:
        raise UnsupportedMeasureError(f"{self.kind} has no incomplete moments")

    def _rule(self, order: int) -> QuadratureRule:
        raise UnsupportedMeasureError(f"{self.kind} has no quadrature rule")

    def _skew(self, j: int, k: int, order: int | None = None) -> complex:
        # 1/2 int x^j [M(k) - 2 I_k(x)] dw(x), unscaled, by 1-D outer quadrature
        rule = self._rule(order or self.quad_order)
        mk = self._moment(k)
        inner = np.array([mk - 2 * self._incomplete(k, x) for x in rule.nodes])
        return 0.5 * complex(np.sum(rule.weights * self.variable(rule.nodes) ** j * inner))

    def skew_moment_quadrature(self, j: int, k: int, order: int | None = None) -> complex:
        """Continuous-part skew moment by the generic quadrature route.

        Used as a cross-check for measures with a closed-form skew moment.
        """
        return self.scale ** 2 * Measure._skew(self, j, k, order)

    def variable(self, x):
        """The point at which polynomials are evaluated."""
        return x

    # public API ----------------------------------------------------------
    def moment(self, k: int) -> complex:
        if k < 0:
            raise ValueError("moment order must be nonnegative")
        cont = self._memo.get(("m", k), lambda: self.scale * self._moment(k))
        return cont + sum(c * self.density(x) * self.variable(x) ** k for x, c in self.atoms)

    def incomplete_moment(self, k: int, x: float) -> complex:
        """Integral of (variable)^k over the continuous part up to x."""
        return self.scale * self._incomplete(k, x)

    def skew_moment(self, j: int, k: int) -> complex:
        """M(j, k) = 1/2 int int x^j y^k sgn(y - x) dnu(x) dnu(y)."""
        if j < 0 or k < 0:
            raise ValueError("skew-moment orders must be nonnegative")
        if j == k:
            return 0j
        if j > k:
            return -self.skew_moment(k, j)
        total = self._memo.get(("s", j, k), lambda: self.scale ** 2 * self._skew(j, k))
        if not self.atoms:
            return total
        mj, mk = self._continuous_moment(j), self._continuous_moment(k)
        for x, c in self.atoms:
            a = c * self.density(x)
            z = self.variable(x)
            # atom at x against the continuum, both orderings
            total += 0.5 * a * z ** j * (mk - 2 * self.incomplete_moment(k, x))
            total += 0.5 * a * z ** k * (2 * self.incomplete_moment(j, x) - mj)
        for xm, cm in self.atoms:
            for xn, cn in self.atoms:
                if xm == xn:
                    continue
                total += (0.5 * cm * cn * self.density(xm) * self.density(xn)
                          * self.variable(xm) ** j * self.variable(xn) ** k * np.sign(xn - xm))
        return total

    def _continuous_moment(self, k: int) -> complex:
        return self._memo.get(("m", k), lambda: self.scale * self._moment(k))

    def quadrature(self, order: int | None = None) -> QuadratureRule:
        """Gauss-type rule for the continuous part (scale included)."""
        order = order or self.quad_order
        if order < 1:
            raise ValueError("quadrature order must be positive")
        rule = self._rule(order)
        return QuadratureRule(rule.nodes, self.scale * rule.weights)

    def with_atoms(self, atoms: Sequence[tuple[float, complex]]) -> "Measure":
        lo, hi = self.support()
        for x, _ in atoms:
            if not (lo <= x <= hi) or not math.isfinite(x):
                raise ValueError(f"atom at {x} outside support [{lo}, {hi}]")
        return replace(self, atoms=tuple(self.atoms) + tuple((float(x), complex(c)) for x, c in atoms),
                       _memo=self._memo)

    def scaled(self, t: float) -> "Measure":
        return replace(self, scale=self.scale * t, _memo=_Memo())

    def centered(self) -> "Measure":
        """Translate with the same |x - y| statistics and its support centred at 0.

        Moments about a far-off origin cancel badly in double precision; the
        partition function is translation invariant, so it is evaluated here.
        """
        return self

    def _shifted_atoms(self, c: float) -> tuple:
        return tuple((x - c, a) for x, a in self.atoms)

    def total_mass(self) -> complex:
        return self.moment(0)

    def to_config(self) -> dict:
        cfg = {"kind": self.kind, "quad_order": self.quad_order}
        if self.atoms:
            cfg["atoms"] = [{"x": x, "c": c.real if c.imag == 0 else [c.real, c.imag]} for x, c in self.atoms]
        if self.scale != 1.0:
            cfg["scale"] = self.scale
        return cfg


@dataclass(frozen=True, eq=False)
class GaussianMeasure(Measure):
    """exp(-x^2/2) / sqrt(2 pi) dx on the real line."""

    kind = "gaussian"

    def density(self, x):
        return np.exp(-np.asarray(x, dtype=float) ** 2 / 2) / math.sqrt(2 * math.pi)

    def support(self):
        return -math.inf, math.inf

    def _moment(self, k):
        if k % 2:
            return 0.0
        return float(math.prod(range(k - 1, 0, -2)))

    def _incomplete(self, k, x):
        # I_k(x) = -x^{k-1} phi(x) + (k-1) I_{k-2}(x)
        if x == math.inf:
            return self._moment(k)
        if x == -math.inf:
            return 0.0
        phi = math.exp(-x * x / 2) / math.sqrt(2 * math.pi)
        prev, cur = special.ndtr(x), -phi  # I_0, I_1
        if k == 0:
            return float(prev)
        for m in range(2, k + 1):
            prev, cur = cur, -x ** (m - 1) * phi + (m - 1) * prev
        return float(cur)

    def _rule(self, order):
        x, w = special.roots_hermitenorm(order)
        return QuadratureRule(x, w / math.sqrt(2 * math.pi))

    def _skew(self, j, k):
        return gaussian_skew_moment(j, k)

    def sample(self, rng: np.random.Generator, size):
        return rng.standard_normal(size)


def gaussian_skew_moment(j: int, k: int) -> float:
    """Closed-form skew moment of the standard Gaussian.

    Writes I_k(x) = P_k(x) phi(x) + c_k Phi(x) and uses
    E[x^m phi(x)] = int x^m e^{-x^2} dx / (2 pi) and the Stein recurrence
    E[x^j Phi(x)] = (j-1) E[x^{j-2} Phi(x)] + E[x^{j-1} phi(x)].
    """
    def e_phi(m):  # E[x^m phi(x)] for x ~ N(0, 1)
        if m % 2:
            return 0.0
        return math.gamma((m + 1) / 2) / (2 * math.pi)

    # P_k as ascending coefficients, c_k scalar
    P_prev, c_prev = [0.0], 1.0        # I_0 = Phi
    P_cur, c_cur = [-1.0], 0.0          # I_1 = -phi
    if k == 0:
        P_cur, c_cur = P_prev, c_prev
    for m in range(2, k + 1):
        nxt = [0.0] * max(m, len(P_prev))
        nxt[m - 1] -= 1.0
        for i, c in enumerate(P_prev):
            nxt[i] += (m - 1) * c
        P_prev, c_prev, P_cur, c_cur = P_cur, c_cur, nxt, (m - 1) * c_prev

    a = [0.5, e_phi(0)]  # E[x^j Phi(x)]
    for m in range(2, j + 1):
        a.append((m - 1) * a[m - 2] + e_phi(m - 1))
    mj = float(math.prod(range(j - 1, 0, -2))) if j % 2 == 0 else 0.0
    mk = float(math.prod(range(k - 1, 0, -2))) if k % 2 == 0 else 0.0
    cross = sum(c * e_phi(j + i) for i, c in enumerate(P_cur))
    return 0.5 * (mj * mk - 2 * cross - 2 * c_cur * a[j])


@dataclass(frozen=True, eq=False)
class JacobiMeasure(Measure):
    """x^{a-1} (1-x)^{b-1} dx on [0, 1] (not normalised), translated by -origin.

    With ``origin = s`` the variable is u = t - s for t in [0, 1].  Moments use
    u = (1 - s) t - s (1 - t), a sum of beta integrals of equal sign pattern,
    which stays accurate for s = 1/2 where raw monomial moments cancel.
    """

    a: float = 1.0
    b: float = 1.0
    origin: float = 0.0
    kind = "jacobi"

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("jacobi parameters must be positive")

    def density(self, x):
        t = np.asarray(x, dtype=float) + self.origin
        return t ** (self.a - 1) * (1 - t) ** (self.b - 1)

    def support(self):
        return -self.origin, 1.0 - self.origin

    def _terms(self, k):
        # coefficients and beta parameters of u^k = sum_i c_i t^i (1 - t)^(k - i)
        def build():
            s = self.origin
            if s == 0:
                i = np.array([k])
                c = np.ones(1)
            else:
                i = np.arange(k + 1)
                c = special.comb(k, i) * (1 - s) ** i * (-s) ** (k - i)
            p, q = self.a + i, self.b + k - i
            return c * np.exp(special.betaln(p, q)), p, q
        return self._memo.get(("terms", k), build)

    def _moment(self, k):
        c, _, _ = self._terms(k)
        return float(np.sum(c))

    def _incomplete(self, k, x):
        t = min(max(x + self.origin, 0.0), 1.0)
        c, p, q = self._terms(k)
        return float(np.sum(c * special.betainc(p, q, t)))

    def _rule(self, order):
        t, w = special.roots_jacobi(order, self.b - 1, self.a - 1)
        return QuadratureRule((1 + t) / 2 - self.origin, w / 2 ** (self.a + self.b - 1))

    def _skew(self, j, k):
        size = max(32, 1 << k.bit_length())
        A = self._memo.get(("below", size), lambda: self._ordered_matrix(size))
        return 0.5 * (A[j, k] - A[k, j])

    def _ordered_matrix(self, size):
        """A[j, k] = int int_{x < y} u(x)^j u(y)^k dw(x) dw(y), with u = t - origin.

        Split at y = 1/2 and substitute x = y r below, x = 1 - (1 - y) r above;
        every remaining factor is analytic, so Gauss-Jacobi converges fast.
        """
        a, b, s = self.a, self.b, self.origin
        n = max(self.quad_order, size + 40)
        powers = np.arange(size)
        r_lo, w_lo = _gauss_jacobi01(n, a - 1)
        r_hi, w_hi = _gauss_jacobi01(n, b - 1)
        full = self._rule(n)
        total = (full.nodes[:, None] ** powers).T @ full.weights  # moments of u^j, nodes already shifted

        # y in [0, 1/2], y = v / 2: inner = y^a sum_m w_m u(y r_m)^j (1 - y r_m)^(b-1)
        v, wv = _gauss_jacobi01(n, 2 * a - 1)
        y = v / 2
        x = y[:, None] * r_lo[None, :]
        inner = np.einsum("m,ymj->yj", w_lo, ((x - s)[..., None] ** powers) * ((1 - x) ** (b - 1))[..., None])
        outer = wv * 0.5 ** (2 * a) * (1 - y) ** (b - 1)
        A = ((y - s)[:, None] ** powers).T @ (outer[:, None] * inner)

        # y in [1/2, 1], y = 1 - v / 2: inner = M_j - (1 - y)^b sum_m w_m u(x_m)^j x_m^(a-1)
        v, wv = _gauss_jacobi01(n, b - 1)
        y = 1 - v / 2
        upper_q = ((y - s)[:, None] ** powers).T @ (wv * 0.5 ** b * y ** (a - 1))
        A += np.outer(upper_q, total)
        v, wv = _gauss_jacobi01(n, 2 * b - 1)
        y = 1 - v / 2
        x = 1 - (1 - y)[:, None] * r_hi[None, :]
        tail = np.einsum("m,ymj->yj", w_hi, ((x - s)[..., None] ** powers) * (x ** (a - 1))[..., None])
        outer = wv * 0.5 ** (2 * b) * y ** (a - 1)
        A -= ((y - s)[:, None] ** powers).T @ (outer[:, None] * tail)
        return A.T

    def centered(self):
        if self.origin == 0.5:
            return self
        c = 0.5 - self.origin
        return replace(self, origin=0.5, atoms=self._shifted_atoms(c), _memo=_Memo())

    def sample(self, rng, size):
        return rng.beta(self.a, self.b, size) - self.origin

    def to_config(self):
        cfg = {**super().to_config(), "a": self.a, "b": self.b}
        if self.origin:
            cfg["origin"] = self.origin
        return cfg


def _gauss_jacobi01(order: int, alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss rule for int_0^1 f(v) v^alpha dv."""
    t, w = special.roots_jacobi(order, 0.0, alpha)
    return (1 + t) / 2, w / 2 ** (alpha + 1)


@dataclass(frozen=True, eq=False)
class UniformMeasure(Measure):
    """Uniform probability measure on [lo, hi]."""

    lo: float = 0.0
    hi: float = 1.0
    kind = "uniform"

    def __post_init__(self):
        if not self.hi > self.lo:
            raise ValueError("uniform measure needs hi > lo")

    def density(self, x):
        x = np.asarray(x, dtype=float)
        return np.where((x >= self.lo) & (x <= self.hi), 1.0 / (self.hi - self.lo), 0.0)

    def support(self):
        return self.lo, self.hi

    def _moment(self, k):
        return (self.hi ** (k + 1) - self.lo ** (k + 1)) / ((k + 1) * (self.hi - self.lo))

    def _incomplete(self, k, x):
        x = min(max(x, self.lo), self.hi)
        return (x ** (k + 1) - self.lo ** (k + 1)) / ((k + 1) * (self.hi - self.lo))

    def _rule(self, order):
        t, w = special.roots_legendre(order)
        half = (self.hi - self.lo) / 2
        return QuadratureRule(self.lo + half * (t + 1), w / 2)

    def centered(self):
        c = (self.lo + self.hi) / 2
        if c == 0:
            return self
        return replace(self, lo=self.lo - c, hi=self.hi - c, atoms=self._shifted_atoms(c), _memo=_Memo())

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)

    def to_config(self):
        return {**super().to_config(), "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True, eq=False)
class CustomMeasure(Measure):
    """w(x) dx on a finite interval, integrated by Gauss-Legendre."""

    weight: Callable | None = None
    lo: float = 0.0
    hi: float = 1.0
    kind = "custom"

    def density(self, x):
        return np.asarray(self.weight(np.asarray(x, dtype=float)), dtype=float)

    def support(self):
        return self.lo, self.hi

    def _legendre(self, a, b, order):
        t, w = special.roots_legendre(order)
        half = (b - a) / 2
        x = a + half * (t + 1)
        return x, w * half * self.density(x)

    def _rule(self, order):
        return QuadratureRule(*self._legendre(self.lo, self.hi, order))

    def _moment(self, k):
        x, w = self._legendre(self.lo, self.hi, self.quad_order)
        return float(np.sum(w * x ** k))

    def _incomplete(self, k, x):
        x = min(max(x, self.lo), self.hi)
        if x == self.lo:
            return 0.0
        nodes, w = self._legendre(self.lo, x, self.quad_order)
        return float(np.sum(w * nodes ** k))

    def centered(self):
        c = (self.lo + self.hi) / 2
        if c == 0:
            return self
        base = self.weight
        return replace(self, weight=lambda x: base(np.asarray(x) + c), lo=self.lo - c, hi=self.hi - c,
                       atoms=self._shifted_atoms(c), _memo=_Memo())

    def sample(self, rng, size):
        return rng.uniform(self.lo, self.hi, size)

    def to_config(self):
        raise UnsupportedMeasureError("custom weights cannot be serialised")


def _arc(a: float, lo: float, hi: float) -> complex:
    """int_lo^hi exp(i a t) dt."""
    if a == 0:
        return complex(hi - lo)
    return (np.exp(1j * a * hi) - np.exp(1j * a * lo)) / (1j * a)


@dataclass(frozen=True, eq=False)
class CircularMeasure(Measure):
    """The complex measure (-i e^{-i theta})^{beta (N-1)/2} d theta on [-pi, pi).

    Moments are taken of z = exp(i theta).  With ``normalized`` the base
    measure is d theta / 2 pi instead of d theta.
    """

    N: int = 1
    beta: int = 1
    normalized: bool = False
    kind = "circular"
    circular = True

    @property
    def shift(self) -> float:
        return self.beta * (self.N - 1) / 2

    @property
    def _const(self) -> complex:
        c = np.exp(-0.5j * math.pi * self.shift)
        return c / (2 * math.pi) if self.normalized else c

    def density(self, theta):
        w = circular_weight(self.N, self.beta, theta)
        return w / (2 * math.pi) if self.normalized else w

    def support(self):
        return -math.pi, math.pi

    def variable(self, theta):
        return np.exp(1j * np.asarray(theta))

    def _moment(self, k):
        return self._const * _arc(k - self.shift, -math.pi, math.pi)

    def _incomplete(self, k, theta):
        return self._const * _arc(k - self.shift, -math.pi, theta)

    def _skew(self, j, k):
        # 1/2 int e^{ia t} [G_b - 2 F_b(t)] dt,  F_b(t) = int_{-pi}^t e^{ib s} ds
        a, b = j - self.shift, k - self.shift
        pi = math.pi
        Ga, Gb = _arc(a, -pi, pi), _arc(b, -pi, pi)
        if b != 0:
            outer = Ga * Gb - (2 / (1j * b)) * (_arc(a + b, -pi, pi) - np.exp(-1j * b * pi) * Ga)
        else:
            # F_0(t) = t + pi
            t_term = 0.0 if a == 0 else (2 * pi * math.cos(a * pi) - Ga) / (1j * a)
            outer = Ga * Gb - 2 * (pi * Ga + t_term)
        return 0.5 * self._const ** 2 * outer

    def _rule(self, order):
        theta = -math.pi + 2 * math.pi * np.arange(order) / order
        return QuadratureRule(theta, (2 * math.pi / order) * self.density(theta))

    def sample(self, rng, size):
        return rng.uniform(-math.pi, math.pi, size)

    def to_config(self):
        return {**super().to_config(), "N": self.N, "beta": self.beta, "normalized": self.normalized}


def measure_from_config(cfg: dict) -> Measure:
    """Build a measure from a JSON-style descriptor."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    common = {}
    if "quad_order" in cfg:
        common["quad_order"] = int(cfg.pop("quad_order"))
    if "scale" in cfg:
        common["scale"] = float(cfg.pop("scale"))
    atoms = cfg.pop("atoms", [])
    if kind == "gaussian":
        m = GaussianMeasure(**common)
    elif kind == "jacobi":
        m = JacobiMeasure(a=float(cfg.get("a", 1.0)), b=float(cfg.get("b", 1.0)),
                          origin=float(cfg.get("origin", 0.0)), **common)
    elif kind == "uniform":
        m = UniformMeasure(lo=float(cfg.get("lo", 0.0)), hi=float(cfg.get("hi", 1.0)), **common)
    elif kind == "circular":
        m = CircularMeasure(N=int(cfg.get("N", 1)), beta=int(cfg.get("beta", 1)),
                            normalized=bool(cfg.get("normalized", False)), **common)
    else:
        raise UnsupportedMeasureError(f"unknown measure kind {kind!r}")
    if atoms:
        parsed = []
        for a in atoms:
            c = a.get("c", 1.0)
            parsed.append((float(a["x"]), complex(*c) if isinstance(c, (list, tuple)) else complex(c)))
        m = m.with_atoms(parsed)
    return m
