"""Sparse exterior algebra over C^D with bit-set multi-indices.

Basis vectors are numbered 1..D as in the usual notation; internally the
vector ``e_i`` is bit ``i - 1`` of a machine word, so ``D <= 64``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

MAX_DIM = 64
DROP_TOL = 1e-300
ANTISYM_TOL = 1e-10
# fixed work-unit size for data-parallel steps; independent of worker count
# so that results do not depend on scheduling
CHUNK = 4096


class DimensionError(ValueError):
    pass


class DegreeError(ValueError):
    pass


def _popcount(x: int) -> int:
    return x.bit_count()


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Increasing multi-index t: {1..k} -> {1..D}, stored as a bit set."""

    bits: int
    dim: int

    def __post_init__(self):
        if not 0 < self.dim <= MAX_DIM:
            raise DimensionError(f"dimension {self.dim} outside 1..{MAX_DIM}")
        if self.bits < 0 or self.bits >> self.dim:
            raise DimensionError(f"index set {self.bits:#x} exceeds dimension {self.dim}")

    @classmethod
    def of(cls, indices: Iterable[int], dim: int) -> "MultiIndex":
        bits = 0
        for i in indices:
            if not 1 <= i <= dim:
                raise DimensionError(f"index {i} outside 1..{dim}")
            if bits >> (i - 1) & 1:
                raise ValueError(f"repeated index {i}")
            bits |= 1 << (i - 1)
        return cls(bits, dim)

    @property
    def degree(self) -> int:
        return _popcount(self.bits)

    @property
    def indices(self) -> tuple[int, ...]:
        return bits_to_indices(self.bits)

    def __iter__(self):
        return iter(self.indices)

    def __len__(self):
        return self.degree


def bits_to_indices(bits: int) -> tuple[int, ...]:
    out = []
    i = 1
    while bits:
        if bits & 1:
            out.append(i)
        bits >>= 1
        i += 1
    return tuple(out)


def indices_to_bits(indices: Iterable[int]) -> int:
    bits = 0
    for i in indices:
        bits |= 1 << (i - 1)
    return bits


def _as_bits(part) -> tuple[int, int | None]:
    if isinstance(part, MultiIndex):
        return part.bits, part.dim
    return indices_to_bits(part), None


def _inversions(s: int, t: int) -> int:
    """Pairs (a in s, b in t) with a > b."""
    count = 0
    while t:
        low = t & -t
        count += _popcount(s & ~((low << 1) - 1))
        t ^= low
    return count


def sign_of_concatenation(parts: Sequence) -> int:
    """Sign relating e_{t1} ^ e_{t2} ^ ... to the wedge of the sorted union.

    Parts are MultiIndex values or iterables of 1-based indices. Returns 0 when
    two parts share an index.
    """
    dims = {d for _, d in map(_as_bits, parts) if d is not None}
    if len(dims) > 1:
        raise DimensionError(f"parts have mismatched dimensions {sorted(dims)}")
    masks = [_as_bits(p)[0] for p in parts]
    seen = 0
    parity = 0
    for m in masks:
        if seen & m:
            return 0
        parity += _inversions(seen, m)
        seen |= m
    return -1 if parity & 1 else 1


def _concat_sign_array(s: np.ndarray, t: np.ndarray, dim: int) -> np.ndarray:
    """Vectorised sign(s, t) for disjoint uint64 bit sets."""
    inv = np.zeros(s.shape, dtype=np.int64)
    for b in range(dim - 1):
        tb = ((t >> np.uint64(b)) & np.uint64(1)).astype(np.int64)
        if not tb.any():
            continue
        inv += tb * np.bitwise_count(s >> np.uint64(b + 1)).astype(np.int64)
    return 1 - 2 * (inv & 1)


class ExtForm:
    """Homogeneous k-form on C^D with complex coefficients keyed by bit set."""

    __slots__ = ("dim", "degree", "_coeffs")

    def __init__(self, dim: int, degree: int, coeffs: Mapping[int, complex] | None = None):
        if not 0 <= dim <= MAX_DIM:
            raise DimensionError(f"dimension {dim} outside 0..{MAX_DIM}")
        if not 0 <= degree <= dim:
            raise DegreeError(f"degree {degree} outside 0..{dim}")
        clean: dict[int, complex] = {}
        for key, c in (coeffs or {}).items():
            key = int(key)
            if key < 0 or key >> dim:
                raise DimensionError(f"key {key:#x} exceeds dimension {dim}")
            if _popcount(key) != degree:
                raise DegreeError(f"key {bits_to_indices(key)} has wrong degree for a {degree}-form")
            c = complex(c)
            if abs(c) >= DROP_TOL:
                clean[key] = c
        self.dim = dim
        self.degree = degree
        self._coeffs = dict(sorted(clean.items()))

    # construction -------------------------------------------------------
    @classmethod
    def scalar(cls, value: complex = 1.0, dim: int = 0) -> "ExtForm":
        return cls(dim, 0, {0: value})

    @classmethod
    def basis(cls, dim: int, indices: Iterable[int], coeff: complex = 1.0) -> "ExtForm":
        idx = tuple(indices)
        key = MultiIndex.of(idx, dim).bits if idx else 0
        # e_{i1} ^ ... in the order given, which may not be sorted
        sign = sign_of_concatenation([[i] for i in idx]) if idx else 1
        return cls(dim, len(idx), {key: sign * coeff})

    @classmethod
    def volume(cls, dim: int) -> "ExtForm":
        return cls(dim, dim, {(1 << dim) - 1: 1.0})

    @classmethod
    def from_arrays(cls, dim: int, degree: int, keys: np.ndarray, values: np.ndarray) -> "ExtForm":
        form = cls(dim, degree)
        keep = np.abs(values) >= DROP_TOL
        form._coeffs = dict(zip(keys[keep].tolist(), values[keep].tolist()))
        return form

    # access --------------------------------------------------------------
    def coeff(self, index) -> complex:
        key = index.bits if isinstance(index, MultiIndex) else (
            index if isinstance(index, int) else indices_to_bits(index))
        return self._coeffs.get(key, 0j)

    def items(self):
        return self._coeffs.items()

    def to_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        keys = np.fromiter(self._coeffs.keys(), dtype=np.uint64, count=len(self._coeffs))
        vals = np.fromiter(self._coeffs.values(), dtype=np.complex128, count=len(self._coeffs))
        return keys, vals

    def __len__(self):
        return len(self._coeffs)

    def __repr__(self):
        terms = ", ".join(f"{bits_to_indices(k)}: {v:.6g}" for k, v in list(self._coeffs.items())[:6])
        more = " ..." if len(self) > 6 else ""
        return f"ExtForm(dim={self.dim}, degree={self.degree}, {{{terms}{more}}})"

    # linear structure ----------------------------------------------------
    def _check_same_space(self, other: "ExtForm"):
        if self.dim != other.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if self.degree != other.degree:
            raise DegreeError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "ExtForm") -> "ExtForm":
        self._check_same_space(other)
        out = dict(self._coeffs)
        for k, v in other._coeffs.items():
            out[k] = out.get(k, 0j) + v
        return ExtForm(self.dim, self.degree, out)

    def __neg__(self):
        return self * -1

    def __sub__(self, other: "ExtForm") -> "ExtForm":
        return self + (-other)

    def __mul__(self, scalar: complex) -> "ExtForm":
        return ExtForm(self.dim, self.degree, {k: scalar * v for k, v in self._coeffs.items()})

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "ExtForm":
        return self * (1 / scalar)

    def __xor__(self, other: "ExtForm") -> "ExtForm":
        return wedge(self, other)

    def embed(self, dim: int) -> "ExtForm":
        """Same coefficients, viewed in a larger ambient dimension."""
        if dim < self.dim:
            raise DimensionError("cannot embed into a smaller dimension")
        out = ExtForm(dim, self.degree)
        out._coeffs = dict(self._coeffs)
        return out

    def allclose(self, other: "ExtForm", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        if self.dim != other.dim or self.degree != other.degree:
            return False
        keys = set(self._coeffs) | set(other._coeffs)
        scale = max([abs(v) for v in self._coeffs.values()] + [abs(v) for v in other._coeffs.values()] + [0.0])
        return all(abs(self.coeff(k) - other.coeff(k)) <= atol + rtol * scale for k in keys)


def _accumulate(keys: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sum values sharing a key; output sorted by key, summation in input order."""
    if keys.size == 0:
        return keys, vals
    uniq, inv = np.unique(keys, return_inverse=True)
    out = np.zeros(uniq.shape, dtype=np.complex128)
    np.add.at(out, inv, vals)
    return uniq, out


def _wedge_block(ka, va, kb, vb, dim):
    overlap = (ka[:, None] & kb[None, :]) != 0
    ia, ib = np.nonzero(~overlap)
    s, t = ka[ia], kb[ib]
    sign = _concat_sign_array(s, t, dim)
    return s | t, va[ia] * vb[ib] * sign


def wedge(a: ExtForm, b: ExtForm) -> ExtForm:
    """Exterior product a ^ b."""
    if a.dim != b.dim:
        raise DimensionError(f"dimension mismatch: {a.dim} vs {b.dim}")
    if a.degree + b.degree > a.dim:
        raise DegreeError(f"degree {a.degree}+{b.degree} exceeds dimension {a.dim}")
    ka, va = a.to_arrays()
    kb, vb = b.to_arrays()
    if ka.size == 0 or kb.size == 0:
        return ExtForm(a.dim, a.degree + b.degree)
    keys, vals = [], []
    for lo in range(0, ka.size, max(1, CHUNK // max(1, kb.size))):
        hi = lo + max(1, CHUNK // max(1, kb.size))
        k, v = _wedge_block(ka[lo:hi], va[lo:hi], kb, vb, a.dim)
        keys.append(k)
        vals.append(v)
    k, v = _accumulate(np.concatenate(keys), np.concatenate(vals))
    return ExtForm.from_arrays(a.dim, a.degree + b.degree, k, v)


def wedge_power(a: ExtForm, n: int) -> ExtForm:
    """n-fold wedge a ^ a ^ ... ^ a; the empty product is the scalar 1."""
    if n < 0:
        raise ValueError("wedge power must be nonnegative")
    if n * a.degree > a.dim:
        raise DegreeError(f"{n} copies of a {a.degree}-form exceed dimension {a.dim}")
    out = ExtForm.scalar(1.0, a.dim)
    for _ in range(n):
        out = wedge(out, a)
    return out


def _hyperpfaffian_leading(a: ExtForm, n: int, workers: int = 1) -> complex:
    """Sum over set partitions into blocks ordered by their smallest element.

    Valid for even degree, where blocks commute and every unordered partition
    appears n! times in the wedge power with the same sign.
    """
    dim = a.dim
    keys, vals = a.to_arrays()
    if keys.size == 0:
        return 0j
    # group keys by their lowest set bit
    low = np.bitwise_count((keys & (~keys + np.uint64(1))) - np.uint64(1))
    groups = {int(m): (keys[low == m], vals[low == m]) for m in np.unique(low)}

    states = np.zeros(1, dtype=np.uint64)
    coeffs = np.ones(1, dtype=np.complex128)
    pool = ThreadPoolExecutor(workers) if workers > 1 else None
    try:
        for _ in range(n):
            first_free = np.bitwise_count(((~states) & (states + np.uint64(1))) - np.uint64(1))
            tasks = []
            for m in np.unique(first_free):
                if int(m) not in groups:
                    continue
                sel = first_free == m
                s, c = states[sel], coeffs[sel]
                kg, vg = groups[int(m)]
                step = max(1, CHUNK // max(1, kg.size))
                for lo in range(0, s.size, step):
                    tasks.append((s[lo:lo + step], c[lo:lo + step], kg, vg))
            if not tasks:
                return 0j
            run = (lambda job: _wedge_block(*job, dim))
            results = list(pool.map(run, tasks)) if pool else [run(t) for t in tasks]
            states, coeffs = _accumulate(np.concatenate([r[0] for r in results]),
                                         np.concatenate([r[1] for r in results]))
            keep = np.abs(coeffs) >= DROP_TOL
            states, coeffs = states[keep], coeffs[keep]
            if states.size == 0:
                return 0j
    finally:
        if pool:
            pool.shutdown()
    full = np.uint64((1 << dim) - 1) if dim < 64 else np.uint64(2**64 - 1)
    hit = states == full
    return complex(coeffs[hit][0]) if hit.any() else 0j


def hyperpfaffian(a: ExtForm, method: str = "auto", workers: int = 1) -> complex:
    """PF(a), defined by a^n / n! = PF(a) * e_1 ^ ... ^ e_D with n = D / deg a.

    ``method="wedge"`` forms the full wedge power; ``"auto"`` uses the
    ordered-partition recursion for even degree (same value, each partition
    visited once) and the wedge power otherwise.
    """
    k, dim = a.degree, a.dim
    if dim == 0:
        return a.coeff(0)
    if k == 0 or dim % k:
        raise DegreeError(f"degree {k} does not divide dimension {dim}")
    n = dim // k
    if method == "auto" and (k % 2 == 0 or n == 1):
        return _hyperpfaffian_leading(a, n, workers)
    if method not in ("auto", "wedge"):
        raise ValueError(f"unknown method {method!r}")
    top = wedge_power(a, n)
    return top.coeff((1 << dim) - 1) / math.factorial(n)


# classical Pfaffians -------------------------------------------------------

def _check_antisymmetric(A: np.ndarray, tol: float = ANTISYM_TOL) -> np.ndarray:
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    scale = 1.0 + (np.abs(A).max() if A.size else 0.0)
    if A.size and np.abs(A + A.T).max() > tol * scale:
        raise ValueError("matrix is not antisymmetric within tolerance")
    return A


def _pfaffian_expansion(A: np.ndarray) -> complex:
    n = A.shape[0]
    memo: dict[int, complex] = {0: 1.0 + 0j}
    entries = A.tolist()

    def pf(mask: int) -> complex:
        hit = memo.get(mask)
        if hit is not None:
            return hit
        i = (mask & -mask).bit_length() - 1
        rest = mask ^ (1 << i)
        total = 0j
        sign = 1
        r = rest
        while r:
            low = r & -r
            j = low.bit_length() - 1
            aij = entries[i][j]
            if aij != 0:
                total += sign * aij * pf(rest ^ low)
            sign = -sign
            r ^= low
        memo[mask] = total
        return total

    return pf((1 << n) - 1)


def _pfaffian_elimination(A: np.ndarray) -> complex:
    """Skew LTL^T reduction with partial pivoting, O(n^3)."""
    A = A.copy()
    n = A.shape[0]
    result = 1.0 + 0j
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(A[k + 1:, k])))
        if kp != k + 1:
            A[[k + 1, kp], :] = A[[kp, k + 1], :]
            A[:, [k + 1, kp]] = A[:, [kp, k + 1]]
            result = -result
        if A[k + 1, k] == 0:
            return 0j
        result *= A[k, k + 1]
        if k + 2 < n:
            tau = A[k, k + 2:] / A[k, k + 1]
            col = A[k + 2:, k + 1].copy()
            A[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return complex(result)


def pfaffian(A, method: str = "auto") -> complex:
    """Pfaffian of an even-order antisymmetric matrix.

    ``expansion`` is first-row Laplace expansion memoised over index subsets
    (the reference algorithm, used up to order 24); ``elimination`` is
    pivoted skew Gaussian elimination.
    """
    A = _check_antisymmetric(A)
    n = A.shape[0]
    if n % 2:
        raise ValueError(f"Pfaffian needs even order, got {n}")
    if n == 0:
        return 1.0 + 0j
    if method == "auto":
        method = "expansion" if n <= 16 else "elimination"
    if method == "expansion":
        if n > 24:
            raise ValueError("expansion Pfaffian limited to order 24")
        return _pfaffian_expansion(A)
    if method == "elimination":
        return _pfaffian_elimination(A)
    raise ValueError(f"unknown method {method!r}")


def form_from_matrix(A) -> ExtForm:
    """The 2-form sum_{m<n} a_mn e_m ^ e_n."""
    A = _check_antisymmetric(A)
    n = A.shape[0]
    coeffs = {}
    for m in range(n):
        for k in range(m + 1, n):
            if A[m, k] != 0:
                coeffs[(1 << m) | (1 << k)] = A[m, k]
    return ExtForm(n, 2, coeffs)


def matrix_from_form(a: ExtForm) -> np.ndarray:
    if a.degree != 2:
        raise DegreeError(f"expected a 2-form, got degree {a.degree}")
    A = np.zeros((a.dim, a.dim), dtype=np.complex128)
    for key, c in a.items():
        m, n = (i - 1 for i in bits_to_indices(key))
        A[m, n] = c
        A[n, m] = -c
    return A
