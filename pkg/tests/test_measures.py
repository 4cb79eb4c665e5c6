import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from hyperpf.measures import (CircularMeasure, CustomMeasure, GaussianMeasure, JacobiMeasure,
                              UniformMeasure, UnsupportedMeasureError, circular_weight,
                              gaussian_skew_moment, measure_from_config)

REAL_MEASURES = [GaussianMeasure(), JacobiMeasure(a=1, b=1), JacobiMeasure(a=2.5, b=1.5),
                 JacobiMeasure(a=2.5, b=1.5, origin=0.5), UniformMeasure(lo=-1, hi=2)]


def test_moment_examples():
    g = GaussianMeasure()
    assert g.moment(1) == 0 and g.moment(2) == 1
    j = JacobiMeasure(a=1, b=1)
    for k in range(8):
        assert j.moment(k) == pytest.approx(1 / (k + 1), rel=1e-14)
    with pytest.raises(ValueError):
        g.moment(-1)


@pytest.mark.parametrize("k", range(9))
def test_gaussian_even_moments(k):
    assert GaussianMeasure().moment(2 * k) == pytest.approx(math.prod(range(2 * k - 1, 0, -2)), rel=1e-12)


def test_incomplete_moment_examples():
    g = GaussianMeasure()
    assert g.incomplete_moment(0, math.inf) == 1
    assert g.incomplete_moment(0, 0.0) == pytest.approx(0.5)
    assert JacobiMeasure(a=1, b=1).incomplete_moment(1, 0.5) == pytest.approx(1 / 8)


@pytest.mark.parametrize("mu", REAL_MEASURES, ids=lambda m: m.kind)
def test_incomplete_moment_at_support_end(mu):
    hi = mu.support()[1]
    for k in range(6):
        assert abs(mu.incomplete_moment(k, hi) - mu.moment(k)) <= 1e-10 * max(1, abs(mu.moment(k)))


@pytest.mark.parametrize("mu", REAL_MEASURES, ids=lambda m: m.kind)
def test_incomplete_moment_by_quadrature(mu):
    lo, hi = mu.support()
    lo = max(lo, -12)
    for k in (0, 1, 3):
        x = 0.3
        want, _ = integrate.quad(lambda y: y ** k * float(mu.density(y)), lo, x, epsabs=1e-13)
        assert mu.incomplete_moment(k, x) == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_skew_moment_examples():
    assert GaussianMeasure().skew_moment(0, 1) == pytest.approx(1 / (2 * math.sqrt(math.pi)), rel=1e-13)
    assert UniformMeasure().skew_moment(0, 1) == pytest.approx(1 / 12, rel=1e-12)
    for mu in REAL_MEASURES:
        assert mu.skew_moment(3, 3) == 0


@pytest.mark.parametrize("mu", REAL_MEASURES + [CircularMeasure(N=3, beta=1)], ids=lambda m: m.kind)
@given(j=st.integers(0, 8), k=st.integers(0, 8))
def test_skew_antisymmetry(mu, j, k):
    assert abs(mu.skew_moment(j, k) + mu.skew_moment(k, j)) <= 1e-12 * max(1, abs(mu.skew_moment(j, k)))


def test_gaussian_skew_closed_form_matches_quadrature():
    g = GaussianMeasure()
    for j in range(10):
        for k in range(j + 1, 10):
            closed = gaussian_skew_moment(j, k)
            quad = g.skew_moment_quadrature(j, k)
            assert abs(closed - quad) <= 1e-11 * max(1, abs(closed))


def test_circular_skew_closed_form_matches_quadrature():
    c = CircularMeasure(N=2, beta=1)
    for j in range(4):
        for k in range(j + 1, 4):
            assert abs(c.skew_moment(j, k) - c.skew_moment_quadrature(j, k, order=4000)) < 1e-4


@pytest.mark.parametrize("mu", [JacobiMeasure(a=2, b=3), UniformMeasure(lo=-1, hi=1)], ids=lambda m: m.kind)
def test_quadrature_doubling(mu):
    for j, k in ((0, 1), (1, 4), (2, 7)):
        base = mu.skew_moment_quadrature(j, k, order=mu.quad_order)
        double = mu.skew_moment_quadrature(j, k, order=2 * mu.quad_order)
        assert abs(base - double) < 1e-10


def test_quadrature_examples():
    rule = GaussianMeasure().quadrature(5)
    assert rule.integrate(lambda x: x ** 8) == pytest.approx(105, rel=1e-10)
    rule = UniformMeasure().quadrature(3)
    assert rule.integrate(lambda x: x ** 4) == pytest.approx(1 / 5, rel=1e-14)
    circ = CircularMeasure(N=1, beta=1, normalized=True)
    rule = circ.quadrature(16)
    for m in range(-8, 9):
        val = rule.integrate(lambda t: np.exp(1j * m * t))
        assert abs(val - (1 if m == 0 else 0)) < 1e-13
    with pytest.raises(ValueError):
        GaussianMeasure().quadrature(-1)


def test_jacobi_quadrature_matches_moments():
    mu = JacobiMeasure(a=0.5, b=2.5)
    rule = mu.quadrature(30)
    for k in range(10):
        assert rule.integrate(lambda x: x ** k) == pytest.approx(mu.moment(k), rel=1e-12)


def test_custom_measure_matches_uniform():
    cm = CustomMeasure(weight=lambda x: np.ones_like(x), lo=0.0, hi=1.0)
    um = UniformMeasure()
    for k in range(6):
        assert cm.moment(k) == pytest.approx(um.moment(k), rel=1e-13)
    assert cm.skew_moment(0, 1) == pytest.approx(1 / 12, rel=1e-10)
    with pytest.raises(UnsupportedMeasureError):
        cm.to_config()


def test_atoms_examples():
    g = GaussianMeasure()
    same = g.with_atoms([])
    assert all(same.moment(k) == g.moment(k) for k in range(5))
    x0, c = 0.7, 1.3
    a = g.with_atoms([(x0, c)])
    w0 = float(g.density(x0))
    for k in range(5):
        assert a.moment(k) == pytest.approx(g.moment(k) + c * w0 * x0 ** k, rel=1e-14)
    with pytest.raises(ValueError):
        JacobiMeasure().with_atoms([(1.5, 1.0)])


def test_atoms_linear_in_weight():
    g = GaussianMeasure()
    d1 = g.with_atoms([(0.4, 1.0)]).moment(3) - g.moment(3)
    d2 = g.with_atoms([(0.4, 2.0)]).moment(3) - g.moment(3)
    assert d2 == pytest.approx(2 * d1, rel=1e-13)
    s1 = g.with_atoms([(0.4, 1.0)]).skew_moment(1, 2) - g.skew_moment(1, 2)
    s2 = g.with_atoms([(0.4, 2.0)]).skew_moment(1, 2) - g.skew_moment(1, 2)
    # linear plus an atom-atom term that vanishes for a single atom
    assert s2 == pytest.approx(2 * s1, rel=1e-12)


def _two_atom_skew_oracle(mu, atoms, j, k):
    """1/2 int int x^j y^k sgn(y - x) over mu + atoms by adaptive 2-D quadrature plus sums."""
    lo, hi = mu.support()
    w = lambda x: float(mu.density(x))  # noqa: E731
    cc, _ = integrate.dblquad(lambda y, x: x ** j * y ** k * w(x) * w(y), lo, hi, lambda x: x, hi,
                              epsabs=1e-13)
    cc2, _ = integrate.dblquad(lambda y, x: x ** j * y ** k * w(x) * w(y), lo, hi, lo, lambda x: x,
                               epsabs=1e-13)
    total = 0.5 * (cc - cc2)
    for x0, c in atoms:
        a = c * w(x0)
        above, _ = integrate.quad(lambda y: y ** k * w(y), x0, hi, epsabs=1e-14)
        below, _ = integrate.quad(lambda y: y ** k * w(y), lo, x0, epsabs=1e-14)
        total += 0.5 * a * x0 ** j * (above - below)
        above, _ = integrate.quad(lambda x: x ** j * w(x), x0, hi, epsabs=1e-14)
        below, _ = integrate.quad(lambda x: x ** j * w(x), lo, x0, epsabs=1e-14)
        total += 0.5 * a * x0 ** k * (below - above)
    for xm, cm in atoms:
        for xn, cn in atoms:
            total += 0.5 * cm * cn * w(xm) * w(xn) * xm ** j * xn ** k * np.sign(xn - xm)
    return total


@pytest.mark.parametrize("j,k", [(0, 1), (0, 2), (1, 2)])
def test_two_atom_skew_moment(j, k):
    mu = JacobiMeasure(a=2, b=2)
    atoms = [(0.25, 0.7), (0.8, -1.1)]
    got = mu.with_atoms(atoms).skew_moment(j, k)
    want = _two_atom_skew_oracle(mu, atoms, j, k)
    assert got == pytest.approx(want, rel=1e-9, abs=1e-12)


def test_circular_weight_examples():
    assert circular_weight(1, 1, 0.7) == pytest.approx(1)
    assert circular_weight(3, 1, 0.0) == pytest.approx(-1j)
    for theta in np.linspace(-math.pi, math.pi, 9, endpoint=False):
        w = circular_weight(2, 1, theta)
        assert w * w == pytest.approx(-1j * np.exp(-1j * theta))


def test_circular_moments_match_quadrature():
    c = CircularMeasure(N=3, beta=4)
    rule = c.quadrature(512)
    for k in range(10):
        assert abs(c.moment(k) - rule.integrate(lambda t: np.exp(1j * k * t))) < 1e-12


def test_scaling():
    g = GaussianMeasure().scaled(2.0)
    assert g.moment(2) == pytest.approx(2.0)
    assert g.skew_moment(0, 1) == pytest.approx(4 / (2 * math.sqrt(math.pi)))
    assert g.skew_moment_quadrature(0, 1) == pytest.approx(4 / (2 * math.sqrt(math.pi)))


@pytest.mark.parametrize("mu", REAL_MEASURES + [CircularMeasure(N=2, beta=9, normalized=True)],
                         ids=lambda m: m.kind)
def test_config_round_trip(mu):
    lo, hi = mu.support()
    x0 = (lo + hi) / 2 if math.isfinite(lo) else 0.1
    for m in (mu, mu.with_atoms([(x0, 0.5)])):
        back = measure_from_config(m.to_config())
        assert type(back) is type(m)
        for k in range(5):
            assert back.moment(k) == pytest.approx(m.moment(k))


def test_unknown_config():
    with pytest.raises(UnsupportedMeasureError):
        measure_from_config({"kind": "cauchy"})


def _ordered_skew_oracle(a, b, j, k):
    """1/2 int int x^j y^k sgn(y - x) for the Jacobi weight.

    Nested adaptive quadrature with algebraic endpoint weights (QUADPACK QAWS).
    """
    def alg(f, lo, hi, p, q):
        return integrate.quad(f, lo, hi, weight="alg", wvar=(p, q), epsabs=1e-16, epsrel=1e-13, limit=400)[0]

    mk = math.exp(special.betaln(a + k, b))

    def below(x):  # int_0^x y^k w(y) dy
        return alg(lambda y: y ** k * (1 - y) ** (b - 1), 0, x, a - 1, 0) if x > 0 else 0.0

    return 0.5 * alg(lambda x: x ** j * (mk - 2 * below(x)), 0, 1, a - 1, b - 1)


# the outer integrand carries a (1 - x)^b term that QUADPACK flags for b < 1
@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("a,b", [(2.5, 0.7), (0.5, 3.0), (4.0, 4.0)])
@pytest.mark.parametrize("j,k", [(0, 1), (1, 3), (2, 9)])
def test_jacobi_skew_moment_nonsmooth_weights(a, b, j, k):
    want = _ordered_skew_oracle(a, b, j, k)
    assert JacobiMeasure(a=a, b=b).skew_moment(j, k).real == pytest.approx(want, rel=1e-10)


def test_jacobi_skew_moment_exact_rationals():
    from fractions import Fraction
    mu = JacobiMeasure()
    for j in range(30):
        for k in range(j + 1, 30):
            want = Fraction(1, 2) * (Fraction(1, (k + 1) * (j + 1)) - Fraction(2, (k + 1) * (j + k + 2)))
            assert abs(mu.skew_moment(j, k) - float(want)) <= 1e-12 * float(want)


@pytest.mark.parametrize("mu", [JacobiMeasure(a=2.5, b=0.7), UniformMeasure(lo=1, hi=3),
                                CustomMeasure(weight=lambda x: 1 + x, lo=0.0, hi=2.0)], ids=lambda m: m.kind)
def test_centered_is_a_translate(mu):
    c = mu.centered()
    lo, hi = c.support()
    assert lo == pytest.approx(-hi)
    shift = mu.support()[0] - lo
    for k in range(6):
        # moments of (x - shift) agree
        want = sum(math.comb(k, i) * mu.moment(i) * (-shift) ** (k - i) for i in range(k + 1))
        assert c.moment(k) == pytest.approx(want, rel=1e-9, abs=1e-12)
    assert float(c.density(0.1)) == pytest.approx(float(mu.density(0.1 + shift)))


def test_centered_moves_atoms():
    mu = JacobiMeasure(a=2, b=2).with_atoms([(0.25, 0.7)])
    c = mu.centered()
    assert c.atoms[0][0] == pytest.approx(-0.25)
    assert float(c.density(-0.25)) == pytest.approx(float(mu.density(0.25)))
    assert GaussianMeasure().centered() is not None
