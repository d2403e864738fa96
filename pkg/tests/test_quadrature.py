import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, special

from poincare_xray.quadrature import de_line_rule, gauss_jacobi, gauss_legendre, periodic_trapezoid, tanh_sinh

exponent = st.floats(min_value=-0.9, max_value=3.0)


@given(a=exponent, b=exponent, n=st.integers(1, 12))
def test_gauss_jacobi_exact_on_polynomials(a, b, n):
    x, w = gauss_jacobi(n, a, b)
    for j in range(2 * n):
        # ∫ (1-x)^a (1+x)^b x^j dx by expanding about x = -1 is awkward; use the
        # closed form for (1+x)^j instead, which spans the same polynomial space
        exact = 2.0 ** (a + b + j + 1) * math.exp(special.betaln(a + 1, b + j + 1))
        assert np.sum(w * (1.0 + x) ** j) == pytest.approx(exact, rel=1e-11)


def test_gauss_jacobi_matches_scipy_roots():
    x, w = gauss_jacobi(9, 0.5, 0.5)
    xs, ws = special.roots_jacobi(9, 0.5, 0.5)
    np.testing.assert_allclose(np.sort(x), np.sort(xs), atol=1e-14)
    np.testing.assert_allclose(w[np.argsort(x)], ws[np.argsort(xs)], rtol=1e-12)


def test_gauss_legendre_is_unit_weight_case():
    x, w = gauss_legendre(5)
    assert w.sum() == pytest.approx(2.0, rel=1e-15)
    assert np.sum(w * x**8) == pytest.approx(2.0 / 9.0, rel=1e-14)


@pytest.mark.parametrize("n,a,b", [(0, 0.0, 0.0), (3, -1.0, 0.0), (3, 0.0, -2.0)])
def test_gauss_jacobi_rejects_bad_arguments(n, a, b):
    with pytest.raises(ValueError):
        gauss_jacobi(n, a, b)


def test_de_line_rule_integrals():
    t, w = de_line_rule(5)
    assert np.sum(w * np.exp(-2.0 * np.abs(t)) * 4.0 / (1.0 + np.exp(-2.0 * np.abs(t))) ** 2) == pytest.approx(2.0, abs=1e-13)
    assert np.sum(w * np.exp(-(t**2))) == pytest.approx(math.sqrt(math.pi), abs=1e-13)


def test_de_line_rule_levels_are_nested():
    t4, _ = de_line_rule(4)
    t5, _ = de_line_rule(5)
    assert np.all(np.isin(t4, t5))


def test_de_line_rule_rejects_negative_level():
    with pytest.raises(ValueError):
        de_line_rule(-1)


def test_tanh_sinh_endpoint_singularity():
    x, w = tanh_sinh(6, 0.0, 1.0)
    assert np.sum(w / np.sqrt(x)) == pytest.approx(2.0, abs=1e-9)
    ref, _ = integrate.quad(lambda s: math.log(s) * math.cos(s), 0.0, 1.0)
    assert np.sum(w * np.log(x) * np.cos(x)) == pytest.approx(ref, abs=1e-12)


@given(st.integers(-6, 6))
def test_periodic_trapezoid_exact_on_trig_polynomials(m):
    th, w = periodic_trapezoid(16, offset=0.3)
    expected = 2.0 * math.pi if m == 0 else 0.0
    assert abs(np.sum(w * np.exp(1j * m * th)) - expected) < 1e-13
