import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from poincare_xray.quadrature import gauss_jacobi
from poincare_xray.specfun import (
    check_gamma,
    disk_indices,
    jacobi_p,
    jacobi_p_all,
    psi_nk_gamma,
    psi_nk_gamma_H,
    sigma_nk,
    zernike,
    zernike_norm,
    zernike_normalized,
)
from poincare_xray.transforms import backproject_euclid

gammas = st.floats(min_value=-0.9, max_value=3.0)


@given(gammas)
def test_jacobi_orthonormal_in_fiber_weight(gamma):
    x, w = gauss_jacobi(20, gamma + 0.5, gamma + 0.5)
    P = jacobi_p_all(10, gamma, x)
    gram = 2.0 * math.pi * (P * w) @ P.T
    np.testing.assert_allclose(gram, np.eye(11), atol=1e-11)


@given(gammas, st.integers(0, 15))
def test_jacobi_positive_at_one_and_parity(gamma, n):
    assert jacobi_p(n, gamma, 1.0) > 0
    x = np.linspace(-0.9, 0.9, 7)
    np.testing.assert_allclose(jacobi_p(n, gamma, -x), (-1) ** n * jacobi_p(n, gamma, x), atol=1e-12)


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 1.0, 2.5])
def test_jacobi_proportional_to_scipy(gamma):
    x = np.linspace(-0.95, 0.95, 11)
    for n in range(8):
        ref = special.eval_jacobi(n, gamma + 0.5, gamma + 0.5, x)
        ours = jacobi_p(n, gamma, x)
        scale = (ours @ ref) / (ref @ ref)
        assert scale > 0
        np.testing.assert_allclose(ours, scale * ref, atol=1e-12 * np.max(np.abs(ours)))


@given(gammas, st.integers(0, 30).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_sigma_against_beta_function(gamma, nk):
    n, k = nk
    ref2 = 2.0 ** (2 * gamma + 2) * math.pi / (n + 1)
    ref2 *= special.beta(n - k + 1 + gamma, k + 1 + gamma) / special.beta(n - k + 1, k + 1)
    assert sigma_nk(n, k, gamma) == pytest.approx(math.sqrt(ref2), rel=1e-12)
    assert sigma_nk(n, k, gamma) == pytest.approx(sigma_nk(n, n - k, gamma), rel=1e-13)


def test_sigma_unweighted_case():
    for n, k in disk_indices(12):
        assert sigma_nk(n, k, 0.0) ** 2 == pytest.approx(4.0 * math.pi / (n + 1), rel=1e-13)


def test_sigma_large_degree_is_finite():
    s = sigma_nk(400, 150, 2.0)
    assert np.isfinite(s) and s > 0


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 1.0])
def test_zernike_orthonormal(gamma):
    # polar quadrature: Gauss–Jacobi in 2ρ²-1 and trapezoid in angle
    t, wt = gauss_jacobi(12, gamma, 0.0)
    rho = np.sqrt(0.5 * (t + 1.0))
    omega = 2.0 * math.pi * np.arange(24) / 24
    w = rho[:, None] * np.exp(1j * omega)[None, :]
    weight = (wt / 2.0 ** (gamma + 2))[:, None] * (2.0 * math.pi / 24)
    idx = disk_indices(6)
    Z = np.array([zernike_normalized(n, k, gamma, w) for n, k in idx])
    gram = np.einsum("pij,qij,ij->pq", Z, np.conj(Z), weight)
    np.testing.assert_allclose(gram, np.eye(len(idx)), atol=1e-12)


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 1.0])
@pytest.mark.parametrize("nk", [(0, 0), (3, 1), (4, 4), (5, 2)])
def test_zernike_is_backprojected_boundary_basis(gamma, nk):
    n, k = nk
    w = np.array([0.1 + 0.2j, -0.4 + 0.3j, 0.6j, 0.5])

    def data(b, al):
        return np.cos(al) ** (-2 * gamma - 1) * psi_nk_gamma(n, k, gamma, b, al)

    np.testing.assert_allclose(backproject_euclid(data, w), zernike(n, k, gamma, w), rtol=1e-11)


def test_zernike_norm_positive():
    assert all(zernike_norm(n, k, 0.5) > 0 for n, k in disk_indices(8))


def test_hyperbolic_basis_carries_mu():
    b, a = 0.4, np.array([0.0, 2.0, -5.0])
    np.testing.assert_allclose(
        psi_nk_gamma_H(3, 1, 0.0, b, a), psi_nk_gamma(3, 1, 0.0, b, np.arctan(a)) / np.sqrt(1 + a**2), rtol=1e-14
    )


def test_input_validation():
    with pytest.raises(ValueError):
        check_gamma(-1.0)
    with pytest.raises(ValueError):
        sigma_nk(3, 4, 0.0)
    with pytest.raises(ValueError):
        zernike(2, -1, 0.0, 0.1)
    with pytest.raises(ValueError):
        jacobi_p(-1, 0.0, 0.2)
