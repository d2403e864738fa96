import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poincare_xray.specfun import disk_indices, psi_nk_gamma_H, sigma_nk
from poincare_xray.spectral import (
    AliasingError,
    CoeffTable,
    DataGrid,
    DiskGrid,
    analyze_data,
    analyze_disk,
    apply_L_gamma_H,
    apply_T_gamma_H,
    basis_field,
    data_function,
    disk_function,
    forward_data,
    forward_matrix,
    funcrel_eigenvalue,
    required_n_beta,
    sigma_table,
    sobolev_norm,
    stability_probe,
    svd_reconstruct,
    synthesize_data,
    synthesize_disk,
)

gammas = st.sampled_from([-0.5, 0.0, 0.7, 1.0])


def random_data_table(rng, gamma, n_max, k_max):
    vals = rng.normal(size=(n_max + 1, 2 * k_max + 1)) + 1j * rng.normal(size=(n_max + 1, 2 * k_max + 1))
    return CoeffTable(gamma, "data", vals, -k_max)


def random_disk_table(rng, gamma, n_max):
    entries = {nk: complex(rng.normal(), rng.normal()) for nk in disk_indices(n_max)}
    return CoeffTable.from_entries(gamma, "disk", n_max, entries)


@given(gammas, st.integers(0, 6), st.integers(0, 2**31 - 1))
def test_data_analysis_inverts_synthesis(gamma, n_max, seed):
    rng = np.random.default_rng(seed)
    k_max = n_max + 3
    table = random_data_table(rng, gamma, n_max, k_max)
    grid = synthesize_data(table, required_n_beta(n_max, k_max), n_max + 2)
    back = analyze_data(grid, n_max, k_max)
    np.testing.assert_allclose(back.values, table.values, atol=1e-11 * table.norm())
    assert grid.norm() == pytest.approx(table.norm(), rel=1e-11)


@given(gammas, st.integers(0, 8), st.integers(0, 2**31 - 1))
def test_disk_analysis_inverts_synthesis(gamma, n_max, seed):
    table = random_disk_table(np.random.default_rng(seed), gamma, n_max)
    grid = synthesize_disk(table, 2 * n_max + 2, n_max // 2 + 2)
    np.testing.assert_allclose(analyze_disk(grid, n_max).values, table.values, atol=1e-11 * table.norm())
    assert grid.norm() == pytest.approx(table.norm(), rel=1e-11)


@given(gammas, st.integers(0, 2**31 - 1))
def test_data_interpolation_is_exact_on_band(gamma, seed):
    rng = np.random.default_rng(seed)
    table = random_data_table(rng, gamma, 4, 6)
    grid = synthesize_data(table, required_n_beta(4, 6), 6)
    beta = rng.uniform(0, 2 * np.pi, 20)
    a = rng.standard_cauchy(20)
    np.testing.assert_allclose(grid.interpolate(beta, a), data_function(table)(beta, a), atol=1e-11 * table.norm())


def test_plain_profile_interpolates_constants():
    grid = DataGrid.sample(lambda b, a: np.full(np.broadcast(b, a).shape, 3.0), 0.5, 9, 6, profile="plain")
    np.testing.assert_allclose(grid.interpolate(np.array([0.1, 4.0]), np.array([0.0, 25.0])), 3.0, rtol=1e-12)


def test_disk_function_matches_grid_synthesis(rng):
    table = random_disk_table(rng, 0.5, 5)
    grid = synthesize_disk(table, 12, 4)
    np.testing.assert_allclose(disk_function(table)(grid.points()), grid.values, atol=1e-12)


def test_aliasing_is_refused():
    grid = DataGrid(0.0, np.zeros((10, 6)))
    with pytest.raises(AliasingError):
        analyze_data(grid, 4, 4)
    with pytest.raises(AliasingError):
        analyze_disk(DiskGrid(0.0, np.zeros((8, 4))), 4)


def test_table_bookkeeping():
    t = CoeffTable.from_entries(0.0, "data", 3, {(2, 1): 1.0, (2, -1): 0.5, (3, 5): 2.0}, k_max=5)
    assert t[2, 1] == 1.0 and t[9, 9] == 0
    assert t.offending(0.1) == [(2, -1), (3, 5)]
    assert t.in_band().norm() == pytest.approx(1.0)
    assert (t.in_band() + t.out_of_band()).norm() == pytest.approx(t.norm())
    assert t.to_disk().to_data(k_max=5).values.shape == t.values.shape
    with pytest.raises(ValueError):
        CoeffTable(0.0, "disk", np.ones((2, 2)))


def test_sobolev_norm_weights():
    t = CoeffTable.from_entries(0.5, "disk", 2, {(0, 0): 1.0, (2, 1): 2.0})
    assert sobolev_norm(t, 1.0) == pytest.approx(math.sqrt(1.5**2 + (3.5 * 2.0) ** 2))
    with pytest.raises(ValueError):
        sobolev_norm(t, -1.0)


def test_sigma_table_layout():
    tab = sigma_table(1.0, 3)
    assert tab[3, 2] == sigma_nk(3, 2, 1.0) and tab[1, 2] == 0.0


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 1.0])
def test_forward_matrix_is_diagonal_singular_values(gamma):
    A = forward_matrix(gamma, 5)
    sig = np.array([sigma_nk(n, k, gamma) for n, k in disk_indices(5)])
    np.testing.assert_allclose(A, np.diag(sig), atol=1e-10)


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 1.0])
def test_reconstruction_of_band_limited_phantom(gamma, rng):
    table = random_disk_table(rng, gamma, 6)
    data = forward_data(disk_function(table), gamma, required_n_beta(6, 14), 10)
    rec = svd_reconstruct(data, 6)
    np.testing.assert_allclose(rec.coeffs.values, table.values, atol=1e-9 * table.norm())
    assert rec.out_of_range.norm() < 1e-9 * table.norm()


def test_filter_damps_by_singular_value(rng):
    table = random_disk_table(rng, 0.0, 4)
    data = synthesize_data(table.scaled(sigma_table(0.0, 4)).to_data(), required_n_beta(4, 12), 8)
    lam = 0.7
    rec = svd_reconstruct(data, 4, filter_lambda=lam)
    sig = sigma_table(0.0, 4)
    np.testing.assert_allclose(rec.coeffs.values, table.values * sig**2 / (sig**2 + lam**2), atol=1e-12)


def test_cokernel_data_is_reported_not_inverted():
    table = CoeffTable.from_entries(0.0, "data", 3, {(1, 0): 1.0, (3, -2): 0.4})
    data = synthesize_data(table, required_n_beta(3, 11), 6)
    rec = svd_reconstruct(data, 3)
    assert rec.out_of_range.offending(1e-8) == [(3, -2)]
    assert rec.coeffs[1, 0] == pytest.approx(1.0 / sigma_nk(1, 0, 0.0))


@pytest.mark.parametrize("gamma", [-0.5, 0.0, 1.0])
@pytest.mark.parametrize("nk", [(0, 0), (3, 1), (4, 2)])
def test_disk_and_data_operators_share_eigenvalues(gamma, nk):
    n, k = nk
    eig = (n + 1 + gamma) ** 2
    z = np.array([0.3 + 0.2j, -0.5 + 0.1j])
    f = basis_field(n, k, gamma)
    np.testing.assert_allclose(apply_L_gamma_H(f, gamma, z) / f(z), eig, rtol=1e-6)
    b, a = np.array([0.4, 2.0]), np.array([0.5, -1.5])
    u = lambda bb, aa: psi_nk_gamma_H(n, k, gamma, bb, aa)
    np.testing.assert_allclose(apply_T_gamma_H(u, gamma, b, a) / u(b, a), eig, rtol=1e-6)


@given(gammas, st.integers(0, 30).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_functional_relation_matches_singular_values(gamma, nk):
    n, k = nk
    assert funcrel_eigenvalue(n, n - 2 * k, gamma) == pytest.approx(sigma_nk(n, k, gamma) ** 2, rel=1e-10)


def test_stability_constants_unweighted_case():
    # eigenvalues 4π/(n+1) make both inequalities equalities with constant 1/(4π)
    rep = stability_probe(0.0, n_max=4, n_phantoms=10, seed=3)
    for s in (0.0, 1.0):
        c = rep["by_s"][s]
        assert c["C1"] == pytest.approx(1 / (4 * np.pi), rel=1e-9)
        assert c["C2"] == pytest.approx(1 / (4 * np.pi), rel=1e-9)


def test_stability_constants_are_finite_and_positive():
    rep = stability_probe(0.5, n_max=4, n_phantoms=10, seed=3)
    assert rep["exponents"] == [1.0, 1.5]
    for c in rep["by_s"].values():
        assert 0 < c["C1"] < np.inf and 0 < c["C2"] < np.inf
