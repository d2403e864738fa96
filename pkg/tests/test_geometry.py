import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from poincare_xray import geometry as geo

angles = st.floats(min_value=0.0, max_value=2 * np.pi, allow_nan=False)
horo_a = st.floats(min_value=-50.0, max_value=50.0)
times = st.floats(min_value=-6.0, max_value=6.0)
sheets = st.sampled_from([1, -1])
vertex_s = st.floats(min_value=-0.95, max_value=0.95)


def close_angle(a, b, tol=1e-10):
    return np.all(geo.angle_distance(a, b) < tol)


def hyperbolic_distance(z1, z2):
    return 2.0 * np.arctanh(np.abs(z1 - z2) / np.abs(1.0 - np.conj(z1) * z2))


@given(angles, horo_a, times)
def test_footprint_recovers_label_along_geodesic(beta, a, t):
    z, theta = geo.geodesic_horo(beta, a, geo.horo_t0(a) + t)
    fp = geo.footprint(z, theta)
    assert close_angle(fp.beta, beta, 1e-8)
    assert fp.a == pytest.approx(a, rel=1e-8, abs=1e-8)


@given(angles, st.floats(-5, 5), times, st.floats(0.05, 2.0))
def test_geodesic_has_unit_speed(beta, a, t, dt):
    t0 = geo.horo_t0(a) + t
    z1, _ = geo.geodesic_horo(beta, a, t0)
    z2, _ = geo.geodesic_horo(beta, a, t0 + dt)
    assert hyperbolic_distance(z1, z2) == pytest.approx(dt, rel=1e-8)


@given(angles, st.floats(-20, 20), times)
def test_velocity_matches_finite_difference(beta, a, t):
    h = 1e-6
    zp, _ = geo.geodesic_horo(beta, a, t + h)
    zm, _ = geo.geodesic_horo(beta, a, t - h)
    v = geo.geodesic_horo_velocity(beta, a, t)
    assert abs((zp - zm) / (2 * h) - v) < 1e-6 * max(1.0, abs(v))
    _, theta = geo.geodesic_horo(beta, a, t)
    assert close_angle(theta, np.angle(v), 1e-9)


@given(angles, horo_a)
def test_endpoints_are_limits(beta, a):
    z_in, _ = geo.geodesic_horo(beta, a, -40.0)
    z_out, _ = geo.geodesic_horo(beta, a, 40.0)
    e_in, e_out = geo.horo_endpoints(beta, a)
    assert abs(z_in - e_in) < 1e-8 and abs(z_out - e_out) < 1e-8


@given(angles, horo_a)
def test_t0_is_closest_approach(beta, a):
    t0 = geo.horo_t0(a)
    r0 = abs(geo.geodesic_horo(beta, a, t0)[0])
    for dt in (-0.1, 0.1):
        assert abs(geo.geodesic_horo(beta, a, t0 + dt)[0]) >= r0


@given(angles, horo_a, times)
def test_horo_and_vertex_parameterizations_agree(beta, a, t):
    v = geo.horo_to_vertex(beta, a)
    z_h, _ = geo.geodesic_horo(beta, a, t + v.t0)
    z_v = geo.geodesic_vertex(v.omega, v.s, t)
    assert abs(z_h - z_v) < 1e-10
    back = geo.vertex_to_horo(v.omega, v.s)
    assert close_angle(back.beta, beta, 1e-9)
    assert back.a == pytest.approx(a, rel=1e-9, abs=1e-9)


@given(angles, horo_a, sheets)
def test_scattering_and_antipodal_are_commuting_involutions(beta, a, lam):
    S = geo.scattering(*geo.scattering(beta, a, lam))
    A = geo.antipodal(*geo.antipodal(beta, a, lam))
    for p in (S, A):
        assert close_angle(p.beta, beta) and p.a == pytest.approx(a) and p.lam == lam
    SA = geo.scattering(*geo.antipodal(beta, a, lam))
    AS = geo.antipodal(*geo.scattering(beta, a, lam))
    assert close_angle(SA.beta, AS.beta) and SA.a == pytest.approx(AS.a) and SA.lam == AS.lam


@given(angles, horo_a)
def test_scattering_antipodal_reverses_orientation(beta, a):
    e_in, e_out = geo.horo_endpoints(beta, a)
    rev = geo.scattering_antipodal(beta, a)
    r_in, r_out = geo.horo_endpoints(rev.beta, rev.a)
    assert abs(r_in - e_out) < 1e-10 and abs(r_out - e_in) < 1e-10


@given(angles, horo_a, sheets)
def test_psi_map_intertwines_scattering(beta, a, lam):
    fb = geo.psi_hf(beta, a, lam)
    back = geo.psi_hf_inv(fb.beta, fb.alpha)
    assert close_angle(back.beta, beta) and back.a == pytest.approx(a, rel=1e-9, abs=1e-9) and back.lam == lam
    lhs = geo.psi_hf(*geo.scattering(beta, a, lam))
    rhs = geo.scattering_euclid(fb.beta, fb.alpha)
    assert close_angle(lhs.beta, rhs.beta, 1e-9) and close_angle(lhs.alpha, rhs.alpha, 1e-9)


def test_psi_inverse_sends_tangential_directions_to_infinity():
    assert geo.psi_hf_inv(0.0, np.pi / 2).a == np.inf
    assert geo.psi_hf_inv(0.0, -np.pi / 2).a == -np.inf


@given(st.floats(0.0, 0.999), angles)
def test_phi_map_roundtrip(r, om):
    z = r * np.exp(1j * om)
    assert abs(geo.phi_inv(geo.phi_map(z)) - z) < 1e-12
    assert abs(geo.phi_map(z)) <= 1.0


@given(angles, st.floats(-20, 20), times)
def test_phi_maps_geodesics_onto_chords(beta, a, t):
    cp = geo.reparam_horo(beta, a, t)
    z, _ = geo.geodesic_horo(beta, a, t)
    assert abs(geo.phi_map(z) - geo.fanbeam_chord(cp.beta, cp.alpha, cp.u)) < 1e-10


@given(angles, vertex_s, times)
def test_vertex_reparameterization(omega, s, t):
    cp = geo.reparam_vertex(omega, s, t)
    z = geo.geodesic_vertex(omega, s, t)
    assert abs(geo.phi_map(z) - geo.fanbeam_chord(cp.beta, cp.alpha, cp.u)) < 1e-10
    h = 1e-6
    du = (geo.reparam_vertex(omega, s, t + h).u - geo.reparam_vertex(omega, s, t - h).u) / (2 * h)
    assert du == pytest.approx(cp.dudt, abs=1e-7)


@given(angles, st.floats(-1.4, 1.4), st.floats(-0.99, 0.99))
def test_footprint_euclid_recovers_chord(beta, alpha, u):
    w = geo.fanbeam_chord(beta, alpha, u * np.cos(alpha))
    theta = beta + alpha + np.pi
    fb = geo.footprint_euclid(w, theta)
    assert close_angle(fb.beta, beta, 1e-8) and fb.alpha == pytest.approx(alpha, abs=1e-8)


@given(angles, horo_a, st.floats(-12, 12), st.sampled_from([0.5, 1.0, 3.0]))
def test_cosphere_momentum_is_minus_a(beta, a, t, C):
    assert geo.cosphere_momentum(beta, a, t, C) == pytest.approx(-a, rel=1e-9, abs=1e-9)


@given(angles, horo_a)
def test_log_rate_limits(beta, a):
    assert geo.log_rate_xtilde(beta, a, -30.0) == pytest.approx(1.0, abs=1e-6)
    assert geo.log_rate_xtilde(beta, a, 30.0) == pytest.approx(-1.0, abs=1e-6)


@given(angles, horo_a, st.floats(-30, 30))
def test_stable_rim_quantities(beta, a, t):
    z, _ = geo.geodesic_horo(beta, a, t)
    q = geo.one_minus_r2_horo(a, t)
    assume(q > 1e-6)
    assert q == pytest.approx(1.0 - abs(z) ** 2, rel=1e-7)
    assert geo.bdf_x_horo(a, t) == pytest.approx(geo.bdf_x(z), rel=1e-7)


def test_mu_vanishes_at_infinity():
    assert geo.mu_h(np.inf) == 0.0 and geo.mu_h(0.0) == 1.0


def test_input_errors():
    with pytest.raises(geo.BoundaryPointError):
        geo.footprint(1.0 + 0j, 0.0)
    with pytest.raises(ValueError):
        geo.cosphere_momentum(0.0, 1.0, 0.0, C=0.0)
    with pytest.raises(ValueError):
        geo.geodesic_vertex(0.0, 1.0, 0.0)
    with pytest.raises(geo.CompactifiedPointError):
        geo.geodesic_horo(0.0, np.inf, 0.0)
