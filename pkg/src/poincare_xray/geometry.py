"""Coordinates on the Poincaré disk, its oriented geodesics, and the Beltrami–Klein map.

Points of the disk are plain complex numbers (or complex arrays). Oriented geodesics
are labelled in horocyclic coordinates ``(beta, a)``: ``e^{i beta}`` is the incoming
ideal point and ``a`` is the horocycle parameter. Every function here is vectorized
over numpy broadcasting.

Unit tangent vectors are written ``(z, theta)``: the tangent vector at ``z`` pointing
in the Euclidean direction ``e^{i theta}`` with hyperbolic length one.
"""

from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * np.pi
INTERIOR_CUTOFF = 1.0 - 1e-13


class CompactifiedPointError(ValueError):
    """An operation that needs a finite horocycle parameter received ``a = ±∞``."""


class BoundaryPointError(ValueError):
    """An operation that needs an interior point received a point on (or past) the rim."""


class Ideal(enum.Enum):
    """The two compactifying values ``a = +∞`` and ``a = -∞``."""

    PLUS = 1
    MINUS = -1

    def __float__(self) -> float:
        return float(self.value) * np.inf


class VertexCoords(NamedTuple):
    omega: np.ndarray
    s: np.ndarray
    t0: np.ndarray


class HoroCoords(NamedTuple):
    beta: np.ndarray
    a: np.ndarray


class GammaPoint(NamedTuple):
    beta: np.ndarray
    a: np.ndarray
    lam: np.ndarray


class FanBeam(NamedTuple):
    beta: np.ndarray
    alpha: np.ndarray


class ChordParam(NamedTuple):
    """Fan-beam label of the Euclidean chord and the chord parameter along it."""

    beta: np.ndarray
    alpha: np.ndarray
    u: np.ndarray
    dudt: np.ndarray


def wrap(angle):
    """Reduce angles to ``[0, 2π)``."""
    return np.mod(angle, TWO_PI)


def angle_distance(a, b):
    """Distance between angles on the circle, in ``[0, π]``."""
    d = np.mod(np.asarray(a) - np.asarray(b), TWO_PI)
    return np.minimum(d, TWO_PI - d)


def _as_extended(a):
    if isinstance(a, Ideal):
        return float(a)
    return np.asarray(a, dtype=float)


def _finite(a):
    if isinstance(a, Ideal):
        raise CompactifiedPointError(f"finite horocycle parameter required, got {a}")
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise CompactifiedPointError("finite horocycle parameter required")
    return arr


def _interior(z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > INTERIOR_CUTOFF):
        raise BoundaryPointError("point too close to the boundary circle")
    return z


def bdf_x(z):
    """Boundary defining function ``(1-|z|²)/(1+|z|²)``."""
    r2 = np.abs(np.asarray(z)) ** 2
    return (1.0 - r2) / (1.0 + r2)


def bdf_d(w):
    """Euclidean boundary defining function ``1-|w|²``."""
    return 1.0 - np.abs(np.asarray(w)) ** 2


def mu_h(a):
    """``(1+a²)^{-1/2}``; zero at the compactifying points."""
    return 1.0 / np.sqrt(1.0 + _as_extended(a) ** 2)


# ---------------------------------------------------------------------------
# horocyclic geodesics


def _horo_pieces(a, t):
    X = np.tanh(0.5 * t)
    den = 1j * a * X - 2.0 + 1j * a
    return X, den


def geodesic_horo(beta, a, t):
    """Point and velocity angle of the unit-speed geodesic ``(beta, a)`` at time ``t``.

    Returns ``(z, theta)`` where ``e^{i theta}`` is the Euclidean direction of motion.
    """
    a = _finite(a)
    beta = np.asarray(beta, dtype=float)
    t = np.asarray(t, dtype=float)
    X, den = _horo_pieces(a, t)
    z = np.exp(1j * beta) * ((2.0 + 1j * a) * X + 1j * a) / den
    # dz/dt = -2 e^{i beta} sech²(t/2) / den², so the direction is read off den
    theta = wrap(beta + np.pi - 2.0 * np.angle(den))
    return z, theta


def geodesic_horo_velocity(beta, a, t):
    """Complex derivative ``dz/dt`` along the geodesic ``(beta, a)``."""
    a = _finite(a)
    X, den = _horo_pieces(a, np.asarray(t, dtype=float))
    sech2 = 1.0 / np.cosh(0.5 * np.asarray(t, dtype=float)) ** 2
    return -2.0 * np.exp(1j * np.asarray(beta, dtype=float)) * sech2 / den**2


def one_minus_r2_horo(a, t):
    """``1 - |z|²`` along the geodesic ``(beta, a)`` without cancellation near the rim."""
    a = _finite(a)
    t = np.asarray(t, dtype=float)
    X = np.tanh(0.5 * t)
    sech2 = 1.0 / np.cosh(0.5 * t) ** 2
    return 4.0 * sech2 / (4.0 + a * a * (1.0 + X) ** 2)


def bdf_x_horo(a, t):
    """``x`` along the geodesic ``(beta, a)``, computed stably for large ``|t|``."""
    q = one_minus_r2_horo(a, t)
    return q / (2.0 - q)


def horo_endpoints(beta, a):
    """Incoming and outgoing ideal points ``(e^{i beta}, e^{i(beta+π+2 atan a)})``."""
    a = _as_extended(a)
    beta = np.asarray(beta, dtype=float)
    return np.exp(1j * beta), np.exp(1j * (beta + np.pi + 2.0 * np.arctan(a)))


def horo_t0(a):
    """Time at which the geodesic is closest to the origin: ``-log sqrt(1+a²)``."""
    a = _finite(a)
    return -0.5 * np.log1p(a * a)


# ---------------------------------------------------------------------------
# vertex geodesics


def geodesic_vertex(omega, s, t):
    """Geodesic whose closest point to the origin is ``s e^{i omega}``, reached at t = 0."""
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= 1.0):
        raise ValueError("vertex parameter must satisfy |s| < 1")
    X = np.tanh(0.5 * np.asarray(t, dtype=float))
    return np.exp(1j * np.asarray(omega, dtype=float)) * (s + 1j * X) / (1.0 + 1j * s * X)


def horo_to_vertex(beta, a) -> VertexCoords:
    """Vertex coordinates and time shift ``t0`` with ``γ_{β,a}(t+t0) = γ^v_{ω,s}(t)``."""
    a = _finite(a)
    s = -a / (np.sqrt(1.0 + a * a) + 1.0)
    omega = wrap(np.asarray(beta, dtype=float) + 0.5 * np.pi - 2.0 * np.arctan(s))
    return VertexCoords(omega, s, horo_t0(a))


def vertex_to_horo(omega, s) -> HoroCoords:
    s = np.asarray(s, dtype=float)
    if np.any(np.abs(s) >= 1.0):
        raise ValueError("vertex parameter must satisfy |s| < 1")
    beta = wrap(np.asarray(omega, dtype=float) + 1.5 * np.pi + 2.0 * np.arctan(s))
    return HoroCoords(beta, -2.0 * s / (1.0 - s * s))


# ---------------------------------------------------------------------------
# footprint, scattering and involutions


def footprint(z, theta) -> HoroCoords:
    """Horocyclic label of the geodesic through the unit tangent ``(z, theta)``."""
    z = _interior(z)
    theta = np.asarray(theta, dtype=float)
    zeta = z * np.exp(-1j * theta)
    beta = wrap(theta + np.pi + 2.0 * np.angle(1.0 - zeta))
    a = 2.0 * zeta.imag / (1.0 - np.abs(z) ** 2)
    return HoroCoords(beta, a)


def scattering(beta, a, lam) -> GammaPoint:
    """Scattering relation on Γ: ``(β, a, ±1) ↦ (β+π ± 2 atan a, a, ∓1)``."""
    a_ext = _as_extended(a)
    lam = np.asarray(lam)
    beta = wrap(np.asarray(beta, dtype=float) + np.pi + 2.0 * lam * np.arctan(a_ext))
    return GammaPoint(beta, a_ext, -lam)


def antipodal(beta, a, lam) -> GammaPoint:
    """Antipodal map on Γ: ``(β, a, ±1) ↦ (β, -a, ∓1)``."""
    return GammaPoint(wrap(np.asarray(beta, dtype=float)), -_as_extended(a), -np.asarray(lam))


def scattering_antipodal(beta, a) -> HoroCoords:
    """Orientation reversal of geodesics: ``(β, a) ↦ (β+π+2 atan a, -a)``."""
    a_ext = _as_extended(a)
    return HoroCoords(wrap(np.asarray(beta, dtype=float) + np.pi + 2.0 * np.arctan(a_ext)), -a_ext)


def scattering_euclid(beta, alpha) -> FanBeam:
    """Euclidean scattering relation ``(β, α) ↦ (β+π+2α, π-α)``."""
    alpha = np.asarray(alpha, dtype=float)
    return FanBeam(wrap(np.asarray(beta, dtype=float) + np.pi + 2.0 * alpha), np.pi - alpha)


def scattering_antipodal_euclid(beta, alpha) -> FanBeam:
    """Euclidean orientation reversal ``(β, α) ↦ (β+π+2α, -α)``."""
    alpha = np.asarray(alpha, dtype=float)
    return FanBeam(wrap(np.asarray(beta, dtype=float) + np.pi + 2.0 * alpha), -alpha)


def psi_hf(beta, a, lam=1) -> FanBeam:
    """Map Γ onto the Euclidean boundary bundle minus its tangential directions.

    On the incoming sheet ``α = atan a`` lies in ``(-π/2, π/2)``; on the outgoing sheet
    ``α = π - atan a`` lies in ``(π/2, 3π/2)``.
    """
    a_ext = _as_extended(a)
    lam = np.asarray(lam)
    base = np.arctan(a_ext)
    alpha = np.where(lam > 0, base, np.pi - base)
    return FanBeam(wrap(np.asarray(beta, dtype=float)), alpha)


def psi_hf_inv(beta, alpha) -> GammaPoint:
    """Inverse of :func:`psi_hf`; tangential directions map to ``a = ±∞``."""
    alpha = np.asarray(alpha, dtype=float)
    # reduce to [-π/2, 3π/2)
    al = np.mod(alpha + 0.5 * np.pi, TWO_PI) - 0.5 * np.pi
    incoming = al < 0.5 * np.pi
    with np.errstate(over="ignore"):
        a = np.where(incoming, np.tan(al), -np.tan(al))
    a = np.where(al == -0.5 * np.pi, -np.inf, a)
    a = np.where(al == 0.5 * np.pi, np.inf, a)
    lam = np.where(incoming, 1, -1)
    return GammaPoint(wrap(np.asarray(beta, dtype=float)), a, lam)


# ---------------------------------------------------------------------------
# Beltrami–Klein map and Euclidean chords


def phi_map(z):
    """``Φ(z) = 2z/(1+|z|²)``, mapping hyperbolic geodesics onto Euclidean chords."""
    z = np.asarray(z, dtype=complex)
    return 2.0 * z / (1.0 + np.abs(z) ** 2)


def phi_inv(w):
    w = np.asarray(w, dtype=complex)
    return w / (1.0 + np.sqrt(np.maximum(0.0, 1.0 - np.abs(w) ** 2)))


def fanbeam_chord(beta, alpha, u):
    """Point ``e^{i(β+α+π)}(u + i sin α)`` on the Euclidean chord with label ``(β, α)``."""
    alpha = np.asarray(alpha, dtype=float)
    return np.exp(1j * (np.asarray(beta, dtype=float) + alpha + np.pi)) * (u + 1j * np.sin(alpha))


def footprint_euclid(w, theta) -> FanBeam:
    """Fan-beam label of the chord through ``w`` with direction ``e^{i theta}``."""
    w = np.asarray(w, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    alpha = np.arcsin(np.clip((w * np.exp(-1j * theta)).imag, -1.0, 1.0))
    return FanBeam(wrap(theta - np.pi - alpha), alpha)


def reparam_vertex(omega, s, t) -> ChordParam:
    """Chord label and parameter with ``Φ(γ^v_{ω,s}(t)) = γ^E_{β,α}(u(t))``."""
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    cos_a = (1.0 - s * s) / (1.0 + s * s)
    alpha = -2.0 * np.arctan(s)
    beta = wrap(np.asarray(omega, dtype=float) - 0.5 * np.pi - alpha)
    u = cos_a * np.tanh(t)
    dudt = cos_a / np.cosh(t) ** 2
    return ChordParam(beta, alpha, u, dudt)


def reparam_horo(beta, a, t) -> ChordParam:
    """Chord label and parameter with ``Φ(γ_{β,a}(t)) = γ^E_{β,atan a}(u(t))``.

    Here ``u(t) = μ_h(a) tanh(t - t0)`` in the geodesic's own time.
    """
    a = _finite(a)
    t = np.asarray(t, dtype=float)
    m = mu_h(a)
    shifted = t - horo_t0(a)
    return ChordParam(wrap(np.asarray(beta, dtype=float)), np.arctan(a), m * np.tanh(shifted), m / np.cosh(shifted) ** 2)


# ---------------------------------------------------------------------------
# cosphere momentum along horocyclic geodesics


def _check_c(C):
    C = float(C)
    if not C > 0:
        raise ValueError("the constant C must be positive")
    return C


def cosphere_momentum(beta, a, t, C=1.0):
    """Evaluate ``((C²-x̃²)/(2C))² ω̇ / x̃²`` along ``γ_{β,a}``, with ``x̃ = C(1-r)/(1+r)``.

    ``r`` and ``ω`` are polar coordinates of the moving point. The quantity is
    conserved along the flow.
    """
    C = _check_c(C)
    z, _ = geodesic_horo(beta, a, t)
    zdot = geodesic_horo_velocity(beta, a, t)
    r = np.abs(z)
    q = one_minus_r2_horo(a, t)
    one_minus_r = q / (1.0 + r)
    xt = C * one_minus_r / (1.0 + r)
    # (C² - x̃²) = 4C² r/(1+r)²; keep the factor r to cancel ω̇ = Im(ż z̄)/r²
    half_gap_over_r = 2.0 * C / (1.0 + r) ** 2
    ang_flux = (zdot * np.conj(z)).imag
    return half_gap_over_r**2 * ang_flux / xt**2


def log_rate_xtilde(beta, a, t):
    """``d/dt log x̃`` along ``γ_{β,a}``; independent of ``C``."""
    z, _ = geodesic_horo(beta, a, t)
    zdot = geodesic_horo_velocity(beta, a, t)
    r = np.abs(z)
    q = one_minus_r2_horo(a, t)
    rdot = (zdot * np.conj(z)).real / r
    return -2.0 * rdot / q
