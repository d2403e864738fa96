"""Weighted X-ray transforms on both disks, their backprojections, and Santaló's formula.

Every integral is evaluated twice, once on the working rule and once on a coarser
one. When the two disagree by more than ``QuadSpec.abs_tol`` the result is flagged:
a :class:`QuadratureError` is raised in strict mode, a :class:`QuadratureWarning`
is emitted otherwise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry as geo
from .quadrature import de_line_rule, gauss_jacobi, gauss_legendre, periodic_trapezoid


class QuadratureError(ArithmeticError):
    """Two refinement levels of a quadrature disagree beyond the tolerance."""

    def __init__(self, message: str, value=None, estimate: float = np.nan):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


class QuadratureWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature configuration shared by the integral operators.

    n_chord:  Gauss–Jacobi nodes on Euclidean chords.
    ts_level: level of the double-exponential rule for hyperbolic lines (step 2**-level).
    n_angle:  trapezoid nodes on a fiber of directions.
    abs_tol:  allowed disagreement between the two refinement levels.
    strict:   raise instead of warn when the tolerance is exceeded.
    """

    n_chord: int = 48
    ts_level: int = 4
    n_angle: int = 128
    abs_tol: float = 1e-9
    strict: bool = True

    def __post_init__(self):
        for name in ("n_chord", "n_angle"):
            if getattr(self, name) < 4:
                raise ValueError(f"{name} must be at least 4")
        if self.ts_level < 1:
            raise ValueError("ts_level must be at least 1")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")


DEFAULT_QUAD = QuadSpec()


@dataclass(frozen=True)
class ScalarField:
    """A function on a disk model, tagged with the model and its smoothness class.

    ``model`` is ``"euclid"`` or ``"hyper"``; ``even`` records membership in the
    even class (smooth functions of ``x²`` near the rim) and is informational.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    model: str = "hyper"
    even: bool = True

    def __post_init__(self):
        if self.model not in ("euclid", "hyper"):
            raise ValueError("model must be 'euclid' or 'hyper'")

    def __call__(self, z):
        return self.fn(np.asarray(z, dtype=complex))


def pullback(f: ScalarField | Callable) -> ScalarField:
    """``Φ* f``: a Euclidean-disk function viewed on the Poincaré disk."""
    fn = f.fn if isinstance(f, ScalarField) else f
    if isinstance(f, ScalarField) and f.model != "euclid":
        raise ValueError("pullback expects a Euclidean-disk field")
    even = f.even if isinstance(f, ScalarField) else True
    return ScalarField(lambda z: fn(geo.phi_map(z)), model="hyper", even=even)


def _evaluator(f, model: str) -> Callable:
    if isinstance(f, ScalarField):
        if f.model != model:
            raise ValueError(f"expected a field on the {model} disk, got {f.model}")
        return f.fn
    return f


def _settle(fine, coarse, q: QuadSpec, what: str):
    est = float(np.max(np.abs(fine - coarse))) if np.size(fine) else 0.0
    if not est <= q.abs_tol:
        msg = f"{what}: refinement levels differ by {est:.3e} > {q.abs_tol:.1e}"
        if q.strict:
            raise QuadratureError(msg, value=fine, estimate=est)
        warnings.warn(msg, QuadratureWarning, stacklevel=3)
    return fine, est


def _chunks(total: int, per: int):
    for start in range(0, total, per):
        yield slice(start, min(total, start + per))


# ---------------------------------------------------------------------------
# forward transforms


def _chord_sum(fn, gamma, beta, alpha, n):
    t, w = gauss_jacobi(n, gamma, gamma)
    ca = np.cos(alpha)[:, None]
    pts = np.exp(1j * (beta + alpha + np.pi))[:, None] * (t[None, :] * ca + 1j * np.sin(alpha)[:, None])
    return np.abs(np.cos(alpha)) ** (2 * gamma + 1) * (fn(pts) @ w)


def xray_euclid(f, gamma: float, beta, alpha, q: QuadSpec = DEFAULT_QUAD, return_error: bool = False):
    """``I_0^E(d^γ f)(β, α)`` for a function ``f`` on the Euclidean disk."""
    fn = _evaluator(f, "euclid")
    beta, alpha = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(alpha, dtype=float))
    shape = beta.shape
    b, al = beta.ravel(), alpha.ravel()
    fine = np.empty(b.size, dtype=complex)
    coarse = np.empty(b.size, dtype=complex)
    for sl in _chunks(b.size, 4096):
        fine[sl] = _chord_sum(fn, gamma, b[sl], al[sl], q.n_chord)
        coarse[sl] = _chord_sum(fn, gamma, b[sl], al[sl], max(2, q.n_chord // 2))
    value, est = _settle(fine, coarse, q, "xray_euclid")
    value = value.reshape(shape)
    return (value, est) if return_error else value


def _line_sum(fn, gamma, beta, a, level, step=1):
    offsets, w = de_line_rule(level)
    if step > 1:
        # keep the nodes of the coarser nested rule (even multiples of the step)
        start = ((offsets.size - 1) // 2) % step
        offsets, w = offsets[start::step], w[start::step] * step
    t = geo.horo_t0(a)[:, None] + offsets[None, :]
    z, _ = geo.geodesic_horo(beta[:, None], a[:, None], t)
    x = geo.bdf_x_horo(a[:, None], t)
    return (x ** (2.0 + 2.0 * gamma) * fn(z)) @ w


def xray_hyper(f, gamma: float, beta, a, q: QuadSpec = DEFAULT_QUAD, return_error: bool = False):
    """``I_0^H(x^{2+2γ} f)(β, a)`` for a function ``f`` on the Poincaré disk.

    The line integral is centred at the time ``t0`` of closest approach to the
    origin and evaluated with the double-exponential rule of level ``q.ts_level``.
    """
    fn = _evaluator(f, "hyper")
    beta, a = np.broadcast_arrays(np.asarray(beta, dtype=float), geo._finite(a))
    shape = beta.shape
    b, av = beta.ravel(), a.ravel()
    fine = np.empty(b.size, dtype=complex)
    coarse = np.empty(b.size, dtype=complex)
    for sl in _chunks(b.size, 2048):
        fine[sl] = _line_sum(fn, gamma, b[sl], av[sl], q.ts_level)
        # the rule one level down consists of every other node
        coarse[sl] = _line_sum(fn, gamma, b[sl], av[sl], q.ts_level, step=2)
    value, est = _settle(fine, coarse, q, "xray_hyper")
    value = value.reshape(shape)
    return (value, est) if return_error else value


# ---------------------------------------------------------------------------
# backprojections


def _fiber_sum_euclid(u, w, n):
    theta, wt = periodic_trapezoid(n)
    fb = geo.footprint_euclid(w[:, None], theta[None, :])
    return u(fb.beta, fb.alpha) @ wt


def _grouped_fiber_sum(fiber_sum, u, flat, counts):
    fine = np.empty(flat.size, dtype=complex)
    coarse = np.empty(flat.size, dtype=complex)
    for n in np.unique(counts):
        idx = np.nonzero(counts == n)[0]
        for sl in _chunks(idx.size, max(1, 2**18 // int(n))):
            pts = flat[idx[sl]]
            fine[idx[sl]] = fiber_sum(u, pts, int(n))
            coarse[idx[sl]] = fiber_sum(u, pts, int(n) // 2)
    return fine, coarse


def fiber_nodes_euclid(w, n_angle: int, max_doublings: int = 8) -> np.ndarray:
    """Trapezoid node count at ``w``: doubled as ``1 - |w|²`` halves, up to a cap."""
    d = np.maximum(geo.bdf_d(w), 2.0**-max_doublings)
    return n_angle * 2 ** np.ceil(np.log2(1.0 / d)).astype(int)


def backproject_euclid(u: Callable, w, q: QuadSpec = DEFAULT_QUAD, return_error: bool = False):
    """Euclidean backprojection: integral of ``u(β, α)`` over all chords through ``w``."""
    w = np.asarray(w, dtype=complex)
    if np.any(np.abs(w) > 1.0):
        raise geo.BoundaryPointError("point outside the closed disk")
    flat = w.ravel()
    fine, coarse = _grouped_fiber_sum(_fiber_sum_euclid, u, flat, fiber_nodes_euclid(flat, q.n_angle))
    value, est = _settle(fine, coarse, q, "backproject_euclid")
    value = value.reshape(w.shape)
    return (value, est) if return_error else value


def _fiber_sum_hyper(u, z, n):
    theta, wt = periodic_trapezoid(n)
    fp = geo.footprint(z[:, None], theta[None, :])
    return u(fp.beta, fp.a) @ wt


def fiber_nodes_hyper(z, n_angle: int) -> np.ndarray:
    """Trapezoid node count used at ``z``: grows like ``1/x(z)`` toward the rim.

    Near the rim the footprint of the fiber concentrates around the radial
    directions on a scale comparable to ``x(z)``.
    """
    x = geo.bdf_x(z)
    doublings = np.ceil(np.log2(np.maximum(1.0, 1.0 / x))).astype(int)
    return n_angle * 2**doublings


def backproject_hyper(u: Callable, z, q: QuadSpec = DEFAULT_QUAD, return_error: bool = False):
    """Hyperbolic backprojection: integral of ``u`` over all geodesics through ``z``.

    The fiber of unit vectors at ``z`` is parameterized by the direction angle
    ``θ`` with measure ``dθ``.
    """
    z = geo._interior(z)
    flat = z.ravel()
    fine, coarse = _grouped_fiber_sum(_fiber_sum_hyper, u, flat, fiber_nodes_hyper(flat, q.n_angle))
    value, est = _settle(fine, coarse, q, "backproject_hyper")
    value = value.reshape(z.shape)
    return (value, est) if return_error else value


# ---------------------------------------------------------------------------
# Santaló's formula


@dataclass(frozen=True)
class SantaloGrid:
    n_beta: int = 64
    n_a: int = 256
    n_t: int = 256
    n_r: int = 96
    n_omega: int = 64
    n_theta: int = 64


def _check_support(F, eps: float) -> None:
    # sample a ring just outside the support
    x_probe = np.linspace(0.05, 0.95, 7) * eps
    r = np.sqrt((1.0 - x_probe) / (1.0 + x_probe))
    ang = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False)
    z = (r[:, None, None] * np.exp(1j * ang)[None, :, None]).repeat(16, axis=2)
    th = np.broadcast_to(ang[None, None, :], z.shape)
    if np.any(np.abs(F(z, th)) > 0.0):
        raise ValueError(f"test function is not supported in x >= {eps}")


def santalo_check(F: Callable, eps: float, grid: SantaloGrid = SantaloGrid()) -> tuple[float, float]:
    """Both sides of Santaló's formula for ``F(z, θ)`` supported in ``x >= eps``.

    Returns ``(lhs, rhs)`` with ``lhs = ∫∫∫ F(φ_t(β, a)) dt dβ da`` over geodesic space
    and ``rhs = ∫ F dV_H dθ`` over the unit tangent bundle.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    _check_support(F, eps)

    # geodesic side: μ_h(a) >= eps is needed to reach the support
    a_max = np.sqrt(1.0 / eps**2 - 1.0)
    beta, wb = periodic_trapezoid(grid.n_beta)
    a_nodes = np.linspace(-a_max, a_max, grid.n_a + 1)
    wa = np.full(a_nodes.size, 2.0 * a_max / grid.n_a)
    wa[[0, -1]] *= 0.5
    s = np.linspace(-1.0, 1.0, grid.n_t + 1)
    ws = np.full(s.size, 2.0 / grid.n_t)
    ws[[0, -1]] *= 0.5
    lhs = 0.0
    for ai, wai in zip(a_nodes, wa):
        half = np.arccosh(max(1.0, geo.mu_h(ai) / eps))
        if half == 0.0:
            continue
        t = geo.horo_t0(ai) + half * s
        z, th = geo.geodesic_horo(beta[:, None], ai, t[None, :])
        vals = F(z, th)
        lhs += wai * half * float(np.real(wb @ vals @ ws))

    # tangent-bundle side: polar coordinates with dV_H = 4r/(1-r²)² dr dω
    r_max = np.sqrt((1.0 - eps) / (1.0 + eps))
    xr, wr = gauss_legendre(grid.n_r)
    r = 0.5 * r_max * (xr + 1.0)
    wr = 0.5 * r_max * wr * 4.0 * r / (1.0 - r * r) ** 2
    om, wo = periodic_trapezoid(grid.n_omega)
    th, wt = periodic_trapezoid(grid.n_theta, offset=0.1)
    z = r[:, None, None] * np.exp(1j * om)[None, :, None]
    vals = F(np.broadcast_to(z, (r.size, om.size, th.size)), np.broadcast_to(th, (r.size, om.size, th.size)))
    rhs = float(np.real(np.einsum("ijk,i,j,k->", vals, wr, wo, wt)))
    return lhs, rhs


def bump(x, center: float, width: float):
    """Smooth compactly supported bump in ``x`` on ``(center-width, center+width)``."""
    x = np.asarray(x, dtype=float)
    s = (x - center) / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out
