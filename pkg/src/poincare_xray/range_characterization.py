"""Range characterization of the weighted hyperbolic X-ray transform.

Functions on the doubled data space ``Γ = Γ₊ ∪ Γ₋`` are vectorized callables of
``(beta, a, lam)`` with ``lam = ±1`` selecting the sheet; functions on ``Γ₊`` alone
are callables of ``(beta, a)``.

Two independent routes evaluate the fiberwise odd Hilbert transform:

``spectral``
    conjugate to the Euclidean boundary bundle, sample on a torus grid in
    ``(β, α)``, and apply the Fourier multiplier ``-i sgn(q)`` to odd fiber
    harmonics ``e^{iqα}``;
``pv``
    evaluate the principal-value integral over ``a'`` directly, pairing the points
    ``a' = tan(atan a ∓ δ)`` so the singularity cancels, and integrating in ``δ`` by
    tanh-sinh.

Moment conditions are evaluated in vertex coordinates ``(ω, s)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import geometry as geo
from .quadrature import de_line_rule, gauss_legendre, tanh_sinh
from .spectral import DataGrid, analyze_data, required_n_beta, sigma_table
from .specfun import check_gamma, jacobi_p_all
from .transforms import QuadratureError, QuadratureWarning

_CHUNK = 4096


def as_data_function(u) -> Callable:
    """Accept a callable ``u(beta, a)`` or a :class:`DataGrid` (interpolated)."""
    if isinstance(u, DataGrid):
        return u.interpolate
    if not callable(u):
        raise TypeError("data must be a callable (beta, a) -> complex or a DataGrid")
    return u


class GammaFunction:
    """A function on both sheets of ``Γ``."""

    def __init__(self, fn: Callable):
        self._fn = fn

    def __call__(self, beta, a, lam):
        beta, a, lam = np.broadcast_arrays(
            np.asarray(beta, dtype=float), np.asarray(a, dtype=float), np.asarray(lam, dtype=float)
        )
        out = self._fn(beta, a, lam)
        return np.broadcast_to(np.asarray(out, dtype=complex), beta.shape).copy()

    def antipodal(self) -> "GammaFunction":
        """Pullback by ``(β, a, λ) ↦ (β, -a, -λ)``."""
        return GammaFunction(lambda beta, a, lam: self(beta, -a, -lam))

    def odd_part(self) -> "GammaFunction":
        return GammaFunction(lambda beta, a, lam: 0.5 * (self(beta, a, lam) - self(beta, -a, -lam)))

    def restrict(self) -> Callable:
        """Restriction to the incoming sheet as a callable of ``(beta, a)``."""
        return lambda beta, a: self(beta, a, 1.0)

    def __add__(self, other: "GammaFunction") -> "GammaFunction":
        return GammaFunction(lambda beta, a, lam: self(beta, a, lam) + other(beta, a, lam))

    def __rmul__(self, scalar) -> "GammaFunction":
        return GammaFunction(lambda beta, a, lam: scalar * self(beta, a, lam))


def _check_sign(sign) -> int:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return int(sign)


def extend_A(u, sign: int) -> GammaFunction:
    """Even (``sign=+1``) or odd (``sign=-1``) extension of ``u`` across the scattering relation."""
    sign = _check_sign(sign)
    u = as_data_function(u)

    def fn(beta, a, lam):
        back = geo.scattering(beta, a, lam)
        incoming = lam > 0
        return np.where(incoming, 1.0, float(sign)) * u(np.where(incoming, beta, back.beta), a)

    return GammaFunction(fn)


def adjoint_A(v: GammaFunction, sign: int) -> Callable:
    """``(A_±)* v = v ± v∘S`` on the incoming sheet."""
    sign = _check_sign(sign)

    def fn(beta, a):
        beta, a = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(a, dtype=float))
        out = geo.scattering(beta, a, np.ones(beta.shape))
        return v(beta, a, 1.0) + sign * v(out.beta, out.a, out.lam)

    return fn


# ---------------------------------------------------------------------------
# fiberwise odd Hilbert transform


class _FiberMultiplier:
    """Spectral route: torus samples of ``|μ_h|^{-1}U`` pushed to ``(β, α)``."""

    def __init__(self, U: GammaFunction, n_beta: int, n_alpha: int):
        if n_beta % 2 == 0:
            raise ValueError("n_beta must be odd so that no Nyquist column is split")
        if n_alpha % 4 != 0:
            raise ValueError("n_alpha must be a multiple of 4 (even Nyquist harmonic, no tangential nodes)")
        beta = 2.0 * np.pi * np.arange(n_beta) / n_beta
        alpha0 = -0.5 * np.pi + np.pi / n_alpha
        alpha = alpha0 + 2.0 * np.pi * np.arange(n_alpha) / n_alpha
        bb, aa = np.meshgrid(beta, alpha, indexing="ij")
        g = geo.psi_hf_inv(bb, aa)
        samples = U(g.beta, g.a, g.lam) / np.abs(np.cos(aa))
        self.p = np.rint(np.fft.fftfreq(n_beta) * n_beta)
        self.q = np.rint(np.fft.fftfreq(n_alpha) * n_alpha)
        coef = np.fft.fft2(samples) / (n_beta * n_alpha) * np.exp(-1j * self.q * alpha0)[None, :]
        odd = np.mod(self.q, 2) == 1
        self.coef = coef * np.where(odd, -1j * np.sign(self.q), 0.0)[None, :]

    def __call__(self, beta, a, lam):
        fb = geo.psi_hf(beta, a, lam)
        shape = np.shape(fb.beta)
        b = np.ravel(fb.beta)
        al = np.ravel(np.broadcast_to(fb.alpha, shape))
        out = np.empty(b.size, dtype=complex)
        for sl in (slice(i, i + _CHUNK) for i in range(0, b.size, _CHUNK)):
            rows = np.exp(1j * np.outer(b[sl], self.p)) @ self.coef
            out[sl] = np.sum(rows * np.exp(1j * np.outer(al[sl], self.q)), axis=1)
        return geo.mu_h(a) * out.reshape(shape)


@dataclass(frozen=True)
class PVSpec:
    """Tanh-sinh level and tolerance for the principal-value route."""

    level: int = 5
    abs_tol: float = 1e-8
    strict: bool = False

    def __post_init__(self):
        if self.level < 2:
            raise ValueError("pv level must be at least 2")
        if not self.abs_tol > 0:
            raise ValueError("abs_tol must be positive")


def _pv_nodes(level: int):
    delta, w = tanh_sinh(level, 0.0, 0.5 * np.pi)
    return delta, w / np.sin(delta)


def _pv_hilbert(U: GammaFunction, spec: PVSpec) -> GammaFunction:
    """Principal value in the fiber angle ``φ' = atan a'``.

    With ``g(φ') = U₋(β, tan φ', λ) / cos φ'`` the integrand ``g(φ')/sin(φ - φ')`` is
    π-periodic, so pairing ``φ' = φ ∓ δ`` over ``0 < δ <= π/2`` covers the whole
    line in ``a'`` and cancels the singularity at ``δ = 0``.
    """
    odd = U.odd_part()
    fine_rule = _pv_nodes(spec.level)
    coarse_rule = _pv_nodes(spec.level - 1)

    def side(beta, phi, lam, shift):
        ang = phi[:, None] + shift
        return odd(beta[:, None], np.tan(ang), lam[:, None]) / np.cos(ang)

    def integral(beta, a, lam, rule):
        delta, w = rule
        phi = np.arctan(a)
        vals = side(beta, phi, lam, -delta) - side(beta, phi, lam, delta)
        return lam / np.pi * np.cos(phi) * (vals @ w)

    def fn(beta, a, lam):
        shape = beta.shape
        b, x, l = beta.ravel(), a.ravel(), lam.ravel()
        fine = np.empty(b.size, dtype=complex)
        coarse = np.empty(b.size, dtype=complex)
        for sl in (slice(i, i + 256) for i in range(0, b.size, 256)):
            fine[sl] = integral(b[sl], x[sl], l[sl], fine_rule)
            coarse[sl] = integral(b[sl], x[sl], l[sl], coarse_rule)
        est = float(np.max(np.abs(fine - coarse))) if fine.size else 0.0
        if not est <= spec.abs_tol:
            msg = f"pv Hilbert transform: refinement levels differ by {est:.3e} > {spec.abs_tol:.1e}"
            if spec.strict:
                raise QuadratureError(msg, value=fine.reshape(shape), estimate=est)
            warnings.warn(msg, QuadratureWarning, stacklevel=3)
        return fine.reshape(shape)

    return GammaFunction(fn)


def hilbert_minus(
    U: GammaFunction,
    mode: str = "spectral",
    fiber_grid: tuple[int, int] = (129, 128),
    pv: PVSpec = PVSpec(),
) -> GammaFunction:
    """Fiberwise odd Hilbert transform on ``Γ``.

    ``fiber_grid`` sets the torus resolution of the spectral route; the result is
    exact for data whose conjugated Euclidean version is a trigonometric polynomial
    resolved by that grid.
    """
    if not isinstance(U, GammaFunction):
        U = GammaFunction(U)
    if mode == "spectral":
        return GammaFunction(_FiberMultiplier(U, *fiber_grid))
    if mode == "pv":
        return _pv_hilbert(U, pv)
    raise ValueError("mode must be 'spectral' or 'pv'")


def c_minus_H(u, mode: str = "spectral", **options) -> Callable:
    """Boundary operator ``½ (A₋)* H₋ A₋`` on the incoming sheet."""
    h = hilbert_minus(extend_A(u, -1), mode, **options)
    adj = adjoint_A(h, -1)
    return lambda beta, a: 0.5 * adj(beta, a)


def p_minus_H(w, mode: str = "spectral", **options) -> Callable:
    """Boundary operator ``(A₋)* H₋ A₊`` on the incoming sheet."""
    h = hilbert_minus(extend_A(w, +1), mode, **options)
    return adjoint_A(h, -1)


# ---------------------------------------------------------------------------
# moment conditions


def _family_values(family, m_max: int, gamma: float, x: np.ndarray) -> np.ndarray:
    if callable(family):
        return np.array([np.asarray(family(m, x), dtype=float) for m in range(m_max + 1)])
    if family == "jacobi":
        return jacobi_p_all(m_max, gamma, x)
    powers = np.arange(m_max + 1)[:, None]
    if family == "monomial":
        return x[None, :] ** powers
    if family == "bct":
        return (-x[None, :]) ** powers
    raise ValueError("family must be 'jacobi', 'monomial', 'bct' or a callable (m, x)")


def moment_functions(u, gamma: float, m_max: int, omega, n_s: int = 96, family="jacobi") -> np.ndarray:
    """``M_m(ω) = ∫ p_m(-2s/(1+s²)) u^v(ω, s) 2ds/(1+s²)`` for ``m <= m_max``.

    Returns an array of shape ``(m_max + 1,) + omega.shape``.
    """
    gamma = check_gamma(gamma)
    u = as_data_function(u)
    omega = np.asarray(omega, dtype=float)
    s, ws = gauss_legendre(n_s)
    poly = _family_values(family, m_max, gamma, -2.0 * s / (1.0 + s * s))
    kernel = poly * (ws * 2.0 / (1.0 + s * s))[None, :]
    horo = geo.vertex_to_horo(omega.ravel()[:, None], s[None, :])
    uv = u(horo.beta, horo.a)
    return (kernel @ uv.T).reshape((m_max + 1,) + omega.shape)


def vertex_moment(u, m: int, omega, n_s: int = 96, family="bct", gamma: float = 0.0):
    """Single-degree vertex moment; defaults to the polynomial ``(-x)^m``."""
    return moment_functions(u, gamma, m, omega, n_s=n_s, family=family)[m]


def bct_moment(u, m: int, omega, level: int = 6, reach: float = 60.0, return_error: bool = False):
    """``∫ tanh^m(r)/cosh(r) u^v(ω, tanh(r/2)) dr`` by a double-exponential rule in ``r``.

    The horocyclic parameter of the geodesic at signed distance ``r`` is written
    as ``-sinh r``, which equals ``-2s/(1-s²)`` at ``s = tanh(r/2)`` without the
    cancellation near ``s = ±1``.
    """
    if m < 0:
        raise ValueError("degree must be non-negative")
    u = as_data_function(u)
    omega = np.asarray(omega, dtype=float)
    r, w = de_line_rule(level, reach)
    flat = omega.ravel()[:, None]
    beta = geo.wrap(flat + 1.5 * np.pi + 2.0 * np.arctan(np.tanh(0.5 * r)))
    vals = u(beta, np.broadcast_to(-np.sinh(r), beta.shape)) * (np.tanh(r) ** m / np.cosh(r))
    fine = vals @ w
    start = ((r.size - 1) // 2) % 2
    coarse = vals[:, start::2] @ (2.0 * w[start::2])
    value = fine.reshape(omega.shape)
    if return_error:
        return value, float(np.max(np.abs(fine - coarse)))
    return value


@dataclass(frozen=True)
class MomentReport:
    """Fourier coefficients ``M_{m,k}`` of the moment functions.

    ``coeffs[m, j]`` holds ``M_{m,k}`` for ``k = k_min + j``. ``parity_residual[m]``
    is the largest Fourier coefficient of ``M_m`` at a frequency whose parity
    differs from ``m``.
    """

    gamma: float
    family: str
    k_min: int
    coeffs: np.ndarray
    parity_residual: np.ndarray
    tol: float

    @property
    def max_degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def k_values(self) -> np.ndarray:
        return self.k_min + np.arange(self.coeffs.shape[1])

    def coefficient(self, m: int, k: int) -> complex:
        return complex(self.coeffs[m, k - self.k_min])

    def _band(self) -> np.ndarray:
        m = np.arange(self.max_degree + 1)[:, None]
        k = self.k_values[None, :]
        return (k >= 0) & (k <= m)

    @property
    def scale(self) -> float:
        inband = np.abs(self.coeffs[self._band()])
        top = float(inband.max()) if inband.size else 0.0
        return top if top > 0 else 1.0

    @property
    def out_of_band(self) -> np.ndarray:
        """Per degree, the largest ``|M_{m,k}|`` with ``k ∉ [0, m]``."""
        vals = np.where(self._band(), 0.0, np.abs(self.coeffs))
        return vals.max(axis=1)

    def degree_verdicts(self) -> np.ndarray:
        bound = self.tol * self.scale
        return (self.out_of_band <= bound) & (self.parity_residual <= bound)

    @property
    def verdict(self) -> bool:
        return bool(np.all(self.degree_verdicts()))

    def offending(self) -> list[tuple[int, int]]:
        bound = self.tol * self.scale
        bad = (~self._band()) & (np.abs(self.coeffs) > bound)
        return [(int(m), int(self.k_min + j)) for m, j in zip(*np.nonzero(bad))]

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "family": self.family,
            "max_degree": self.max_degree,
            "tolerance": self.tol,
            "scale": self.scale,
            "verdict": self.verdict,
            "degree_verdicts": [bool(v) for v in self.degree_verdicts()],
            "out_of_band": [float(v) for v in self.out_of_band],
            "parity_residual": [float(v) for v in self.parity_residual],
            "offending": [list(p) for p in self.offending()],
        }


def moment_coeffs(
    u,
    gamma: float,
    M: int,
    k_pad: int = 8,
    n_s: int = 96,
    n_omega: int | None = None,
    family="jacobi",
    tol: float = 1e-6,
) -> MomentReport:
    """Moment functions up to degree ``M`` and their Fourier coefficients.

    The window is ``-k_pad <= k <= M + k_pad``. With the Jacobi family the
    coefficients satisfy ``2π M_{m,k} = ⟨u, ψ_{mk}^{γ,H}⟩``.
    """
    gamma = check_gamma(gamma)
    if M < 0 or k_pad < 0:
        raise ValueError("degree and window padding must be non-negative")
    top = M + 2 * k_pad
    n_omega = 2 * top + 2 if n_omega is None else int(n_omega)
    if n_omega <= 2 * top:
        raise ValueError(f"n_omega must exceed {2 * top} to resolve the k-window for degree {M}")
    omega = 2.0 * np.pi * np.arange(n_omega) / n_omega
    mf = moment_functions(u, gamma, M, omega, n_s=n_s, family=family)
    spec = np.fft.fft(mf, axis=1) / n_omega
    freq = np.rint(np.fft.fftfreq(n_omega) * n_omega).astype(int)
    k_vals = np.arange(-k_pad, M + k_pad + 1)
    coeffs = np.empty((M + 1, k_vals.size), dtype=complex)
    parity = np.empty(M + 1)
    for m in range(M + 1):
        coeffs[m] = spec[m, np.mod(m - 2 * k_vals, n_omega)]
        wrong = np.mod(freq - m, 2) == 1
        parity[m] = float(np.max(np.abs(spec[m, wrong]))) if np.any(wrong) else 0.0
    name = family if isinstance(family, str) else getattr(family, "__name__", "custom")
    return MomentReport(gamma, name, -k_pad, coeffs, parity, tol)


# ---------------------------------------------------------------------------
# combined range test


@dataclass
class CriterionResult:
    name: str
    passed: bool | None
    residual: float | None
    offending: list = field(default_factory=list)
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "residual": self.residual,
            "offending": [list(p) for p in self.offending],
            "note": self.note,
        }


@dataclass
class RangeReport:
    gamma: float
    s: float
    criteria: dict
    moments: MomentReport
    partial_sums: np.ndarray

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria.values() if c.passed is not None)

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "s": self.s,
            "passed": self.passed,
            "criteria": {k: v.to_dict() for k, v in self.criteria.items()},
            "moments": self.moments.to_dict(),
            "partial_sums": [float(v) for v in self.partial_sums],
        }


def decay_partial_sums(report: MomentReport, s: float) -> np.ndarray:
    """Running sums of ``(m+1+γ)^{2s} |M_{m,k}|² / σ_{m,k}²`` over ``0 <= k <= m``."""
    gamma = report.gamma
    sig = sigma_table(gamma, report.max_degree)
    terms = np.zeros(report.max_degree + 1)
    for m in range(report.max_degree + 1):
        band = report.coeffs[m, -report.k_min : -report.k_min + m + 1]
        terms[m] = (m + 1 + gamma) ** (2 * s) * np.sum(np.abs(band) ** 2 / sig[m, : m + 1] ** 2)
    return np.cumsum(terms)


def c_minus_residual(
    u, n_max: int, k_pad: int = 8, mode: str = "spectral", tol: float = 1e-6, **options
) -> CriterionResult:
    """``‖C₋u‖ / ‖u‖`` on a data grid, with the ``(n, k)`` components of ``C₋u`` above ``tol``."""
    u = as_data_function(u)
    k_max = n_max + k_pad
    n_beta = required_n_beta(n_max, k_max)
    n_alpha = 2 * n_max + 4
    base = DataGrid.sample(u, 0.0, n_beta, n_alpha)
    image = DataGrid.sample(c_minus_H(u, mode, **options), 0.0, n_beta, n_alpha)
    size = base.norm()
    ratio = image.norm() / size if size > 0 else image.norm()
    table = analyze_data(image, n_max, k_max)
    bound = tol * (size if size > 0 else 1.0)
    offending = sorted(table.offending(bound))
    return CriterionResult("c_minus", bool(ratio <= tol), float(ratio), offending)


def range_test(
    u,
    gamma: float,
    s: float = 0.0,
    tol: float = 1e-6,
    M: int = 12,
    decay_tol: float = 1e-6,
    mode: str = "spectral",
    k_pad: int = 8,
) -> RangeReport:
    """Moment homogeneity, coefficient decay and (for ``γ = 0``) vanishing of ``C₋``.

    The decay criterion looks at the last two degrees of the weighted partial sums
    and passes when their share of the total is below ``decay_tol``; it is a
    truncation diagnostic, not a proof of membership in a Sobolev class.
    """
    gamma = check_gamma(gamma)
    if s < 0:
        raise ValueError("Sobolev index must be non-negative")
    u = as_data_function(u)
    report = moment_coeffs(u, gamma, M, k_pad=k_pad, tol=tol)
    moments = CriterionResult(
        "moments",
        report.verdict,
        float(max(report.out_of_band.max(), report.parity_residual.max()) / report.scale),
        report.offending(),
    )
    sums = decay_partial_sums(report, s)
    total = sums[-1]
    tail = total - (sums[-3] if sums.size >= 3 else 0.0)
    share = float(tail / total) if total > 0 else 0.0
    decay = CriterionResult("decay", bool(share <= decay_tol), share, note="share of the last two degrees")
    criteria = {"moments": moments, "decay": decay}
    if gamma == 0.0:
        criteria["c_minus"] = c_minus_residual(u, M, k_pad=k_pad, mode=mode, tol=tol)
    else:
        criteria["c_minus"] = CriterionResult(
            "c_minus", None, None, note="omitted: the boundary-operator criterion is defined for gamma = 0 only"
        )
    return RangeReport(gamma, float(s), criteria, report, sums)
