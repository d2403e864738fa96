"""Orthogonal bases and singular values.

Conventions
-----------
``p_n^γ`` is the degree-n polynomial orthogonal for the weight ``(1-x²)^{γ+1/2}`` on
[-1, 1], normalized so that ``∫ p_n² (1-x²)^{γ+1/2} dx = 1/(2π)`` and ``p_n(1) > 0``.

Data-space functions are written in fan-beam variables ``(beta, alpha)`` on the
Euclidean side and in horocyclic variables ``(beta, a)`` on the hyperbolic side,
with ``alpha = atan a``.

Generalized Zernike polynomials ``Z_{nk}^γ`` are defined as the Euclidean
backprojection of ``cos(α)^{-2γ-1} ψ_{nk}^γ``. They are evaluated through a closed
radial form whose constant is pinned to that backprojection at ``w = 1``.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import betaln, eval_jacobi, gammaln

from .geometry import mu_h


def check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > -1.0:
        raise ValueError(f"weight exponent must exceed -1, got {gamma}")
    return gamma


def _check_disk_index(n: int, k: int) -> None:
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"disk index requires 0 <= k <= n, got (n, k) = ({n}, {k})")


# ---------------------------------------------------------------------------
# symmetric Jacobi polynomials


def _log_h0(gamma: float) -> float:
    # ∫(1-x²)^{γ+1/2} dx = √π Γ(γ+3/2)/Γ(γ+2)
    return 0.5 * math.log(math.pi) + gammaln(gamma + 1.5) - gammaln(gamma + 2.0)


def jacobi_p_all(nmax: int, gamma: float, x) -> np.ndarray:
    """Values of ``p_0^γ .. p_nmax^γ`` at ``x``; shape ``(nmax+1,) + x.shape``."""
    gamma = check_gamma(gamma)
    if nmax < 0:
        raise ValueError("degree must be non-negative")
    x = np.asarray(x, dtype=float)
    out = np.empty((nmax + 1,) + x.shape)
    # orthonormal recurrence x p_n = b_{n+1} p_{n+1} + b_n p_{n-1}
    out[0] = math.exp(-0.5 * _log_h0(gamma)) / math.sqrt(2.0 * math.pi)
    if nmax >= 1:
        b_prev = 0.0
        for n in range(nmax):
            m = n + 1
            b_next = math.sqrt(m * (m + 2 * gamma + 1) / (4.0 * (m + gamma + 1) * (m + gamma)))
            prev = out[n - 1] if n >= 1 else 0.0
            out[n + 1] = (x * out[n] - b_prev * prev) / b_next
            b_prev = b_next
    return out


def jacobi_p(n: int, gamma: float, x) -> np.ndarray:
    """``p_n^γ(x)``."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    return jacobi_p_all(n, gamma, x)[n]


# ---------------------------------------------------------------------------
# boundary bases


def psi_nk_gamma(n: int, k: int, gamma: float, beta, alpha) -> np.ndarray:
    """``cos(α)^{2γ+1} e^{i(n-2k)(β+α+π/2)} p_n^γ(sin α)`` on the incoming fan-beam sheet."""
    alpha = np.asarray(alpha, dtype=float)
    m = n - 2 * k
    radial = np.cos(alpha) ** (2.0 * gamma + 1.0) * jacobi_p(n, gamma, np.sin(alpha))
    return radial * np.exp(1j * m * (np.asarray(beta, dtype=float) + alpha + 0.5 * np.pi))


def psi_nk_gamma_H(n: int, k: int, gamma: float, beta, a) -> np.ndarray:
    """Hyperbolic data basis ``μ_h(a) ψ_{nk}^γ(β, atan a)``."""
    a = np.asarray(a, dtype=float)
    return mu_h(a) * psi_nk_gamma(n, k, gamma, beta, np.arctan(a))


def psi_phi_zero(n: int, k: int, which: str, beta, alpha) -> np.ndarray:
    """Unweighted boundary bases ``ψ_{nk}`` (``which='psi'``) and ``φ_{nk}`` (``'phi'``).

    The formula is used verbatim for any real ``alpha``, which gives the natural odd
    (``ψ``) or even (``φ``) extension across the scattering relation.
    """
    if which not in ("psi", "phi"):
        raise ValueError("which must be 'psi' or 'phi'")
    alpha = np.asarray(alpha, dtype=float)
    sign = 1.0 if which == "psi" else -1.0
    parity = (-1.0) ** n
    fiber = np.exp(1j * (n + 1) * alpha) + sign * parity * np.exp(-1j * (n + 1) * alpha)
    return parity / (2.0 * np.pi) * np.exp(1j * (n - 2 * k) * (np.asarray(beta, dtype=float) + alpha)) * fiber


def psi_phi_zero_H(n: int, k: int, which: str, beta, a, lam=1) -> np.ndarray:
    """Conjugated bases ``μ_h Ψ*ψ_{nk}`` and ``μ_h Ψ*φ_{nk}`` on both sheets of Γ.

    On the outgoing sheet ``μ_h`` carries the sign ``λ``.
    """
    a = np.asarray(a, dtype=float)
    lam = np.asarray(lam)
    base = np.arctan(a)
    alpha = np.where(lam > 0, base, np.pi - base)
    return lam * mu_h(a) * psi_phi_zero(n, k, which, beta, alpha)


# ---------------------------------------------------------------------------
# singular values


def sigma_nk(n: int, k: int, gamma: float) -> float:
    """Singular value ``σ_{nk}^γ`` via log-Beta differences."""
    gamma = check_gamma(gamma)
    _check_disk_index(n, k)
    log_s2 = (
        (2.0 * gamma + 2.0) * math.log(2.0)
        + math.log(math.pi)
        - math.log(n + 1.0)
        + betaln(n - k + 1 + gamma, k + 1 + gamma)
        - betaln(n - k + 1.0, k + 1.0)
    )
    return math.exp(0.5 * log_s2)


# ---------------------------------------------------------------------------
# generalized Zernike polynomials


def _radial_closed(n: int, k: int, gamma: float, rho) -> np.ndarray:
    m = abs(n - 2 * k)
    j = (n - m) // 2
    rho = np.asarray(rho, dtype=float)
    return rho**m * eval_jacobi(j, gamma, m, 2.0 * rho * rho - 1.0)


def _backprojected_at_one(n: int, k: int, gamma: float) -> float:
    """Euclidean backprojection of ``cos^{-2γ-1} ψ_{nk}^γ`` evaluated at ``w = 1``.

    Along the fiber through ``w`` with direction ``θ = -φ`` the integrand reduces to
    ``e^{-im(φ+π/2)} p_n(sin φ)``, a trigonometric polynomial of degree ``n + |m|``,
    so the periodic trapezoid rule below is exact.
    """
    m = n - 2 * k
    nodes = 2 * (n + abs(m)) + 2
    phi = 2.0 * np.pi * np.arange(nodes) / nodes
    vals = np.exp(-1j * m * (phi + 0.5 * np.pi)) * jacobi_p(n, gamma, np.sin(phi))
    return float((vals.sum() * 2.0 * np.pi / nodes).real)


@lru_cache(maxsize=4096)
def zernike_constant(n: int, k: int, gamma: float) -> float:
    """Scale between the closed radial form and the backprojection definition."""
    _check_disk_index(n, k)
    gamma = check_gamma(gamma)
    j = min(k, n - k)
    # P_j^{(γ,|m|)}(1) = binom(j+γ, j)
    at_one = math.exp(gammaln(j + gamma + 1.0) - gammaln(gamma + 1.0) - gammaln(j + 1.0))
    return _backprojected_at_one(n, k, gamma) / at_one


def zernike(n: int, k: int, gamma: float, w) -> np.ndarray:
    """Generalized Zernike polynomial ``Z_{nk}^γ`` at Euclidean disk points ``w``."""
    _check_disk_index(n, k)
    gamma = check_gamma(gamma)
    w = np.asarray(w, dtype=complex)
    rho = np.abs(w)
    phase = np.exp(1j * (n - 2 * k) * np.angle(w))
    return zernike_constant(n, k, gamma) * _radial_closed(n, k, gamma, rho) * phase


def zernike_norm(n: int, k: int, gamma: float) -> float:
    """``‖Z_{nk}^γ‖`` in ``L²(D_E, (1-|w|²)^γ dV_E)`` from the Jacobi norm formula."""
    _check_disk_index(n, k)
    gamma = check_gamma(gamma)
    m = abs(n - 2 * k)
    j = (n - m) // 2
    log_ratio = gammaln(j + gamma + 1.0) + gammaln(j + m + 1.0) - gammaln(j + gamma + m + 1.0) - gammaln(j + 1.0)
    norm2 = math.pi * zernike_constant(n, k, gamma) ** 2 / (n + gamma + 1.0) * math.exp(log_ratio)
    return math.sqrt(norm2)


def zernike_normalized(n: int, k: int, gamma: float, w) -> np.ndarray:
    """Unit-norm ``Ẑ_{nk}^γ``."""
    return zernike(n, k, gamma, w) / zernike_norm(n, k, gamma)


def disk_indices(nmax: int):
    """All ``(n, k)`` with ``0 <= k <= n <= nmax``."""
    return [(n, k) for n in range(nmax + 1) for k in range(n + 1)]
