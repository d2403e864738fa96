"""Quadrature rules shared by the transforms, the spectral layer and the range tools.

Three families are provided:

* Gauss–Jacobi rules for the weight (1-x)^a (1+x)^b on [-1, 1], built with the
  Golub–Welsch eigenvalue method;
* a double-exponential rule on the whole real line, suited to integrands that
  decay exponentially (hyperbolic line integrals);
* a tanh-sinh rule on a finite interval, used for principal-value integrals after
  the singularity has been paired off.

All rules are returned as ``(nodes, weights)`` numpy arrays.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln


def _jacobi_recurrence(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of the (monic-normalized) Jacobi matrix."""
    k = np.arange(n, dtype=float)
    s = 2.0 * k + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2.0))
    diag[0] = (b - a) / (a + b + 2.0)

    m = np.arange(1, n, dtype=float)
    t = 2.0 * m + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4.0 * m * (m + a) * (m + b) * (m + a + b) / (t * t * (t + 1.0) * (t - 1.0))
    if n > 1:
        # the generic expression is 0/0 at m = 1 when a + b = -1
        off2[0] = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + a + b) ** 2 * (3.0 + a + b))
    return diag, np.sqrt(off2)


@lru_cache(maxsize=256)
def _gauss_jacobi_cached(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    diag, off = _jacobi_recurrence(n, a, b)
    if n == 1:
        nodes = diag.copy()
        vecs = np.ones((1, 1))
    else:
        nodes, vecs = eigh_tridiagonal(diag, off)
    log_mu0 = (a + b + 1.0) * np.log(2.0) + gammaln(a + 1.0) + gammaln(b + 1.0) - gammaln(a + b + 2.0)
    weights = np.exp(log_mu0) * vecs[0, :] ** 2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_jacobi(n: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss–Jacobi rule with ``n`` nodes for the weight ``(1-x)**a * (1+x)**b``.

    Exact for polynomials of degree ``2n - 1``. Requires ``a, b > -1``.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if a <= -1 or b <= -1:
        raise ValueError("Jacobi exponents must exceed -1")
    return _gauss_jacobi_cached(int(n), float(a), float(b))


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return gauss_jacobi(n, 0.0, 0.0)


@lru_cache(maxsize=64)
def _de_line_cached(level: int, reach: float) -> tuple[np.ndarray, np.ndarray]:
    h = 2.0 ** (-level)
    kmax = int(np.ceil(np.arcsinh(reach) / h))
    tau = h * np.arange(-kmax, kmax + 1)
    nodes = np.sinh(tau)
    weights = h * np.cosh(tau)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def de_line_rule(level: int, reach: float = 400.0) -> tuple[np.ndarray, np.ndarray]:
    """Double-exponential rule for integrals over the real line.

    Uses the substitution ``t = sinh(tau)`` followed by the trapezoid rule with
    step ``2**-level`` in ``tau``. For integrands decaying like ``exp(-c|t|)`` the
    transformed integrand decays double exponentially. Nodes are kept while
    ``|t| <= reach``. Rules of consecutive levels are nested.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    return _de_line_cached(int(level), float(reach))


@lru_cache(maxsize=64)
def _tanh_sinh_cached(level: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    h = 2.0 ** (-level)
    # run out until the endpoint gap underflows, so singular tails are not cut off
    kmax = int(np.ceil(6.2 / h))
    tau = h * np.arange(-kmax, kmax + 1)
    arg = 0.5 * np.pi * np.sinh(tau)
    x = np.tanh(arg)
    with np.errstate(over="ignore", under="ignore"):
        # distance to the nearer endpoint, free of the cancellation in 1 - |x|
        gap = np.exp(-np.abs(arg)) / np.cosh(arg)
        w = h * 0.5 * np.pi * np.cosh(tau) / np.cosh(arg) ** 2
    keep = (gap > 0.0) & (w > 0.0)
    x, gap, w = x[keep], gap[keep], w[keep]
    for arr in (x, gap, w):
        arr.setflags(write=False)
    return x, gap, w


def tanh_sinh(level: int, lo: float = -1.0, hi: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Tanh-sinh rule on ``[lo, hi]``; tolerant of integrable endpoint singularities.

    Nodes are placed relative to the nearer endpoint so that they keep full
    relative precision in their distance to it.
    """
    x, gap, w = _tanh_sinh_cached(int(level))
    half = 0.5 * (hi - lo)
    nodes = np.where(x < 0.0, lo + half * gap, hi - half * gap)
    return nodes, half * w


def periodic_trapezoid(n: int, offset: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced rule on a full period ``[0, 2π)``."""
    theta = offset + 2.0 * np.pi * np.arange(n) / n
    return theta, np.full(n, 2.0 * np.pi / n)
