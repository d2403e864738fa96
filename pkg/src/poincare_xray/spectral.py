"""Expansion in the singular bases, SVD inversion, the distinguished operators, Sobolev norms.

Disk-side functions are expanded in ``Φ*Ẑ_{nk}^γ`` (unit norm in
``L²(D_H, x^{2γ+3} dV_H)``); data-side functions in ``ψ_{nk}^{γ,H}`` (unit norm in
``L²(G, μ_h^{-2γ} dβ da)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from . import geometry as geo
from .quadrature import gauss_jacobi
from .specfun import (
    check_gamma,
    disk_indices,
    jacobi_p_all,
    psi_nk_gamma_H,
    sigma_nk,
    zernike_normalized,
)
from .transforms import DEFAULT_QUAD, QuadSpec, ScalarField, backproject_hyper, xray_hyper


class AliasingError(ValueError):
    """The grid is too coarse for the requested band limit."""


# ---------------------------------------------------------------------------
# coefficient tables


@dataclass(frozen=True)
class CoeffTable:
    """Complex coefficients indexed by ``(n, k)``, ``0 <= n <= n_max``, ``k_min <= k <= k_max``.

    Disk tables use ``k_min = 0, k_max = n_max`` and keep zeros where ``k > n``.
    """

    gamma: float
    space: str
    values: np.ndarray
    k_min: int = 0

    def __post_init__(self):
        if self.space not in ("disk", "data"):
            raise ValueError("space must be 'disk' or 'data'")
        check_gamma(self.gamma)
        vals = np.array(self.values, dtype=complex)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if self.space == "disk":
            if self.k_min != 0 or vals.shape[1] != vals.shape[0]:
                raise ValueError("disk tables are square with k starting at 0")
            if np.any(vals[~self.in_band_mask()] != 0):
                raise ValueError("disk tables must vanish for k > n")

    @classmethod
    def zeros(cls, gamma, space, n_max, k_max=None, k_min=None):
        if space == "disk":
            return cls(gamma, space, np.zeros((n_max + 1, n_max + 1)), 0)
        k_max = n_max + 8 if k_max is None else k_max
        k_min = -k_max if k_min is None else k_min
        return cls(gamma, space, np.zeros((n_max + 1, k_max - k_min + 1)), k_min)

    @classmethod
    def from_entries(cls, gamma, space, n_max, entries: dict, k_max=None, k_min=None):
        base = cls.zeros(gamma, space, n_max, k_max, k_min)
        vals = base.values.copy()
        for (n, k), v in entries.items():
            vals[n, k - base.k_min] = v
        return cls(gamma, space, vals, base.k_min)

    @property
    def n_max(self) -> int:
        return self.values.shape[0] - 1

    @property
    def k_max(self) -> int:
        return self.k_min + self.values.shape[1] - 1

    def __getitem__(self, idx):
        n, k = idx
        if not (0 <= n <= self.n_max and self.k_min <= k <= self.k_max):
            return 0j
        return complex(self.values[n, k - self.k_min])

    def index_grids(self):
        n = np.arange(self.n_max + 1)[:, None]
        k = np.arange(self.k_min, self.k_max + 1)[None, :]
        return np.broadcast_arrays(n, k)

    def in_band_mask(self) -> np.ndarray:
        n, k = self.index_grids()
        return (k >= 0) & (k <= n)

    def entries(self) -> Iterable[tuple[tuple[int, int], complex]]:
        n, k = self.index_grids()
        for i, j in zip(*np.nonzero(self.values)):
            yield (int(n[i, j]), int(k[i, j])), complex(self.values[i, j])

    def in_band(self) -> "CoeffTable":
        return CoeffTable(self.gamma, self.space, np.where(self.in_band_mask(), self.values, 0), self.k_min)

    def out_of_band(self) -> "CoeffTable":
        return CoeffTable(self.gamma, self.space, np.where(self.in_band_mask(), 0, self.values), self.k_min)

    def offending(self, tol: float) -> list[tuple[int, int]]:
        """Out-of-band indices whose coefficient magnitude exceeds ``tol``."""
        n, k = self.index_grids()
        hit = (~self.in_band_mask()) & (np.abs(self.values) > tol)
        return sorted(zip(n[hit].tolist(), k[hit].tolist()))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2)))

    def to_disk(self) -> "CoeffTable":
        """In-band part of a data table re-indexed as a disk table."""
        n_max = self.n_max
        vals = np.zeros((n_max + 1, n_max + 1), dtype=complex)
        for n in range(n_max + 1):
            for k in range(n + 1):
                vals[n, k] = self[n, k]
        return CoeffTable(self.gamma, "disk", vals, 0)

    def to_data(self, k_max=None) -> "CoeffTable":
        out = CoeffTable.zeros(self.gamma, "data", self.n_max, k_max)
        vals = out.values.copy()
        for (n, k), v in self.entries():
            vals[n, k - out.k_min] = v
        return CoeffTable(self.gamma, "data", vals, out.k_min)

    def scaled(self, factor: np.ndarray | float) -> "CoeffTable":
        return CoeffTable(self.gamma, self.space, self.values * factor, self.k_min)

    def __add__(self, other: "CoeffTable") -> "CoeffTable":
        if (self.space, self.gamma, self.k_min, self.values.shape) != (other.space, other.gamma, other.k_min, other.values.shape):
            raise ValueError("tables have different layouts")
        return CoeffTable(self.gamma, self.space, self.values + other.values, self.k_min)

    def __sub__(self, other: "CoeffTable") -> "CoeffTable":
        return self + other.scaled(-1.0)


def sigma_table(gamma: float, n_max: int) -> np.ndarray:
    """Singular values laid out as a disk table (zeros for ``k > n``)."""
    out = np.zeros((n_max + 1, n_max + 1))
    for n, k in disk_indices(n_max):
        out[n, k] = sigma_nk(n, k, gamma)
    return out


# ---------------------------------------------------------------------------
# data grids


@lru_cache(maxsize=128)
def _data_nodes(gamma: float, n_alpha: int):
    x, w = gauss_jacobi(n_alpha, gamma + 0.5, gamma + 0.5)
    one_minus = 1.0 - x * x
    alpha = np.arcsin(x)
    a = x / np.sqrt(one_minus)
    # ∫∫ u v̄ μ_h^{-2γ} dβ da = ∫∫ u v̄ (1-x²)^{-γ-3/2} dβ dx
    weights = w * one_minus ** (-2.0 * gamma - 2.0)
    return x, alpha, a, weights


@dataclass(frozen=True)
class DataGrid:
    """Samples of a function on geodesic space at fan-beam pullback nodes.

    Nodes are ``β_i = 2πi/n_beta`` and ``a_j = tan(α_j)`` where ``sin α_j`` are the
    Gauss–Jacobi nodes for the weight ``(1-x²)^{γ+1/2}``. ``values`` has shape
    ``(n_beta, n_alpha)``.
    """

    gamma: float
    values: np.ndarray
    convention: str = "L2(G, mu_h^(-2 gamma) dbeta da)"
    profile: str = "range"

    def __post_init__(self):
        check_gamma(self.gamma)
        if self.profile not in ("range", "plain"):
            raise ValueError("profile must be 'range' or 'plain'")
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 2:
            raise ValueError("data grid values must be two-dimensional")
        if not np.all(np.isfinite(vals)):
            raise ValueError("data grid contains non-finite samples")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_beta(self) -> int:
        return self.values.shape[0]

    @property
    def n_alpha(self) -> int:
        return self.values.shape[1]

    @property
    def beta(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_beta) / self.n_beta

    @property
    def alpha(self) -> np.ndarray:
        return _data_nodes(self.gamma, self.n_alpha)[1]

    @property
    def a(self) -> np.ndarray:
        return _data_nodes(self.gamma, self.n_alpha)[2]

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights for ``∫∫ · μ_h^{-2γ} dβ da`` on the node tensor grid."""
        w = _data_nodes(self.gamma, self.n_alpha)[3]
        return np.outer(np.full(self.n_beta, 2.0 * np.pi / self.n_beta), w)

    def mesh(self):
        return np.meshgrid(self.beta, self.a, indexing="ij")

    @classmethod
    def sample(cls, u: Callable, gamma: float, n_beta: int, n_alpha: int, profile: str = "range") -> "DataGrid":
        shell = cls(gamma, np.zeros((n_beta, n_alpha)))
        b, a = shell.mesh()
        return cls(gamma, np.asarray(u(b, a), dtype=complex), profile=profile)

    def inner(self, other: "DataGrid") -> complex:
        self._same_layout(other)
        return complex(np.sum(self.weights * self.values * np.conj(other.values)))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(self.values) ** 2)))

    def _same_layout(self, other: "DataGrid") -> None:
        if self.gamma != other.gamma or self.values.shape != other.values.shape:
            raise ValueError("data grids have different layouts")

    def interpolate(self, beta, a) -> np.ndarray:
        """Evaluate off the nodes.

        Trigonometric interpolation in ``β``. In the fiber variable each ``β``-mode
        ``m`` has its ``e^{imα}`` phase removed and the remainder is interpolated as a
        polynomial in ``sin α`` through the Gauss–Jacobi nodes. With the ``"range"``
        profile the factor ``μ_h^{2γ+2}`` shared by range data is divided out first,
        which makes the interpolation exact on band-limited combinations of
        ``ψ_{nk}^{γ,H}``; the ``"plain"`` profile interpolates the raw samples
        (exact on data that is polynomial in ``sin α`` after the phase removal,
        constants included).
        """
        beta, a = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(a, dtype=float))
        nb = self.n_beta
        modes = np.fft.fftfreq(nb, d=1.0 / nb).astype(int)
        if nb % 2 == 0:
            modes[nb // 2] = nb // 2  # Nyquist mode handled as +nb/2 (split below)
        spec = np.fft.fft(self.values, axis=0) / nb
        x_nodes, alpha_nodes = _data_nodes(self.gamma, self.n_alpha)[:2]
        bary = _barycentric_weights(x_nodes)
        expo = self.gamma + 1.0 if self.profile == "range" else 0.0
        spec = spec * (1.0 - x_nodes**2) ** (-expo)

        al = np.arctan(a.ravel())
        x = np.sin(al)
        basis = _barycentric_matrix(x_nodes, bary, x)  # (points, n_alpha)
        b = beta.ravel()
        out = np.zeros(b.size, dtype=complex)
        for idx, m in enumerate(modes):
            reduced = spec[idx] * np.exp(-1j * m * alpha_nodes)
            vals = basis @ reduced
            if nb % 2 == 0 and idx == nb // 2:
                out += 0.5 * vals * np.exp(1j * m * (b + al))
                out += 0.5 * (basis @ (spec[idx] * np.exp(1j * m * alpha_nodes))) * np.exp(-1j * m * (b + al))
            else:
                out += vals * np.exp(1j * m * (b + al))
        out *= (1.0 - x * x) ** expo
        return out.reshape(beta.shape)


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    # scale rows to avoid overflow for many nodes
    logs = np.sum(np.log(np.abs(diff)), axis=1)
    sign = np.prod(np.sign(diff), axis=1)
    w = sign * np.exp(-(logs - logs.max()))
    return w


def _barycentric_matrix(nodes, bary, x):
    diff = x[:, None] - nodes[None, :]
    exact = diff == 0.0
    diff = np.where(exact, 1.0, diff)
    terms = bary[None, :] / diff
    mat = terms / terms.sum(axis=1, keepdims=True)
    rows = np.any(exact, axis=1)
    if np.any(rows):
        mat[rows] = exact[rows].astype(float)
    return mat


def required_n_beta(n_max: int, k_max: int) -> int:
    """Smallest ``n_beta`` for which analysis on the full ``(n, k)`` window is exact."""
    return max(4 * (n_max + 1), 2 * (n_max + 2 * k_max) + 1)


def _fiber_factor(n_max: int, gamma: float, x: np.ndarray, alpha: np.ndarray):
    """``(1-x²)^{γ+1} p_n(x)`` for all ``n``: the fiber part of ``ψ^{γ,H}`` without phases."""
    return jacobi_p_all(n_max, gamma, x) * (1.0 - x * x) ** (gamma + 1.0)


def analyze_data(grid: DataGrid, n_max: int, k_max: int | None = None) -> CoeffTable:
    """Coefficients ``⟨u, ψ_{nk}^{γ,H}⟩`` for ``n <= n_max``, ``|k| <= k_max``."""
    gamma = grid.gamma
    k_max = n_max + 8 if k_max is None else k_max
    if grid.n_alpha < n_max + 1:
        raise AliasingError(f"need at least {n_max + 1} fiber nodes, grid has {grid.n_alpha}")
    need = required_n_beta(n_max, k_max)
    if grid.n_beta < need:
        raise AliasingError(f"need at least {need} beta nodes for band {n_max} and window {k_max}, grid has {grid.n_beta}")
    x, alpha, _, w = _data_nodes(gamma, grid.n_alpha)
    nb = grid.n_beta
    spec = np.fft.fft(grid.values, axis=0) * (2.0 * np.pi / nb)
    fiber = _fiber_factor(n_max, gamma, x, alpha) * w  # (n, j)
    table = CoeffTable.zeros(gamma, "data", n_max, k_max)
    vals = np.zeros_like(table.values)
    n = np.arange(n_max + 1)
    for col, k in enumerate(range(table.k_min, table.k_max + 1)):
        m = n - 2 * k
        rows = spec[np.mod(m, nb)]  # (n, j)
        phase = np.exp(-1j * m[:, None] * (alpha[None, :] + 0.5 * np.pi))
        vals[:, col] = np.sum(rows * phase * fiber, axis=1)
    return CoeffTable(gamma, "data", vals, table.k_min)


def synthesize_data(table: CoeffTable, n_beta: int, n_alpha: int) -> DataGrid:
    """Samples of ``Σ c_{nk} ψ_{nk}^{γ,H}`` on a data grid."""
    if table.space != "data":
        table = table.to_data()
    gamma = table.gamma
    x, alpha, _, _ = _data_nodes(gamma, n_alpha)
    beta = 2.0 * np.pi * np.arange(n_beta) / n_beta
    fiber = _fiber_factor(table.n_max, gamma, x, alpha)
    out = np.zeros((n_beta, n_alpha), dtype=complex)
    ngrid, kgrid = table.index_grids()
    for (n, k), c in table.entries():
        m = n - 2 * k
        out += c * np.exp(1j * m * (beta[:, None] + alpha[None, :] + 0.5 * np.pi)) * fiber[n][None, :]
    return DataGrid(gamma, out)


def data_function(table: CoeffTable) -> Callable:
    """``(β, a) ↦ Σ c_{nk} ψ_{nk}^{γ,H}(β, a)`` as a vectorized callable."""
    entries = list(table.entries())
    gamma = table.gamma

    def u(beta, a):
        beta, a = np.broadcast_arrays(np.asarray(beta, dtype=float), np.asarray(a, dtype=float))
        out = np.zeros(beta.shape, dtype=complex)
        for (n, k), c in entries:
            out += c * psi_nk_gamma_H(n, k, gamma, beta, a)
        return out

    return u


# ---------------------------------------------------------------------------
# disk grids


@lru_cache(maxsize=128)
def _disk_nodes(gamma: float, n_rho: int):
    t, w = gauss_jacobi(n_rho, gamma, 0.0)
    rho = np.sqrt(0.5 * (1.0 + t))
    return rho, w * 2.0 ** (-gamma - 2.0)


@dataclass(frozen=True)
class DiskGrid:
    """Samples of a function on the Poincaré disk at pulled-back polar nodes.

    The Euclidean nodes are ``w = ρ_j e^{iω_i}`` with ``ω_i = 2πi/n_omega`` and
    ``2ρ_j² - 1`` the Gauss–Jacobi nodes for ``(1-t)^γ``; the samples are taken at
    ``z = Φ^{-1}(w)``. ``values`` has shape ``(n_omega, n_rho)``.
    """

    gamma: float
    values: np.ndarray

    def __post_init__(self):
        check_gamma(self.gamma)
        vals = np.array(self.values, dtype=complex)
        if vals.ndim != 2:
            raise ValueError("disk grid values must be two-dimensional")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def n_omega(self) -> int:
        return self.values.shape[0]

    @property
    def n_rho(self) -> int:
        return self.values.shape[1]

    @property
    def omega(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_omega) / self.n_omega

    @property
    def rho(self) -> np.ndarray:
        return _disk_nodes(self.gamma, self.n_rho)[0]

    def euclid_points(self) -> np.ndarray:
        return self.rho[None, :] * np.exp(1j * self.omega)[:, None]

    def points(self) -> np.ndarray:
        return geo.phi_inv(self.euclid_points())

    @property
    def weights(self) -> np.ndarray:
        """Weights for ``∫ · x^{2γ+3} dV_H`` (equivalently ``∫ · d^γ dV_E`` after Φ)."""
        w = _disk_nodes(self.gamma, self.n_rho)[1]
        return np.outer(np.full(self.n_omega, 2.0 * np.pi / self.n_omega), w)

    @classmethod
    def sample(cls, f: Callable, gamma: float, n_omega: int, n_rho: int) -> "DiskGrid":
        shell = cls(gamma, np.zeros((n_omega, n_rho)))
        return cls(gamma, np.asarray(f(shell.points()), dtype=complex))

    def inner(self, other: "DiskGrid") -> complex:
        if self.values.shape != other.values.shape or self.gamma != other.gamma:
            raise ValueError("disk grids have different layouts")
        return complex(np.sum(self.weights * self.values * np.conj(other.values)))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.weights * np.abs(self.values) ** 2)))


def _zernike_radial_table(n_max: int, gamma: float, rho: np.ndarray) -> dict:
    # Ẑ_{nk}(ρ e^{iω}) = R_{nk}(ρ) e^{i(n-2k)ω}
    return {(n, k): zernike_normalized(n, k, gamma, rho.astype(complex)) for n, k in disk_indices(n_max)}


def analyze_disk(grid: DiskGrid, n_max: int) -> CoeffTable:
    """Coefficients ``⟨f, Φ*Ẑ_{nk}^γ⟩`` for ``0 <= k <= n <= n_max``."""
    if grid.n_omega <= 2 * n_max:
        raise AliasingError(f"need more than {2 * n_max} angular nodes")
    if grid.n_rho < n_max // 2 + 1:
        raise AliasingError(f"need at least {n_max // 2 + 1} radial nodes")
    rho, w = _disk_nodes(grid.gamma, grid.n_rho)
    no = grid.n_omega
    spec = np.fft.fft(grid.values, axis=0) * (2.0 * np.pi / no)
    radial = _zernike_radial_table(n_max, grid.gamma, rho)
    vals = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for (n, k), R in radial.items():
        vals[n, k] = np.sum(spec[(n - 2 * k) % no] * np.conj(R) * w)
    return CoeffTable(grid.gamma, "disk", vals, 0)


def synthesize_disk(table: CoeffTable, n_omega: int, n_rho: int) -> DiskGrid:
    if table.space != "disk":
        table = table.to_disk()
    gamma = table.gamma
    rho, _ = _disk_nodes(gamma, n_rho)
    omega = 2.0 * np.pi * np.arange(n_omega) / n_omega
    radial = _zernike_radial_table(table.n_max, gamma, rho)
    out = np.zeros((n_omega, n_rho), dtype=complex)
    for (n, k), c in table.entries():
        out += c * np.exp(1j * (n - 2 * k) * omega)[:, None] * radial[(n, k)][None, :]
    return DiskGrid(gamma, out)


def disk_function(table: CoeffTable) -> ScalarField:
    """``Σ c_{nk} Φ*Ẑ_{nk}^γ`` as a field on the Poincaré disk."""
    entries = list(table.entries())
    gamma = table.gamma

    def f(z):
        w = geo.phi_map(z)
        out = np.zeros(np.shape(w), dtype=complex)
        for (n, k), c in entries:
            out += c * zernike_normalized(n, k, gamma, w)
        return out

    return ScalarField(f, model="hyper", even=True)


def basis_field(n: int, k: int, gamma: float) -> ScalarField:
    """``Φ*Ẑ_{nk}^γ`` as a field on the Poincaré disk."""
    return ScalarField(lambda z: zernike_normalized(n, k, gamma, geo.phi_map(z)), model="hyper", even=True)


# ---------------------------------------------------------------------------
# forward data and SVD inversion


def forward_data(f, gamma: float, n_beta: int, n_alpha: int, q: QuadSpec = DEFAULT_QUAD) -> DataGrid:
    """Samples of ``I_0^H x^{2+2γ} f`` on a data grid."""
    return DataGrid.sample(lambda b, a: xray_hyper(f, gamma, b, a, q), gamma, n_beta, n_alpha)


@dataclass(frozen=True)
class Reconstruction:
    coeffs: CoeffTable
    grid: DiskGrid
    data_coeffs: CoeffTable
    out_of_range: CoeffTable = field(repr=False)


def svd_reconstruct(
    data: DataGrid,
    n_max: int,
    k_max: int | None = None,
    filter_lambda: float | None = None,
    n_omega: int | None = None,
    n_rho: int | None = None,
) -> Reconstruction:
    """Invert ``I_0^H x^{2+2γ}`` on the band ``n <= n_max`` by dividing by ``σ_{nk}``.

    Out-of-range coefficients (``k < 0`` or ``k > n``) are reported, not inverted.
    With ``filter_lambda`` the division is damped by ``σ²/(σ²+λ²)``.
    """
    gamma = data.gamma
    dc = analyze_data(data, n_max, k_max)
    sig = sigma_table(gamma, n_max)
    inband = dc.to_disk().values
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = np.where(sig > 0, 1.0 / sig, 0.0)
    if filter_lambda is not None:
        inv = inv * sig**2 / (sig**2 + float(filter_lambda) ** 2)
    coeffs = CoeffTable(gamma, "disk", inband * inv, 0)
    n_omega = 2 * n_max + 2 if n_omega is None else n_omega
    n_rho = n_max // 2 + 2 if n_rho is None else n_rho
    return Reconstruction(coeffs, synthesize_disk(coeffs, n_omega, n_rho), dc, dc.out_of_band())


# ---------------------------------------------------------------------------
# distinguished operators


def _stencil_derivatives(g: Callable, h: float):
    f2, f1, f0, g1, g2 = (g(s * h) for s in (-2, -1, 0, 1, 2))
    d1 = (f2 - 8.0 * f1 + 8.0 * g1 - g2) / (12.0 * h)
    d2 = (-f2 + 16.0 * f1 - 30.0 * f0 + 16.0 * g1 - g2) / (12.0 * h * h)
    return f0, d1, d2


def apply_L_gamma_H(f: Callable, gamma: float, z, h: float = 1e-3):
    """Finite-difference application of the disk operator ``L_γ^H`` at ``z``.

    In the coordinates ``(x, ω)``:
    ``-(1-x²)∂_x² - ((2γ+1)/x - (2γ+3)x)∂_x - (1-x²)^{-1}∂_ω² + (1+γ)²``.
    """
    z = np.asarray(z, dtype=complex)
    x = geo.bdf_x(z)
    if np.any((x <= 0.0) | (x >= 1.0)):
        raise ValueError("stencil leaves the domain: need 0 < x < 1 (interior, off-centre)")
    omega = np.angle(z)
    hx = h * np.minimum(x, 1.0 - x)

    def at(xx, ww):
        r = np.sqrt((1.0 - xx) / (1.0 + xx))
        return f(r * np.exp(1j * ww))

    f0, fx, fxx = _stencil_derivatives(lambda s: at(x + s / h * hx, omega), h)
    fx, fxx = fx * h / hx, fxx * (h / hx) ** 2
    _, _, fww = _stencil_derivatives(lambda s: at(x, omega + s), h)
    one = 1.0 - x * x
    return -one * fxx - ((2 * gamma + 1) / x - (2 * gamma + 3) * x) * fx - fww / one + (1 + gamma) ** 2 * f0


def apply_T_gamma_H(u: Callable, gamma: float, beta, a, h: float = 1e-3):
    """Finite-difference application of ``T_γ^H = -T² + 2(γ+1)aT + γ² - 2(γ+1)a² - 1``.

    ``T = ∂_β - (1+a²)∂_a`` is differentiated along its flow
    ``s ↦ (β+s, tan(atan a - s))``.
    """
    beta = np.asarray(beta, dtype=float)
    a = np.asarray(a, dtype=float)
    al = np.arctan(a)
    room = 0.5 * np.pi - np.abs(al)
    hs = h * np.minimum(1.0, room)
    if np.any(2.0 * hs >= room):
        raise ValueError("stencil leaves the domain")

    g0, g1, g2 = _stencil_derivatives(lambda s: u(beta + s / h * hs, np.tan(al - s / h * hs)), h)
    g1, g2 = g1 * h / hs, g2 * (h / hs) ** 2
    return -g2 + 2 * (gamma + 1) * a * g1 + (gamma**2 - 2 * (gamma + 1) * a * a - 1) * g0


def funcrel_eigenvalue(D: float, D_omega: float, gamma: float) -> float:
    """Right-hand side of the functional relation for the normal operator.

    ``2^{2γ+2}π/(D+1) · B((D+D_ω)/2+1+γ, (D-D_ω)/2+1+γ) / B((D+D_ω)/2+1, (D-D_ω)/2+1)``,
    written with Gamma functions directly.
    """
    p, r = 0.5 * (D + D_omega), 0.5 * (D - D_omega)
    G = math.gamma
    weighted = G(p + 1 + gamma) * G(r + 1 + gamma) / G(p + r + 2 + 2 * gamma)
    plain = G(p + 1) * G(r + 1) / G(p + r + 2)
    return 2.0 ** (2 * gamma + 2) * math.pi / (D + 1) * weighted / plain


def normal_operator(f, gamma: float, z, q: QuadSpec = DEFAULT_QUAD):
    """``x^{-1}(I_0^H)^♯ μ_h^{-2γ} I_0^H x^{2+2γ} f`` evaluated at points ``z``."""
    gamma = check_gamma(gamma)

    def data(beta, a):
        return geo.mu_h(a) ** (-2.0 * gamma) * xray_hyper(f, gamma, beta, a, q)

    return backproject_hyper(data, z, q) / geo.bdf_x(z)


# ---------------------------------------------------------------------------
# Sobolev norms and stability


def sobolev_norm(table: CoeffTable, s: float) -> float:
    """``(Σ (n+1+γ)^{2s} |c_{nk}|²)^{1/2}`` over the stored entries."""
    if s < 0:
        raise ValueError("s must be non-negative")
    n, _ = table.index_grids()
    w = (n + 1.0 + table.gamma) ** (2.0 * s)
    return float(np.sqrt(np.sum(w * np.abs(table.values) ** 2)))


def forward_matrix(gamma: float, n_max: int, q: QuadSpec = DEFAULT_QUAD, n_alpha: int | None = None) -> np.ndarray:
    """Numerically computed matrix of ``I_0^H x^{2+2γ}`` from disk to data coefficients (in band)."""
    idx = disk_indices(n_max)
    n_alpha = n_max + 2 if n_alpha is None else n_alpha
    n_beta = required_n_beta(n_max, n_max)
    cols = []
    for n, k in idx:
        grid = forward_data(basis_field(n, k, gamma), gamma, n_beta, n_alpha, q)
        dc = analyze_data(grid, n_max, n_max)
        cols.append([dc[nn, kk] for nn, kk in idx])
    return np.array(cols).T


def stability_probe(
    gamma: float,
    n_max: int = 8,
    n_phantoms: int = 50,
    s_values=(0.0, 1.0),
    seed: int = 0,
    q: QuadSpec = DEFAULT_QUAD,
) -> dict:
    """Empirical constants in ``C1‖Nf‖_{s+min(1,1+γ)} <= ‖f‖_s <= C2‖Nf‖_{s+max(1,1+γ)}``.

    ``N`` is the normal operator, applied through a numerically computed forward
    matrix on random band-limited phantoms.
    """
    gamma = check_gamma(gamma)
    rng = np.random.default_rng(seed)
    idx = disk_indices(n_max)
    A = forward_matrix(gamma, n_max, q)
    sig = np.array([sigma_nk(n, k, gamma) for n, k in idx])
    lo, hi = min(1.0, 1.0 + gamma), max(1.0, 1.0 + gamma)
    report = {"gamma": gamma, "n_max": n_max, "n_phantoms": n_phantoms, "exponents": [lo, hi], "by_s": {}}
    phantoms = []
    for _ in range(n_phantoms):
        decay = rng.uniform(0.0, 3.0)
        band = rng.integers(0, n_max + 1)
        c = rng.normal(size=len(idx)) + 1j * rng.normal(size=len(idx))
        c *= np.array([(n + 1.0) ** (-decay) if n <= band else 0.0 for n, _ in idx])
        if not np.any(c):
            c[0] = 1.0
        phantoms.append(c)
    for s in s_values:
        lower, upper = [], []
        for c in phantoms:
            f_tab = CoeffTable.from_entries(gamma, "disk", n_max, dict(zip(idx, c)))
            Nf = CoeffTable.from_entries(gamma, "disk", n_max, dict(zip(idx, sig * (A @ c))))
            fs = sobolev_norm(f_tab, s)
            lower.append(fs / sobolev_norm(Nf, s + lo))
            upper.append(fs / sobolev_norm(Nf, s + hi))
        report["by_s"][float(s)] = {"C1": float(np.min(lower)), "C2": float(np.max(upper))}
    return report
