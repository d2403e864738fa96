"""Phantom descriptors for disk-space and data-space test functions.

Disk descriptors (fields on the Poincaré disk):

``zernike:n,k``      unit-norm ``Φ*Ẑ_{nk}^γ``
``bump:c,w``         radial bump in the boundary defining function, supported in ``|x-c| < w``
``gauss:s``          pullback of the Euclidean Gaussian ``exp(-|w|²/s²)``
``generic``          ``x·(1 + Re z)``, smooth but outside the even class

Data descriptors (functions of ``(β, a)``):

``psi:n,k``          ``ψ_{nk}^{γ,H}``
``const:c``          the constant ``c``

Terms combine as ``coef*term+coef*term``, with coefficients parsed by
:func:`complex` (``2``, ``-0.5``, ``1j``).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry as geo
from .spectral import CoeffTable, basis_field
from .specfun import check_gamma, psi_nk_gamma_H
from .transforms import ScalarField, bump


class DescriptorError(ValueError):
    """Malformed or unknown phantom descriptor."""


@dataclass(frozen=True)
class Phantom:
    space: str
    fn: Callable
    table: CoeffTable | None
    descriptor: str
    profile: str = "range"

    @property
    def band_limited(self) -> bool:
        return self.table is not None


_TERM = re.compile(r"^\s*(?:(?P<coef>[^*]+)\*)?(?P<name>[a-z]+)(?::(?P<args>[^+]*))?\s*$")


def _split_terms(desc: str) -> list[str]:
    # '+' inside an exponent such as 1e+3 does not start a new term
    return [t for t in re.split(r"(?<![eE])\+", desc) if t.strip()]


def _numbers(args: str | None, count: int, name: str, integer: bool) -> list:
    parts = [] if not args else [p.strip() for p in args.split(",")]
    if len(parts) != count:
        raise DescriptorError(f"'{name}' expects {count} argument(s), got {len(parts)}")
    try:
        return [int(p) for p in parts] if integer else [float(p) for p in parts]
    except ValueError as exc:
        raise DescriptorError(f"bad numeric argument in '{name}:{args}'") from exc


def _disk_term(name, args, gamma):
    """Returns ``(field function, {(n, k): coefficient} or None)``."""
    if name == "zernike":
        n, k = _numbers(args, 2, name, True)
        if not 0 <= k <= n:
            raise DescriptorError(f"zernike index needs 0 <= k <= n, got ({n}, {k})")
        return basis_field(n, k, gamma).fn, {(n, k): 1.0}
    if name == "bump":
        c, w = _numbers(args, 2, name, False)
        if not (0.0 < w and 0.0 <= c - w and c + w <= 1.0):
            raise DescriptorError("bump needs 0 <= c-w and c+w <= 1 with w > 0")
        return (lambda z: bump(geo.bdf_x(z), c, w).astype(complex)), None
    if name == "gauss":
        (s,) = _numbers(args, 1, name, False)
        if s <= 0:
            raise DescriptorError("gauss width must be positive")
        return (lambda z: np.exp(-np.abs(geo.phi_map(z)) ** 2 / s**2).astype(complex)), None
    if name == "generic":
        if args:
            raise DescriptorError("'generic' takes no arguments")
        return (lambda z: (geo.bdf_x(z) * (1.0 + np.real(z))).astype(complex)), None
    raise DescriptorError(f"unknown disk phantom '{name}'")


def _data_term(name, args, gamma):
    if name == "psi":
        n, k = _numbers(args, 2, name, True)
        if n < 0:
            raise DescriptorError("psi degree must be non-negative")
        return (lambda b, a: psi_nk_gamma_H(n, k, gamma, b, a)), {(n, k): 1.0}
    if name == "const":
        (c,) = _numbers(args, 1, name, False)
        return (lambda b, a: np.full(np.broadcast(b, a).shape, c, dtype=complex)), None
    raise DescriptorError(f"unknown data phantom '{name}'")


def parse_phantom(desc: str, gamma: float, space: str = "disk") -> Phantom:
    """Build a phantom from a descriptor; sums of basis terms keep their coefficient table."""
    gamma = check_gamma(gamma)
    if space not in ("disk", "data"):
        raise DescriptorError("space must be 'disk' or 'data'")
    terms = _split_terms(desc)
    if not terms:
        raise DescriptorError("empty descriptor")
    fns, entries, exact, names = [], {}, True, set()
    for term in terms:
        m = _TERM.match(term)
        if m is None:
            raise DescriptorError(f"cannot parse term '{term}'")
        try:
            coef = complex(m["coef"].strip()) if m["coef"] else 1.0
        except ValueError as exc:
            raise DescriptorError(f"bad coefficient in '{term}'") from exc
        names.add(m["name"])
        build = _disk_term if space == "disk" else _data_term
        fn, basis = build(m["name"], m["args"], gamma)
        fns.append((coef, fn))
        if basis is None:
            exact = False
        else:
            for key, val in basis.items():
                entries[key] = entries.get(key, 0.0) + coef * val

    if space == "disk":
        def total(z):
            z = np.asarray(z, dtype=complex)
            return sum(c * f(z) for c, f in fns)

        fn = ScalarField(total, model="hyper", even="generic" not in names)
    else:
        def fn(beta, a):
            return sum(c * f(beta, a) for c, f in fns)

    table = None
    if exact:
        n_max = max(n for n, _ in entries)
        if space == "disk":
            table = CoeffTable.from_entries(gamma, "disk", n_max, entries)
        else:
            k_lo = min(k for _, k in entries)
            k_hi = max(k for _, k in entries)
            reach = max(abs(k_lo), abs(k_hi), n_max)
            table = CoeffTable.from_entries(gamma, "data", n_max, entries, k_max=reach, k_min=-reach)
    # constants are not of the range profile; interpolate such data verbatim
    profile = "plain" if space == "data" and "const" in names else "range"
    return Phantom(space, fn, table, desc, profile)
