"""Grid files: one ``#``-prefixed JSON header line followed by a CSV body.

The body has columns ``i,j,re,im`` with node indices and the real and imaginary
parts written with 17 significant digits, which round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectral import DataGrid, DiskGrid

SCHEMA_VERSION = "1"


class SchemaError(ValueError):
    """The file does not follow the grid-file schema."""


def _node_header(space: str, shape: tuple[int, int]) -> dict:
    if space == "data":
        return {
            "beta": {"kind": "uniform", "count": shape[0]},
            "alpha": {"kind": "gauss-jacobi", "count": shape[1], "variable": "sin(alpha)"},
        }
    return {
        "omega": {"kind": "uniform", "count": shape[0]},
        "rho": {"kind": "gauss-jacobi", "count": shape[1], "variable": "2 rho^2 - 1"},
    }


@dataclass
class GridFile:
    space: str
    gamma: float
    values: np.ndarray
    convention: str
    profile: str = "range"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.space not in ("data", "disk"):
            raise SchemaError(f"unknown space tag '{self.space}'")
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 2:
            raise SchemaError("grid values must be two-dimensional")

    @classmethod
    def from_grid(cls, grid, meta: dict | None = None) -> "GridFile":
        if isinstance(grid, DataGrid):
            return cls("data", grid.gamma, grid.values, grid.convention, grid.profile, dict(meta or {}))
        if isinstance(grid, DiskGrid):
            return cls("disk", grid.gamma, grid.values, "L2(D_H, x^(2 gamma + 3) dV_H)", "range", dict(meta or {}))
        raise TypeError("expected a DataGrid or DiskGrid")

    def to_grid(self):
        if self.space == "data":
            return DataGrid(self.gamma, self.values, convention=self.convention, profile=self.profile)
        return DiskGrid(self.gamma, self.values)

    def header(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "space": self.space,
            "gamma": self.gamma,
            "nodes": _node_header(self.space, self.values.shape),
            "convention": self.convention,
            "profile": self.profile,
            "meta": self.meta,
        }

    def dumps(self) -> str:
        out = io.StringIO()
        out.write("# " + json.dumps(self.header(), sort_keys=True) + "\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["i", "j", "re", "im"])
        for (i, j), v in np.ndenumerate(self.values):
            writer.writerow([i, j, format(v.real, ".17g"), format(v.imag, ".17g")])
        return out.getvalue()

    def write(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def loads(cls, text: str) -> "GridFile":
        first, _, body = text.partition("\n")
        if not first.startswith("#"):
            raise SchemaError("missing '#' JSON header line")
        try:
            head = json.loads(first[1:])
        except json.JSONDecodeError as exc:
            raise SchemaError(f"header is not valid JSON: {exc}") from exc
        if head.get("schema") != SCHEMA_VERSION:
            raise SchemaError(f"unsupported schema version {head.get('schema')!r}")
        for key in ("space", "gamma", "nodes", "convention"):
            if key not in head:
                raise SchemaError(f"header lacks '{key}'")
        space = head["space"]
        if space not in ("data", "disk"):
            raise SchemaError(f"unknown space tag '{space}'")
        axes = ("beta", "alpha") if space == "data" else ("omega", "rho")
        try:
            shape = tuple(int(head["nodes"][ax]["count"]) for ax in axes)
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError("node description incomplete") from exc
        rows = list(csv.reader(io.StringIO(body)))
        if not rows or rows[0] != ["i", "j", "re", "im"]:
            raise SchemaError("CSV body must start with the columns i,j,re,im")
        values = np.full(shape, np.nan + 0j)
        try:
            for row in rows[1:]:
                if not row:
                    continue
                i, j = int(row[0]), int(row[1])
                if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                    raise IndexError(i, j)
                values[i, j] = complex(float(row[2]), float(row[3]))
        except (ValueError, IndexError) as exc:
            raise SchemaError(f"malformed or out-of-range body row: {row}") from exc
        if np.isnan(values.real).any():
            raise SchemaError("body does not cover every node of the header")
        return cls(
            space,
            float(head["gamma"]),
            values,
            head["convention"],
            head.get("profile", "range"),
            head.get("meta", {}),
        )

    @classmethod
    def read(cls, path) -> "GridFile":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise SchemaError(f"cannot read {path}: {exc}") from exc
        return cls.loads(text)


def write_pgm(path, values, part: str = "abs") -> None:
    """8-bit binary PGM of ``|values|``, ``Re`` or ``Im``, scaled to the full grey range."""
    values = np.asarray(values)
    img = {"abs": np.abs, "re": np.real, "im": np.imag}[part](values).astype(float)
    lo, hi = float(img.min()), float(img.max())
    scaled = np.zeros_like(img) if hi <= lo else (img - lo) / (hi - lo)
    pixels = np.rint(255.0 * scaled).astype(np.uint8)
    rows, cols = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
