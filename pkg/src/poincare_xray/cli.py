"""``poincare-xray`` command-line driver.

Exit codes: 0 all checks pass, 1 a check failed, 2 bad input (arguments,
descriptor, grid file), 3 quadrature did not converge.
"""

from __future__ import annotations

import os

# thread caps must be in place before numpy loads its BLAS
_threads = os.environ.get("XRAY_NUM_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .checks import CHECKS, CheckConfig, run_checks
from .gridio import GridFile, SchemaError, write_pgm
from .phantoms import DescriptorError, parse_phantom
from .range_characterization import range_test
from .spectral import (
    AliasingError,
    DataGrid,
    DiskGrid,
    analyze_data,
    analyze_disk,
    disk_function,
    forward_data,
    required_n_beta,
    sigma_table,
    sobolev_norm,
    svd_reconstruct,
    synthesize_data,
    synthesize_disk,
)
from .specfun import check_gamma
from .transforms import QuadratureError, QuadSpec, backproject_hyper

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_QUAD = 0, 1, 2, 3


class InputError(ValueError):
    """Bad command-line input."""


def _grid_shape(text: str) -> tuple[int, int]:
    try:
        a, b = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 41x24, got '{text}'") from None
    if a < 1 or b < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return a, b


def _gamma(text: str) -> float:
    try:
        return check_gamma(float(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _quad(args) -> QuadSpec:
    return QuadSpec(ts_level=args.quad) if args.quad is not None else QuadSpec()


def _read(path, space: str) -> GridFile:
    if path is None:
        raise InputError("--in PATH is required")
    gf = GridFile.read(path)
    if gf.space != space:
        raise SchemaError(f"{path} holds a {gf.space} grid, expected {space}")
    return gf


def _emit_grid(gf: GridFile, args) -> None:
    if args.out is None:
        if args.format == "pgm":
            raise InputError("--format pgm needs --out PATH")
        sys.stdout.write(gf.dumps())
        return
    if args.format == "pgm":
        write_pgm(args.out, gf.values)
    else:
        gf.write(args.out)


def _emit_json(payload: dict, path=None, stream=None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=_jsonable)
    if path is None:
        print(text, file=stream or sys.stdout)
    else:
        Path(path).write_text(text + "\n")


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _summary_path(args):
    return None if args.out is None else f"{args.out}.summary.json"


def _k_window(n_beta: int, band: int) -> int:
    """Widest ``|k|`` window, up to ``band + 8``, that the β sampling resolves."""
    k = band + 8
    while k > band and required_n_beta(band, k) > n_beta:
        k -= 1
    return k


def _table_rows(table) -> list:
    return [[n, k, c.real, c.imag] for (n, k), c in table.entries()]


# ---------------------------------------------------------------------------
# subcommands


def cmd_phantom(args) -> int:
    ph = parse_phantom(args.descriptor, args.gamma, args.space)
    n1, n2 = args.grid
    meta = {"descriptor": args.descriptor, "seed": args.seed}
    if args.space == "disk":
        grid = DiskGrid.sample(ph.fn, args.gamma, n1, n2)
        gf = GridFile.from_grid(grid, meta)
    else:
        gf = GridFile.from_grid(DataGrid.sample(ph.fn, args.gamma, n1, n2, profile=ph.profile), meta)
    _emit_grid(gf, args)
    return EXIT_OK


def cmd_forward(args) -> int:
    start = time.perf_counter()
    if args.phantom is not None:
        ph = parse_phantom(args.phantom, args.gamma, "disk")
        f, table, gamma, source = ph.fn, ph.table, args.gamma, args.phantom
    else:
        gf = _read(args.in_path, "disk")
        if args.band is None:
            raise InputError("forward from a disk grid needs --band N")
        table = analyze_disk(gf.to_grid(), args.band)
        f, gamma, source = disk_function(table), gf.gamma, str(args.in_path)
    n_beta, n_alpha = args.grid
    data = forward_data(f, gamma, n_beta, n_alpha, _quad(args))
    summary = {"command": "forward", "source": source, "gamma": gamma, "grid": [n_beta, n_alpha]}
    status = EXIT_OK
    if table is not None:
        expected = synthesize_data(table.scaled(sigma_table(gamma, table.n_max)).to_data(), n_beta, n_alpha)
        res = DataGrid(gamma, data.values - expected.values).norm() / max(expected.norm(), np.finfo(float).tiny)
        summary["singular_triple_rel_residual"] = res
        summary["tolerance"] = args.tol
        summary["passed"] = bool(res < args.tol)
        status = EXIT_OK if res < args.tol else EXIT_FAIL
    summary["seconds"] = time.perf_counter() - start
    _emit_grid(GridFile.from_grid(data, {"source": source}), args)
    # without --out the grid owns stdout, so the summary goes to stderr
    _emit_json(summary, _summary_path(args), sys.stderr)
    return status


def cmd_backproject(args) -> int:
    gf = _read(args.in_path, "data")
    data = gf.to_grid()
    n_omega, n_rho = args.grid
    shell = DiskGrid(gf.gamma, np.zeros((n_omega, n_rho)))
    values = backproject_hyper(data.interpolate, shell.points(), _quad(args))
    _emit_grid(GridFile.from_grid(DiskGrid(gf.gamma, values), {"source": str(args.in_path)}), args)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    start = time.perf_counter()
    gf = _read(args.in_path, "data")
    if args.band is None:
        raise InputError("reconstruct needs --band N")
    n_omega, n_rho = args.grid
    data = gf.to_grid()
    k_max = _k_window(data.n_beta, args.band)
    rec = svd_reconstruct(data, args.band, k_max, filter_lambda=args.filter, n_omega=n_omega, n_rho=n_rho)
    oob = rec.out_of_range
    summary = {
        "command": "reconstruct",
        "gamma": gf.gamma,
        "band": args.band,
        "filter": args.filter,
        "out_of_range_norm": oob.norm(),
        "out_of_range_offending": [list(p) for p in oob.offending(args.tol)],
    }
    status = EXIT_OK
    if args.truth is not None:
        truth = _read(args.truth, "disk").to_grid()
        approx = synthesize_disk(rec.coeffs, truth.n_omega, truth.n_rho)
        err = DiskGrid(truth.gamma, approx.values - truth.values).norm() / max(truth.norm(), np.finfo(float).tiny)
        summary.update(rel_l2_error=err, tolerance=args.tol, passed=bool(err < args.tol))
        status = EXIT_OK if err < args.tol else EXIT_FAIL
    summary["seconds"] = time.perf_counter() - start
    _emit_grid(GridFile.from_grid(rec.grid, {"source": str(args.in_path), "band": args.band}), args)
    # without --out the grid owns stdout, so the summary goes to stderr
    _emit_json(summary, _summary_path(args), sys.stderr)
    return status


def cmd_range_check(args) -> int:
    gf = _read(args.in_path, "data")
    band = 12 if args.band is None else args.band
    report = range_test(gf.to_grid(), gf.gamma, s=args.sobolev, tol=args.tol, M=band)
    _emit_json(report.to_dict(), args.out)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_spectrum(args) -> int:
    if args.in_path is None:
        raise InputError("--in PATH is required")
    if args.band is None:
        raise InputError("spectrum needs --band N")
    gf = GridFile.read(args.in_path)
    grid = gf.to_grid()
    table = analyze_data(grid, args.band, _k_window(grid.n_beta, args.band)) if gf.space == "data" else analyze_disk(grid, args.band)
    payload = {
        "space": gf.space,
        "gamma": gf.gamma,
        "band": args.band,
        "columns": ["n", "k", "re", "im"],
        "coefficients": _table_rows(table),
        "sobolev_norms": {str(s): sobolev_norm(table, s) for s in (0.0, 1.0, 2.0)},
    }
    if gf.space == "data":
        payload["out_of_band_norm"] = table.out_of_band().norm()
    _emit_json(payload, args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    only = None
    if args.only:
        only = [k.strip() for k in args.only.split(",") if k.strip()]
        unknown = [k for k in only if k not in CHECKS]
        if unknown:
            raise InputError(f"unknown check(s) {unknown}; choose from {', '.join(CHECKS)}")
    gammas = (args.gamma,) if args.gamma_given else CheckConfig().gammas
    cfg = CheckConfig(gammas=gammas, seed=args.seed, quad=_quad(args))
    results = run_checks(only, cfg)
    for r in results:
        print(r.line(), file=sys.stderr if args.out is None else sys.stdout)
    payload = {
        "passed": all(r.passed for r in results),
        "gammas": list(gammas),
        "seed": args.seed,
        "quad": cfg.quad.__dict__,
        "checks": [r.to_dict() for r in results],
    }
    _emit_json(payload, args.out)
    return EXIT_OK if payload["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--gamma", type=_gamma, default=None, help="weight exponent, > -1 (default 0)")
    common.add_argument("--band", type=int, default=None, metavar="N", help="band limit")
    common.add_argument("--grid", type=_grid_shape, default=(41, 24), metavar="N1xN2", help="grid sizes (default 41x24)")
    common.add_argument("--quad", type=int, default=None, metavar="LEVEL", help="double-exponential level for line integrals")
    common.add_argument("--tol", type=float, default=1e-6, help="pass/fail tolerance (default 1e-6)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--filter", type=float, default=None, metavar="LAMBDA", help="damping parameter of the SVD filter")
    common.add_argument("--in", dest="in_path", default=None, metavar="PATH")
    common.add_argument("--out", default=None, metavar="PATH")
    common.add_argument("--format", choices=("csv", "pgm"), default="csv")

    parser = argparse.ArgumentParser(prog="poincare-xray", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", parents=[common], help="sample a phantom on a grid")
    p.add_argument("descriptor", help="e.g. zernike:3,1 or 0.5*bump:0.5,0.2+gauss:0.4")
    p.add_argument("--space", choices=("disk", "data"), default="disk")
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("forward", parents=[common], help="forward X-ray transform onto a data grid")
    p.add_argument("--phantom", default=None, help="phantom descriptor (instead of --in)")
    p.set_defaults(func=cmd_forward)

    p = sub.add_parser("backproject", parents=[common], help="backproject a data grid onto a disk grid")
    p.set_defaults(func=cmd_backproject)

    p = sub.add_parser("reconstruct", parents=[common], help="SVD inversion of a data grid")
    p.add_argument("--truth", default=None, metavar="PATH", help="disk grid to compare against")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("range-check", parents=[common], help="test whether data lie in the range")
    p.add_argument("--sobolev", type=float, default=0.0, metavar="S", help="Sobolev order of the decay test")
    p.set_defaults(func=cmd_range_check)

    p = sub.add_parser("spectrum", parents=[common], help="coefficient table and Sobolev norms of a grid")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("selftest", parents=[common], help="run the acceptance checks")
    p.add_argument("--only", default=None, metavar="CHECKSET", help=f"comma list from: {', '.join(CHECKS)}")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    args.gamma_given = args.gamma is not None
    if args.gamma is None:
        args.gamma = 0.0
    try:
        return args.func(args)
    except QuadratureError as exc:
        print(f"quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_QUAD
    except (InputError, SchemaError, DescriptorError, AliasingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
