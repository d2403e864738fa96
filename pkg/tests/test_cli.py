import json
import os
import subprocess
import sys

import numpy as np
import pytest

from poincare_xray.cli import main
from poincare_xray.gridio import GridFile


def run(*argv):
    return main([str(a) for a in argv])


def test_phantom_output_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run("phantom", "zernike:3,1+0.5*bump:0.5,0.2", "--grid", "16x6", "--out", a) == 0
    assert run("phantom", "zernike:3,1+0.5*bump:0.5,0.2", "--grid", "16x6", "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()
    gf = GridFile.read(a)
    assert gf.space == "disk" and gf.values.shape == (16, 6)


def test_forward_of_constant_phantom_asserts_singular_triple(tmp_path):
    out = tmp_path / "f.csv"
    assert run("forward", "--phantom", "zernike:0,0", "--out", out) == 0
    summary = json.loads((tmp_path / "f.csv.summary.json").read_text())
    assert summary["passed"] and summary["singular_triple_rel_residual"] < 1e-6
    assert GridFile.read(out).space == "data"


def test_forward_reconstruct_round_trip(tmp_path):
    disk, data, rec = tmp_path / "z.csv", tmp_path / "d.csv", tmp_path / "r.csv"
    assert run("phantom", "zernike:3,1+0.5j*zernike:4,2", "--gamma", "0.5", "--grid", "17x8", "--out", disk) == 0
    assert run("forward", "--in", disk, "--band", "4", "--grid", "41x10", "--out", data) == 0
    assert run("reconstruct", "--in", data, "--band", "4", "--grid", "17x8", "--truth", disk, "--out", rec) == 0
    summary = json.loads((tmp_path / "r.csv.summary.json").read_text())
    assert summary["rel_l2_error"] < 1e-6 and summary["out_of_range_offending"] == []
    assert GridFile.read(rec).gamma == 0.5


def test_backprojection_of_constant_data(tmp_path):
    data, out = tmp_path / "c.csv", tmp_path / "b.csv"
    assert run("phantom", "const:1", "--space", "data", "--grid", "9x5", "--out", data) == 0
    assert run("backproject", "--in", data, "--grid", "6x3", "--out", out) == 0
    np.testing.assert_allclose(GridFile.read(out).values, 2 * np.pi, rtol=1e-12)


def test_range_check_flags_kernel_components(tmp_path, capsys):
    clean, dirty = tmp_path / "clean.csv", tmp_path / "dirty.csv"
    assert run("forward", "--phantom", "zernike:2,1", "--grid", "81x24", "--out", clean) == 0
    assert run("phantom", "psi:2,1+0.1*psi:3,5", "--space", "data", "--grid", "81x24", "--out", dirty) == 0
    capsys.readouterr()
    assert run("range-check", "--in", clean) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True
    assert run("range-check", "--in", dirty) == 1
    report = json.loads(capsys.readouterr().out)
    assert report["criteria"]["moments"]["offending"] == [[3, 5]]


def test_spectrum_reports_coefficients(tmp_path, capsys):
    disk = tmp_path / "z.csv"
    run("phantom", "2*zernike:2,1", "--grid", "9x4", "--out", disk)
    capsys.readouterr()
    assert run("spectrum", "--in", disk, "--band", "3") == 0
    payload = json.loads(capsys.readouterr().out)
    rows = {(n, k): complex(re, im) for n, k, re, im in payload["coefficients"]}
    assert abs(rows[(2, 1)] - 2.0) < 1e-12
    assert payload["sobolev_norms"]["1.0"] == pytest.approx(6.0)


def test_pgm_output(tmp_path):
    out = tmp_path / "z.pgm"
    assert run("phantom", "zernike:1,0", "--format", "pgm", "--grid", "8x4", "--out", out) == 0
    assert out.read_bytes().startswith(b"P5\n4 8\n255\n")


def test_selftest_subset(tmp_path, capsys):
    out = tmp_path / "st.json"
    assert run("selftest", "--only", "cosphere,forward", "--gamma", "-0.5", "--out", out) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("[PASS] criterion  9") and lines[1].startswith("[PASS] criterion  3")
    payload = json.loads(out.read_text())
    assert payload["gammas"] == [-0.5]
    assert payload["checks"][0]["tolerances"]["cosphere_variance"] == 1e-18


def test_exit_code_for_failed_check(tmp_path):
    assert run("forward", "--phantom", "zernike:1,0", "--tol", "1e-300", "--out", tmp_path / "f.csv") == 1


def test_exit_code_for_quadrature_failure(tmp_path):
    assert run("forward", "--phantom", "bump:0.9,0.05", "--quad", "2", "--out", tmp_path / "f.csv") == 3


@pytest.mark.parametrize(
    "argv",
    [
        ["phantom", "nonsense:1"],
        ["phantom", "zernike:1,0", "--gamma", "-1"],
        ["phantom", "zernike:1,0", "--grid", "8by4"],
        ["backproject"],
        ["selftest", "--only", "nothing"],
        ["no-such-command"],
        ["reconstruct", "--in", "/nonexistent/file.csv", "--band", "2"],
    ],
)
def test_exit_code_for_bad_input(argv, capsys):
    assert run(*argv) == 2


def test_schema_mismatch_is_input_error(tmp_path):
    disk = tmp_path / "z.csv"
    run("phantom", "zernike:1,0", "--grid", "8x4", "--out", disk)
    assert run("range-check", "--in", disk) == 2


def test_thread_cap_reaches_blas_variables():
    env = dict(os.environ, XRAY_NUM_THREADS="1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        env.pop(var, None)
    code = "import os, poincare_xray.cli; print(os.environ['OMP_NUM_THREADS'], os.environ['OPENBLAS_NUM_THREADS'])"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.split() == ["1", "1"]
